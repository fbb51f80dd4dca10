"""Built-in deterministic agents and the handler contract they implement."""

from __future__ import annotations

import ast
import csv
import statistics
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable, Dict, List, Optional

from ..wire import validate_agent_id

# handlers take (task_name, arguments) and return text or a structured map
AgentHandler = Callable[[str, Dict[str, Any]], Any]


@dataclass
class AgentDescriptor:
    agent_id: str
    description: List[str] = field(default_factory=list)
    handler: Optional[AgentHandler] = None
    model: str = "deterministic"

    def __post_init__(self):
        validate_agent_id(self.agent_id)

    @property
    def bare_name(self) -> str:
        return self.agent_id.split("/", 1)[1]


class AgentError(RuntimeError):
    """Raised by handlers for task-level failures."""


# -- echo ---------------------------------------------------------------------


def echo_handler(task_name: str, arguments: Dict[str, Any]) -> str:
    text = arguments.get("text")
    if text is None:
        raise AgentError("echo needs a 'text' argument")
    return str(text)


# -- arithmetic ----------------------------------------------------------------

_ALLOWED_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def _eval_arith(node: ast.AST):
    if isinstance(node, ast.Expression):
        return _eval_arith(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval_arith(node.operand)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
        return _ALLOWED_BINOPS[type(node.op)](_eval_arith(node.left), _eval_arith(node.right))
    raise AgentError(f"unsupported expression element: {ast.dump(node)[:40]}")


def evaluate_expression(text: str) -> str:
    """Evaluate an integer +,-,*,/ expression; whole results render as ints."""
    normalized = text.replace("×", "*").replace("÷", "/").strip()
    try:
        tree = ast.parse(normalized, mode="eval")
    except SyntaxError as exc:
        raise AgentError(f"cannot parse expression: {exc.msg}") from exc
    try:
        value = _eval_arith(tree)
    except ZeroDivisionError as exc:
        raise AgentError("division by zero") from exc
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return str(value)


def math_handler(task_name: str, arguments: Dict[str, Any]) -> str:
    expression = arguments.get("expression") or arguments.get("text")
    if not expression:
        raise AgentError("math needs an 'expression' (or 'text') argument")
    return evaluate_expression(str(expression))


# -- statistics over the bundled CSV ---------------------------------------------

FIXTURE_NAME = "financial_reports_2023.csv"


def load_dataset(name: str) -> List[float]:
    """Load the named bundled CSV and return its numeric 'value' column."""
    if "/" in name or "\\" in name:
        raise AgentError(f"unknown dataset {name!r}")
    package = resources.files("aios_server") / "data" / name
    if not package.is_file():
        raise AgentError(f"unknown dataset {name!r}")
    with package.open("r") as fh:
        return [float(row["value"]) for row in csv.DictReader(fh)]


def stats_handler(task_name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
    dataset = arguments.get("dataset")
    if not dataset:
        raise AgentError("stats needs a 'dataset' argument")
    features = arguments.get("features") or ["mean", "std", "sample_size"]
    values = load_dataset(str(dataset))
    available = {
        "mean": lambda: round(statistics.fmean(values), 1),
        "std": lambda: round(statistics.pstdev(values), 1),
        "sample_size": lambda: len(values),
        "min": lambda: round(min(values), 1),
        "max": lambda: round(max(values), 1),
    }
    output: Dict[str, Any] = {}
    for feature in features:
        if feature not in available:
            raise AgentError(f"unknown feature {feature!r}")
        output[feature] = available[feature]()
    return output


# -- canned text analysis ----------------------------------------------------------

ACADEMIC_SUMMARY = (
    "The paper presents a novel approach to optimizing transformer models, "
    "achieving a 20% improvement."
)


def academic_handler(task_name: str, arguments: Dict[str, Any]) -> str:
    return ACADEMIC_SUMMARY


# -- catalogue ----------------------------------------------------------------------


def builtin_agents() -> List[AgentDescriptor]:
    return [
        AgentDescriptor("example/echo_agent", ["echo", "text"], echo_handler),
        AgentDescriptor("example/math_agent", ["arithmetic", "math"], math_handler),
        AgentDescriptor(
            "example/stats_agent",
            ["extract_data", "statistics", "data_analysis"],
            stats_handler,
        ),
        AgentDescriptor(
            "example/academic_agent",
            ["text_analysis", "research"],
            academic_handler,
            model="GPT-4",
        ),
    ]


def builtin_by_name(names: List[str]) -> List[AgentDescriptor]:
    """Resolve enabled-agent config entries (bare or full ids) to descriptors."""
    catalogue = {a.agent_id: a for a in builtin_agents()}
    catalogue.update({a.bare_name: a for a in builtin_agents()})
    missing = [n for n in names if n not in catalogue]
    if missing:
        raise ValueError(f"unknown built-in agents: {missing}")
    seen = []
    for name in names:
        agent = catalogue[name]
        if agent.agent_id not in [a.agent_id for a in seen]:
            seen.append(agent)
    return seen
