"""Canonical encoder/decoder for the JSON wire formats.

``encode``/``decode`` are the single path every component uses to touch
bytes. Encoding is deterministic (UTF-8, compact separators, field order as
declared on the models, free-form maps in insertion order), so encoding the
same message twice yields identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, Union

from pydantic import ValidationError

from .models import (
    AgentMetadata,
    DelegationParams,
    DelegationResult,
    GossipEnvelope,
    HumanTaskParams,
    HumanTaskResult,
    JSONRPC_VERSION,
    NodeStatusReport,
    RpcError,
    RpcRequest,
    RpcResponse,
    TaskAssignment,
    WireDocument,
)

# JSON-RPC 2.0 reserved codes plus this protocol's server-error range.
PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603
AGENT_NOT_FOUND = -32001
DELEGATION_FAILED = -32002
NODE_SHUTTING_DOWN = -32003
STORE_FAILED = -32010
LOOKUP_FAILED = -32011

METHOD_DELEGATE_TASK = "aios/delegateTask"
METHOD_NODE_STATUS = "aios/nodeStatus"
METHOD_SHUTDOWN = "aios/shutdown"
METHOD_REGISTER_NODE = "aios/registerNode"
METHOD_LIST_NODES = "aios/listNodes"
METHOD_LOOKUP_AGENT = "aios/lookupAgent"
METHOD_HEALTH = "aios/health"
METHOD_RELAY_TASK = "aios/relayTask"
DHT_PING = "dht/ping"
DHT_STORE = "dht/store"
DHT_FIND_NODE = "dht/findNode"
DHT_FIND_VALUE = "dht/findValue"


class WireError(Exception):
    """Base class for encode/decode failures."""


class WireParseError(WireError):
    """Payload is not valid JSON."""


class WireVersionError(WireError):
    """jsonrpc field missing or not '2.0'."""


class WireValidationError(WireError):
    """Document shape violates the schema; carries (path, reason) pairs."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        detail = "; ".join(f"{path}: {reason}" for path, reason in violations)
        super().__init__(f"schema validation failed: {detail}")


class EncodingRefusedError(WireError):
    """Message violates a type invariant and was not encoded."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"refusing to encode: {field}: {reason}")


def _violations(exc: ValidationError, prefix: str = "") -> list[tuple[str, str]]:
    out = []
    for err in exc.errors():
        path = ".".join(str(part) for part in err["loc"])
        if prefix:
            path = f"{prefix}.{path}" if path else prefix
        out.append((path, err["msg"]))
    return out


def _sniff_task_params(params: dict[str, Any]):
    if "messages" in params:
        return HumanTaskParams
    if "intent" in params or "task" in params:
        return DelegationParams
    return None


def _sniff_task_result(result: dict[str, Any]):
    if "stopReason" in result:
        return HumanTaskResult
    if "isError" in result:
        return DelegationResult
    return None


def _deep_validate(doc: RpcRequest | RpcResponse) -> None:
    """Validate task payloads on the delegateTask method; other methods carry
    free-form params validated by their handlers."""
    if isinstance(doc, RpcRequest) and doc.method == METHOD_DELEGATE_TASK:
        model = _sniff_task_params(doc.params)
        if model is None:
            raise WireValidationError(
                [("params", "neither a human task (messages) nor a delegation (intent/task)")]
            )
        try:
            model.model_validate(doc.params)
        except ValidationError as exc:
            raise WireValidationError(_violations(exc, "params")) from exc
    if isinstance(doc, RpcResponse) and doc.result is not None:
        model = _sniff_task_result(doc.result)
        if model is not None:
            try:
                model.model_validate(doc.result)
            except ValidationError as exc:
                raise WireValidationError(_violations(exc, "result")) from exc


def decode(data: Union[bytes, str]) -> WireDocument:
    """Decode one wire document.

    RPC traffic is recognized by its jsonrpc envelope (request vs response by
    the presence of ``method``); bare node documents are recognized by their
    distinguishing fields (``node_id``+``system_info``, ``task_id``,
    ``agent_id``, ``message_type``).
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireParseError(f"payload is not UTF-8: {exc}") from exc
    else:
        text = data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise WireValidationError([("", "top-level JSON value must be an object")])

    if "jsonrpc" in obj or "method" in obj or "result" in obj or "error" in obj:
        if obj.get("jsonrpc") != JSONRPC_VERSION:
            raise WireVersionError(
                f"unsupported jsonrpc version: {obj.get('jsonrpc')!r}"
            )
        model = RpcRequest if "method" in obj else RpcResponse
        try:
            doc = model.model_validate(obj)
        except ValidationError as exc:
            raise WireValidationError(_violations(exc)) from exc
        _deep_validate(doc)
        return doc

    if "node_id" in obj and "system_info" in obj:
        model = NodeStatusReport
    elif "task_id" in obj:
        model = TaskAssignment
    elif "message_type" in obj:
        model = GossipEnvelope
    elif "agent_id" in obj:
        model = AgentMetadata
    else:
        raise WireValidationError([("", "unrecognized document shape")])
    try:
        return model.model_validate(obj)
    except ValidationError as exc:
        raise WireValidationError(_violations(exc)) from exc


def encode(message: WireDocument) -> bytes:
    """Encode a wire document to canonical UTF-8 JSON bytes.

    The message is re-validated first so structurally invalid values (for
    example a response carrying both result and error) are refused rather
    than serialized.
    """
    if not isinstance(
        message,
        (RpcRequest, RpcResponse, NodeStatusReport, TaskAssignment, AgentMetadata, GossipEnvelope),
    ):
        raise EncodingRefusedError("", f"not a wire document: {type(message).__name__}")
    payload = message.model_dump(mode="json", exclude_none=True)
    try:
        revalidated = type(message).model_validate(payload)
        if isinstance(revalidated, (RpcRequest, RpcResponse)):
            _deep_validate(revalidated)
    except ValidationError as exc:
        first = _violations(exc)[0]
        raise EncodingRefusedError(first[0], first[1]) from exc
    except WireValidationError as exc:
        first = exc.violations[0]
        raise EncodingRefusedError(first[0], first[1]) from exc
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class DelegationVerdict:
    """Outcome of validating delegation params: ``ok`` plus either the
    normalized params or the (path, reason) violations."""

    def __init__(self, params: DelegationParams | None, violations: list[tuple[str, str]]):
        self.params = params
        self.violations = violations

    @property
    def ok(self) -> bool:
        return not self.violations

    def __repr__(self) -> str:
        state = "ok" if self.ok else f"violations={self.violations!r}"
        return f"DelegationVerdict({state})"


def validate_delegation(params: Union[DelegationParams, dict[str, Any]]) -> DelegationVerdict:
    """Check delegation params; absent task.arguments normalizes to {}."""
    raw = params.model_dump(exclude_none=True) if isinstance(params, DelegationParams) else params
    try:
        normalized = DelegationParams.model_validate(raw)
    except ValidationError as exc:
        return DelegationVerdict(None, _violations(exc))
    return DelegationVerdict(normalized, [])


def make_request(id: str, method: str, params: dict[str, Any]) -> RpcRequest:
    return RpcRequest(jsonrpc=JSONRPC_VERSION, id=id, method=method, params=params)


def make_result_response(id: str, result: dict[str, Any]) -> RpcResponse:
    return RpcResponse(jsonrpc=JSONRPC_VERSION, id=id, result=result)


def make_error_response(id: str, code: int, message: str) -> RpcResponse:
    """Error response echoing the originating request id; result stays absent."""
    if not id:
        raise ValueError("error response requires a nonempty request id")
    return RpcResponse(
        jsonrpc=JSONRPC_VERSION, id=id, error=RpcError(code=code, message=message)
    )


def parse_task_params(params: dict[str, Any]) -> HumanTaskParams | DelegationParams:
    """Interpret delegateTask params as a human task or a delegation."""
    model = _sniff_task_params(params)
    if model is None:
        raise WireValidationError(
            [("params", "neither a human task (messages) nor a delegation (intent/task)")]
        )
    try:
        return model.model_validate(params)
    except ValidationError as exc:
        raise WireValidationError(_violations(exc, "params")) from exc


def parse_task_result(result: dict[str, Any]) -> HumanTaskResult | DelegationResult:
    model = _sniff_task_result(result)
    if model is None:
        raise WireValidationError([("result", "not a recognizable task result")])
    try:
        return model.model_validate(result)
    except ValidationError as exc:
        raise WireValidationError(_violations(exc, "result")) from exc
