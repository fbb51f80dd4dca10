"""Regenerates the JSON artifacts the dashboard shares with the server.

The dashboard validates every outbound request against the same shapes the
server enforces, and its tests render the same reference documents. Rather
than hand-copying shapes into TypeScript, this script exports them from the
pydantic models and from a real registry run, into frontend/src/generated/
(checked in, so the frontend builds without Python present).
"""

import json
from pathlib import Path

from aios_server.clock import ManualClock
from aios_server.registry import RegistryState
from aios_server.wire import (
    HumanTaskParams,
    NodeStatusReport,
    RegisterNodeParams,
    RpcRequest,
    golden_corpus,
)

OUT = Path(__file__).resolve().parents[1] / "frontend" / "src" / "generated"


def write(name: str, doc) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    print(f"wrote {OUT / name}")


def list_nodes_fixture() -> dict:
    """A listNodes result produced by the actual registry code, seeded with
    the reference status report."""
    golden = dict(golden_corpus())
    report = NodeStatusReport.model_validate(json.loads(golden["node_status_report"]))
    state = RegistryState(clock=ManualClock(start=1740744000.0))
    state.register_node(RegisterNodeParams(report=report, address="10.1.0.42:8080"))
    return state.to_snapshot().model_dump(mode="json", exclude_none=True)


def main() -> None:
    write("rpc_request.schema.json", RpcRequest.model_json_schema())
    write("human_task_params.schema.json", HumanTaskParams.model_json_schema())
    write("list_nodes.fixture.json", list_nodes_fixture())
    golden = dict(golden_corpus())
    write("human_request.fixture.json", json.loads(golden["human_request"]))


if __name__ == "__main__":
    main()
