"""Pydantic models for every on-wire shape.

Field names and nesting follow the protocol's JSON listings exactly
(``maxTokens``, ``stopReason``, ``isError`` on the task envelopes;
``node_id``, ``system_info`` etc. on node documents). Timestamps stay
RFC-3339 strings on the wire so decoded documents re-encode byte-for-byte.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..clock import parse_rfc3339

JSONRPC_VERSION = "2.0"


class WireModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _require_rfc3339(value: str) -> str:
    try:
        parse_rfc3339(value)
    except ValueError as exc:
        raise ValueError(f"not an RFC-3339 timestamp: {value!r}") from exc
    return value


class RpcError(WireModel):
    code: int
    message: str
    data: Optional[Any] = None


class RpcRequest(WireModel):
    jsonrpc: Literal["2.0"]
    id: str = Field(min_length=1)
    method: str = Field(min_length=1)
    params: dict[str, Any] = Field(default_factory=dict)


class RpcResponse(WireModel):
    jsonrpc: Literal["2.0"]
    id: str = Field(min_length=1)
    result: Optional[dict[str, Any]] = None
    error: Optional[RpcError] = None

    @model_validator(mode="after")
    def _exactly_one_of_result_error(self) -> "RpcResponse":
        if (self.result is None) == (self.error is None):
            raise ValueError("exactly one of result/error must be present")
        return self


class Endpoint(WireModel):
    id: str = Field(min_length=1)
    role: Optional[str] = None


class MessageContent(WireModel):
    type: Literal["text"]
    text: str


class ChatMessage(WireModel):
    role: str = Field(min_length=1)
    content: MessageContent


class HumanTaskParams(WireModel):
    """Params of a human-initiated ``aios/delegateTask`` request."""

    sender: Endpoint
    recipient: Endpoint
    messages: list[ChatMessage] = Field(min_length=1)
    maxTokens: int = Field(gt=0)


class TaskSpec(WireModel):
    name: str = Field(min_length=1)
    arguments: dict[str, Any] = Field(default_factory=dict)


class DelegationParams(WireModel):
    """Params of an agent-initiated ``aios/delegateTask`` request."""

    intent: str = Field(min_length=1)
    sender: Endpoint
    recipient: Endpoint
    task: TaskSpec


class DelegationContent(WireModel):
    task: str
    status: Literal["completed", "failed"]
    output: dict[str, Any] = Field(default_factory=dict)


class DelegationResult(WireModel):
    sender: Endpoint
    recipient: Endpoint
    content: DelegationContent
    isError: bool

    @model_validator(mode="after")
    def _error_flag_matches_status(self) -> "DelegationResult":
        if self.isError != (self.content.status == "failed"):
            raise ValueError("isError must equal (status == 'failed')")
        return self


class HumanTaskResult(WireModel):
    sender: Endpoint
    recipient: Endpoint
    content: MessageContent
    model: str
    stopReason: Literal["endTurn", "maxTokens", "error"]


class SystemInfo(WireModel):
    cpu_percent: float = Field(ge=0, le=100)
    memory_percent: float = Field(ge=0, le=100)
    platform: str


class NodeStatusReport(WireModel):
    node_id: str = Field(min_length=1)
    node_name: str
    timestamp: str
    system_info: SystemInfo
    available_agents: list[str] = Field(default_factory=list)

    _ts = field_validator("timestamp")(_require_rfc3339)


class TaskAssignment(WireModel):
    task_id: str = Field(min_length=1)
    assigned_agent: str = Field(min_length=1)
    status: Literal["pending", "running", "completed", "failed"]


def validate_agent_id(agent_id: str) -> str:
    """Agent ids are ``namespace/agent_name`` with both halves nonempty."""
    parts = agent_id.split("/")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ValueError(
            f"agent_id must be 'namespace/agent_name', got {agent_id!r}"
        )
    return agent_id


class AgentMetadata(WireModel):
    """Availability-broadcast metadata, plus the fields a DHT node injects
    at store time (absent until a node registers the agent)."""

    agent_id: str
    description: list[str] = Field(default_factory=list)
    last_seen: str
    last_update: Optional[float] = None
    node_id: Optional[str] = None
    node_ip: Optional[str] = None
    node_port: Optional[int] = Field(default=None, ge=1, le=65535)

    _aid = field_validator("agent_id")(validate_agent_id)
    _ts = field_validator("last_seen")(_require_rfc3339)


class GossipEnvelope(WireModel):
    """Datagram payload for the presence gossip protocol."""

    sender_id: str = Field(min_length=1)
    message_type: str = Field(min_length=1)
    data: dict[str, Any] = Field(default_factory=dict)
    timestamp: str
    ttl: int = Field(ge=0)

    _ts = field_validator("timestamp")(_require_rfc3339)


class RegisterNodeParams(WireModel):
    """Params of ``aios/registerNode``: a status report plus the reporting
    node's reachable RPC address and per-agent metadata."""

    report: NodeStatusReport
    address: str = Field(min_length=1)
    agents: list[AgentMetadata] = Field(default_factory=list)


class RegistryNodeEntry(WireModel):
    report: NodeStatusReport
    address: str
    first_seen: str
    last_report: str
    health: Literal["online", "stale", "offline"]
    agents: list[AgentMetadata] = Field(default_factory=list)
    flagged_agents: list[str] = Field(default_factory=list)

    _fs = field_validator("first_seen")(_require_rfc3339)
    _lr = field_validator("last_report")(_require_rfc3339)


class RegistrySnapshot(WireModel):
    """Registry state at one version: node entries plus the flattened
    agent_id -> hosting node ids index over online nodes."""

    nodes: list[RegistryNodeEntry] = Field(default_factory=list)
    agents: dict[str, list[str]] = Field(default_factory=dict)
    version: int = Field(ge=0)


class RelayTaskParams(WireModel):
    """Params of ``aios/relayTask``: registry-side relay of a task request
    to a registered node (used by the dashboard)."""

    node_id: str = Field(min_length=1)
    task: dict[str, Any]


WireDocument = (
    RpcRequest
    | RpcResponse
    | NodeStatusReport
    | TaskAssignment
    | AgentMetadata
    | GossipEnvelope
)
