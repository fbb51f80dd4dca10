"""Single source of truth for all on-wire message shapes."""

from .codec import (
    AGENT_NOT_FOUND,
    DELEGATION_FAILED,
    DHT_FIND_NODE,
    DHT_FIND_VALUE,
    DHT_PING,
    DHT_STORE,
    INTERNAL_ERROR,
    INVALID_PARAMS,
    INVALID_REQUEST,
    LOOKUP_FAILED,
    METHOD_DELEGATE_TASK,
    METHOD_HEALTH,
    METHOD_LIST_NODES,
    METHOD_LOOKUP_AGENT,
    METHOD_NODE_STATUS,
    METHOD_NOT_FOUND,
    METHOD_REGISTER_NODE,
    METHOD_RELAY_TASK,
    METHOD_SHUTDOWN,
    NODE_SHUTTING_DOWN,
    PARSE_ERROR,
    STORE_FAILED,
    DelegationVerdict,
    EncodingRefusedError,
    WireError,
    WireParseError,
    WireValidationError,
    WireVersionError,
    decode,
    encode,
    make_error_response,
    make_request,
    make_result_response,
    parse_task_params,
    parse_task_result,
    validate_delegation,
)
from .golden import golden_corpus
from .models import (
    AgentMetadata,
    ChatMessage,
    DelegationContent,
    DelegationParams,
    DelegationResult,
    Endpoint,
    GossipEnvelope,
    HumanTaskParams,
    HumanTaskResult,
    JSONRPC_VERSION,
    MessageContent,
    NodeStatusReport,
    RegisterNodeParams,
    RegistryNodeEntry,
    RegistrySnapshot,
    RelayTaskParams,
    RpcError,
    RpcRequest,
    RpcResponse,
    SystemInfo,
    TaskAssignment,
    TaskSpec,
    WireDocument,
    validate_agent_id,
)

__all__ = [name for name in dir() if not name.startswith("_")]
