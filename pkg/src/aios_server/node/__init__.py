from .agents import (
    ACADEMIC_SUMMARY,
    AgentDescriptor,
    AgentError,
    builtin_agents,
    builtin_by_name,
)
from .runtime import (
    AgentNotFoundError,
    DuplicateAgentError,
    NodeRuntime,
    RemoteCandidate,
)
from .service import NodeServer, create_app
from .sysinfo import FixedSampler, PsutilSampler, SystemSampler

__all__ = [
    "ACADEMIC_SUMMARY",
    "AgentDescriptor",
    "AgentError",
    "AgentNotFoundError",
    "DuplicateAgentError",
    "FixedSampler",
    "NodeRuntime",
    "NodeServer",
    "PsutilSampler",
    "RemoteCandidate",
    "SystemSampler",
    "builtin_agents",
    "builtin_by_name",
    "create_app",
]
