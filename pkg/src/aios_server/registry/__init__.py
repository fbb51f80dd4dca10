from .state import (
    HEALTH_OFFLINE,
    HEALTH_ONLINE,
    HEALTH_STALE,
    AgentHit,
    RegistryState,
    StoredEntry,
)
from .service import RegistryServer, RegistryService, create_registry_app

__all__ = [
    "AgentHit",
    "HEALTH_OFFLINE",
    "HEALTH_ONLINE",
    "HEALTH_STALE",
    "RegistryServer",
    "RegistryService",
    "RegistryState",
    "StoredEntry",
    "create_registry_app",
]
