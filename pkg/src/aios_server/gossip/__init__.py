"""Gossip-based presence and capability directory."""

from .core import (
    DEFAULT_PERIOD_S,
    DEFAULT_TTL,
    MSG_AGENT_REGISTER,
    MSG_AGENT_UPDATE,
    MSG_DEPARTURE,
    MSG_HEARTBEAT,
    GossipCore,
    MessageCache,
    NodeState,
    PeerRecord,
    PresenceRecord,
    Send,
    fanout_targets,
)
from .udp import GossipUdpService

__all__ = [
    "DEFAULT_PERIOD_S",
    "DEFAULT_TTL",
    "GossipCore",
    "GossipUdpService",
    "MSG_AGENT_REGISTER",
    "MSG_AGENT_UPDATE",
    "MSG_DEPARTURE",
    "MSG_HEARTBEAT",
    "MessageCache",
    "NodeState",
    "PeerRecord",
    "PresenceRecord",
    "Send",
    "fanout_targets",
]
