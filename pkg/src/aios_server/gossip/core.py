"""Epidemic presence protocol: TTL-bounded fanout, dedupe cache, peer liveness.

The core is sans-IO: every entry point returns the datagrams to send as
(address, message) pairs and never touches a socket, so simulations drive it
with a manual clock and a seeded RNG.
"""

from __future__ import annotations

import enum
import random
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..clock import Clock, SystemClock, format_rfc3339, parse_rfc3339
from ..transport import Address
from ..wire import GossipEnvelope, WireError, decode, validate_agent_id

DEFAULT_PERIOD_S = 1.0
DEFAULT_TTL = 8
DEFAULT_CACHE_CAPACITY = 4096

MSG_AGENT_REGISTER = "agent_register"
MSG_AGENT_UPDATE = "agent_update"
MSG_HEARTBEAT = "heartbeat"
MSG_DEPARTURE = "departure"
_APPLIED_TYPES = {MSG_AGENT_REGISTER, MSG_AGENT_UPDATE, MSG_HEARTBEAT, MSG_DEPARTURE}


def fanout_targets(live_peer_count: int) -> int:
    """How many peers receive a forwarded copy."""
    if live_peer_count <= 0:
        return 0
    return min(live_peer_count, max(3, int(live_peer_count**0.5)))


class NodeState(enum.Enum):
    ALIVE = "alive"
    SUSPECT = "suspect"
    DEAD = "dead"


@dataclass
class PeerRecord:
    ip: str
    port: int
    state: NodeState
    last_heard: float
    node_id: Optional[str] = None

    @property
    def address(self) -> Address:
        return self.ip, self.port


@dataclass
class PresenceRecord:
    agent_id: str
    capabilities: List[str]
    node_id: str
    last_seen: float
    # where the hosting node serves RPC traffic; needed to delegate to it
    node_ip: Optional[str] = None
    node_port: Optional[int] = None

    def to_doc(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "capabilities": list(self.capabilities),
            "node_id": self.node_id,
            "last_seen": self.last_seen,
            "node_ip": self.node_ip,
            "node_port": self.node_port,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PresenceRecord":
        return cls(
            agent_id=str(doc["agent_id"]),
            capabilities=[str(c) for c in doc.get("capabilities", [])],
            node_id=str(doc.get("node_id", "")),
            last_seen=float(doc.get("last_seen", 0.0)),
            node_ip=doc.get("node_ip"),
            node_port=doc.get("node_port"),
        )


class MessageCache:
    """Bounded seen-set keyed by (sender_id, message_type, timestamp)."""

    def __init__(self, capacity: int = DEFAULT_CACHE_CAPACITY):
        self.capacity = capacity
        self._entries: OrderedDict[Tuple[str, str, str], float] = OrderedDict()

    def seen(self, identity: Tuple[str, str, str], now: float) -> bool:
        """Record identity; True if it was already present."""
        if identity in self._entries:
            return True
        self._entries[identity] = now
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)  # oldest first
        return False

    def __contains__(self, identity) -> bool:
        return identity in self._entries

    def __len__(self) -> int:
        return len(self._entries)


Send = Tuple[Address, GossipEnvelope]


class GossipCore:
    def __init__(
        self,
        node_id: str,
        ip: str,
        port: int = 8001,
        *,
        clock: Optional[Clock] = None,
        rng: Optional[random.Random] = None,
        period_s: float = DEFAULT_PERIOD_S,
        initial_ttl: int = DEFAULT_TTL,
        cache_capacity: int = DEFAULT_CACHE_CAPACITY,
        suspect_after: Optional[float] = None,
        dead_after: Optional[float] = None,
        expire_after: Optional[float] = None,
    ):
        self.node_id = node_id
        self.ip = ip
        self.port = port
        self.clock = clock or SystemClock()
        self.rng = rng or random.Random()
        self.period_s = period_s
        self.initial_ttl = initial_ttl
        self.suspect_after = suspect_after if suspect_after is not None else 3 * period_s
        self.dead_after = dead_after if dead_after is not None else 10 * period_s
        self.expire_after = expire_after if expire_after is not None else 30 * period_s
        self.cache = MessageCache(cache_capacity)
        self._peers: Dict[Address, PeerRecord] = {}
        self._presence: Dict[str, PresenceRecord] = {}
        self._own_agents: set[str] = set()
        self._last_stamp = 0.0
        self.apply_counts: Dict[Tuple[str, str, str], int] = {}

    @property
    def address(self) -> Address:
        return self.ip, self.port

    # -- membership -------------------------------------------------------

    def add_peer(self, address: Address, node_id: Optional[str] = None) -> None:
        address = (address[0], int(address[1]))
        if address == self.address:
            return
        existing = self._peers.get(address)
        if existing is None:
            self._peers[address] = PeerRecord(
                address[0], address[1], NodeState.ALIVE, self.clock.now(), node_id
            )
        elif node_id and not existing.node_id:
            existing.node_id = node_id

    def peers(self) -> Dict[Address, PeerRecord]:
        return dict(self._peers)

    def live_peers(self) -> List[PeerRecord]:
        return [p for p in self._peers.values() if p.state != NodeState.DEAD]

    def note_send_failure(self, address: Address) -> None:
        peer = self._peers.get(address)
        if peer is not None and peer.state == NodeState.ALIVE:
            peer.state = NodeState.SUSPECT

    def _mark_alive(self, address: Address) -> None:
        self.add_peer(address)
        peer = self._peers.get(address)
        if peer is not None:
            peer.state = NodeState.ALIVE
            peer.last_heard = self.clock.now()

    # -- messaging ----------------------------------------------------------

    def _make_message(self, message_type: str, data: dict) -> GossipEnvelope:
        now = self.clock.now()
        if now <= self._last_stamp:
            # one microsecond keeps (sender, type, timestamp) identities unique
            now = self._last_stamp + 1e-6
        self._last_stamp = now
        message = GossipEnvelope(
            sender_id=self.node_id,
            message_type=message_type,
            data=data,
            timestamp=format_rfc3339(now),
            ttl=self.initial_ttl,
        )
        self.cache.seen((self.node_id, message_type, message.timestamp), now)
        return message

    def propagate(self, message: GossipEnvelope) -> List[Send]:
        if message.ttl <= 1:
            return []
        live = self.live_peers()
        count = fanout_targets(len(live))
        if count == 0:
            return []
        targets = self.rng.sample(live, count)
        forwarded = message.model_copy(update={"ttl": message.ttl - 1})
        return [(peer.address, forwarded) for peer in targets]

    def on_datagram(self, payload: bytes, from_addr: Address) -> List[Send]:
        try:
            message = decode(payload)
        except WireError:
            return []
        if not isinstance(message, GossipEnvelope):
            return []
        _, sends = self.on_receive(message, from_addr)
        return sends

    def on_receive(
        self, message: GossipEnvelope, from_addr: Optional[Address] = None
    ) -> Tuple[str, List[Send]]:
        identity = (message.sender_id, message.message_type, message.timestamp)
        if self.cache.seen(identity, self.clock.now()):
            return "duplicate", []
        if from_addr is not None:
            self._mark_alive(from_addr)
        if message.message_type not in _APPLIED_TYPES:
            # still forwarded: dissemination does not require local understanding
            return "ignored", self.propagate(message)
        self._apply(message)
        self.apply_counts[identity] = self.apply_counts.get(identity, 0) + 1
        return "applied", self.propagate(message)

    def _apply(self, message: GossipEnvelope) -> None:
        data = message.data
        if message.message_type in (MSG_AGENT_REGISTER, MSG_AGENT_UPDATE):
            self._upsert_presence(data)
        elif message.message_type == MSG_HEARTBEAT:
            ip, port = data.get("gossip_ip"), data.get("gossip_port")
            if ip and port:
                self.add_peer((str(ip), int(port)), str(data.get("node_id", "")) or None)
            for doc in data.get("agents", []):
                self._upsert_presence(doc)
        elif message.message_type == MSG_DEPARTURE:
            departed = str(data.get("node_id", ""))
            for peer in self._peers.values():
                if peer.node_id == departed:
                    peer.state = NodeState.DEAD
            self._presence = {
                agent_id: rec
                for agent_id, rec in self._presence.items()
                if rec.node_id != departed
            }

    def _upsert_presence(self, doc: dict) -> None:
        try:
            record = PresenceRecord.from_doc(doc)
        except (KeyError, TypeError, ValueError):
            return
        if record.agent_id in self._own_agents:
            return  # our own registrations are authoritative locally
        existing = self._presence.get(record.agent_id)
        if existing is not None and existing.last_seen >= record.last_seen:
            return  # newer timestamp wins; last_seen never goes backwards
        self._presence[record.agent_id] = record

    # -- directory ------------------------------------------------------------

    def register_agent(
        self,
        agent_id: str,
        capabilities: List[str],
        *,
        node_ip: Optional[str] = None,
        node_port: Optional[int] = None,
    ) -> List[Send]:
        validate_agent_id(agent_id)
        now = self.clock.now()
        record = PresenceRecord(
            agent_id=agent_id,
            capabilities=list(capabilities),
            node_id=self.node_id,
            last_seen=now,
            node_ip=node_ip if node_ip is not None else self.ip,
            node_port=node_port if node_port is not None else self.port,
        )
        self._presence[agent_id] = record
        self._own_agents.add(agent_id)
        message = self._make_message(MSG_AGENT_REGISTER, record.to_doc())
        return self.propagate(message)

    def unregister_agent(self, agent_id: str) -> None:
        self._own_agents.discard(agent_id)
        self._presence.pop(agent_id, None)

    def _fresh(self, record: PresenceRecord) -> bool:
        return self.clock.now() - record.last_seen <= self.expire_after

    def find_agent(self, agent_id: str) -> Optional[PresenceRecord]:
        record = self._presence.get(agent_id)
        if record is not None and self._fresh(record):
            return record
        return None

    def find_agents_by_capability(self, capability: str) -> List[PresenceRecord]:
        hits = [
            rec
            for rec in self._presence.values()
            if capability in rec.capabilities and self._fresh(rec)
        ]
        return sorted(hits, key=lambda r: r.agent_id)

    def agents(self) -> List[PresenceRecord]:
        return sorted(
            (rec for rec in self._presence.values() if self._fresh(rec)),
            key=lambda r: r.agent_id,
        )

    def directory_fingerprint(self) -> str:
        import hashlib
        import json

        snapshot = [
            (r.agent_id, tuple(r.capabilities), r.node_id, r.last_seen)
            for r in self.agents()
        ]
        return hashlib.sha256(json.dumps(snapshot, sort_keys=True).encode()).hexdigest()

    # -- periodic work -----------------------------------------------------------

    def tick(self) -> List[Send]:
        """One gossip period: degrade silent peers, expire stale records,
        re-advertise own agents in a heartbeat."""
        now = self.clock.now()
        for peer in self._peers.values():
            silent = now - peer.last_heard
            if silent > self.dead_after:
                peer.state = NodeState.DEAD
            elif silent > self.suspect_after and peer.state == NodeState.ALIVE:
                peer.state = NodeState.SUSPECT
        for agent_id in self._own_agents:
            if agent_id in self._presence:
                self._presence[agent_id].last_seen = now
        self._presence = {
            agent_id: rec
            for agent_id, rec in self._presence.items()
            if agent_id in self._own_agents or self._fresh(rec)
        }
        own_docs = [
            self._presence[a].to_doc() for a in sorted(self._own_agents) if a in self._presence
        ]
        heartbeat = self._make_message(
            MSG_HEARTBEAT,
            {
                "node_id": self.node_id,
                "gossip_ip": self.ip,
                "gossip_port": self.port,
                "agents": own_docs,
            },
        )
        return self.propagate(heartbeat)

    def departure(self) -> List[Send]:
        message = self._make_message(MSG_DEPARTURE, {"node_id": self.node_id})
        return self.propagate(message)
