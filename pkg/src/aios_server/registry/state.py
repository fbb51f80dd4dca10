"""Registry state: node entries, derived health, and the flattened agent index.

Pure state machine — no sockets, no tasks. The service layer drives it with
RPC calls, periodic sweeps, and peer merges; tests drive it directly with a
manual clock.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from ..clock import Clock, SystemClock, format_rfc3339, parse_rfc3339
from ..wire import (
    AgentMetadata,
    NodeStatusReport,
    RegisterNodeParams,
    RegistryNodeEntry,
    RegistrySnapshot,
)

HEALTH_ONLINE = "online"
HEALTH_STALE = "stale"
HEALTH_OFFLINE = "offline"

_RANK = {HEALTH_ONLINE: 0, HEALTH_STALE: 1, HEALTH_OFFLINE: 2}


@dataclass
class StoredEntry:
    report: NodeStatusReport
    address: str
    first_seen: float
    last_report: float
    health: str
    agents: List[AgentMetadata] = field(default_factory=list)
    flagged_agents: List[str] = field(default_factory=list)

    def to_wire(self, health: Optional[str] = None) -> RegistryNodeEntry:
        return RegistryNodeEntry(
            report=self.report,
            address=self.address,
            first_seen=format_rfc3339(self.first_seen),
            last_report=format_rfc3339(self.last_report),
            health=health if health is not None else self.health,
            agents=list(self.agents),
            flagged_agents=list(self.flagged_agents),
        )

    @classmethod
    def from_wire(cls, doc: RegistryNodeEntry) -> "StoredEntry":
        return cls(
            report=doc.report,
            address=doc.address,
            first_seen=parse_rfc3339(doc.first_seen),
            last_report=parse_rfc3339(doc.last_report),
            health=doc.health,
            agents=list(doc.agents),
            flagged_agents=list(doc.flagged_agents),
        )


@dataclass
class AgentHit:
    agent_id: str
    node_id: str
    address: str

    def to_doc(self) -> dict:
        return {"agent_id": self.agent_id, "node_id": self.node_id, "address": self.address}


class RegistryState:
    def __init__(
        self,
        *,
        clock: Optional[Clock] = None,
        report_period_s: float = 5.0,
        denylist: Iterable[str] = (),
    ):
        self.clock = clock or SystemClock()
        self.stale_after = 3 * report_period_s
        self.offline_after = 10 * report_period_s
        self.denylist = set(denylist)
        self._entries: Dict[str, StoredEntry] = {}
        self._version = 0
        self.dirty = False  # set on every mutation; cleared by persistence

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def version(self) -> int:
        return self._version

    def _bump(self) -> None:
        self._version += 1
        self.dirty = True

    def _health_of(self, silent_for: float) -> str:
        if silent_for > self.offline_after:
            return HEALTH_OFFLINE
        if silent_for > self.stale_after:
            return HEALTH_STALE
        return HEALTH_ONLINE

    # -- writes -----------------------------------------------------------

    def register_node(self, params: RegisterNodeParams) -> dict:
        report = params.report
        flagged = sorted(
            (set(report.available_agents) | {a.agent_id for a in params.agents})
            & self.denylist
        )
        clean_report = report.model_copy(
            update={
                "available_agents": [
                    a for a in report.available_agents if a not in self.denylist
                ]
            }
        )
        now = self.clock.now()
        existing = self._entries.get(report.node_id)
        self._entries[report.node_id] = StoredEntry(
            report=clean_report,
            address=params.address,
            first_seen=existing.first_seen if existing else now,
            last_report=now,
            health=HEALTH_ONLINE,
            agents=[a for a in params.agents if a.agent_id not in self.denylist],
            flagged_agents=flagged,
        )
        self._bump()
        return {
            "registered": True,
            "node_id": report.node_id,
            "health": HEALTH_ONLINE,
            "flagged_agents": flagged,
            "version": self._version,
        }

    def health_sweep(self, now: Optional[float] = None) -> Dict[str, Tuple[str, str]]:
        """Record health transitions into stored entries; {node_id: (old, new)}.

        Reads derive health on the fly; the sweep exists to notice transitions
        (bumping the version so watchers see them) and to refresh what gets
        persisted.
        """
        if now is None:
            now = self.clock.now()
        transitions: Dict[str, Tuple[str, str]] = {}
        for node_id, entry in self._entries.items():
            new = self._health_of(now - entry.last_report)
            if new != entry.health:
                transitions[node_id] = (entry.health, new)
                entry.health = new
        if transitions:
            self._bump()
        return transitions

    def merge_entries(self, entries: Iterable[RegistryNodeEntry]) -> List[str]:
        """Adopt peer entries whose last_report is newer; returns adopted ids."""
        adopted: List[str] = []
        now = self.clock.now()
        for doc in entries:
            node_id = doc.report.node_id
            incoming = StoredEntry.from_wire(doc)
            mine = self._entries.get(node_id)
            if mine is not None and mine.last_report >= incoming.last_report:
                continue
            # the local denylist applies to adopted entries too
            flagged = sorted(
                set(incoming.flagged_agents)
                | (
                    (
                        set(incoming.report.available_agents)
                        | {a.agent_id for a in incoming.agents}
                    )
                    & self.denylist
                )
            )
            incoming.report = incoming.report.model_copy(
                update={
                    "available_agents": [
                        a
                        for a in incoming.report.available_agents
                        if a not in self.denylist
                    ]
                }
            )
            incoming.agents = [a for a in incoming.agents if a.agent_id not in self.denylist]
            incoming.flagged_agents = flagged
            incoming.health = self._health_of(now - incoming.last_report)
            self._entries[node_id] = incoming
            adopted.append(node_id)
        if adopted:
            self._bump()
        return adopted

    # -- reads ------------------------------------------------------------
    # Health is a pure function of report age, so reads derive it from the
    # clock rather than trusting the value recorded at the last sweep; two
    # registries sharing a clock therefore agree regardless of sweep timing.

    def entry(self, node_id: str) -> Optional[StoredEntry]:
        return self._entries.get(node_id)

    def agents_index(self) -> Dict[str, List[str]]:
        now = self.clock.now()
        index: Dict[str, List[str]] = {}
        for node_id, entry in self._entries.items():
            if self._health_of(now - entry.last_report) != HEALTH_ONLINE:
                continue
            for agent_id in entry.report.available_agents:
                index.setdefault(agent_id, []).append(node_id)
        return {agent_id: sorted(nodes) for agent_id, nodes in sorted(index.items())}

    def to_snapshot(self) -> RegistrySnapshot:
        now = self.clock.now()
        return RegistrySnapshot(
            nodes=[
                self._entries[nid].to_wire(
                    self._health_of(now - self._entries[nid].last_report)
                )
                for nid in sorted(self._entries)
            ],
            agents=self.agents_index(),
            version=self._version,
        )

    def lookup_agent(self, query: str) -> List[AgentHit]:
        now = self.clock.now()
        online = [
            (node_id, entry)
            for node_id, entry in self._entries.items()
            if self._health_of(now - entry.last_report) == HEALTH_ONLINE
        ]
        exact = {
            (agent_id, node_id): AgentHit(agent_id, node_id, entry.address)
            for node_id, entry in online
            for agent_id in set(entry.report.available_agents)
            | {a.agent_id for a in entry.agents}
            if agent_id == query
        }
        if not exact:
            # no id matched; fall back to a capability-tag scan
            exact = {
                (meta.agent_id, node_id): AgentHit(meta.agent_id, node_id, entry.address)
                for node_id, entry in online
                for meta in entry.agents
                if query in meta.description
            }
        return sorted(exact.values(), key=lambda h: (h.agent_id, h.node_id))

    def fingerprint(self) -> str:
        """Content hash over everything except the version counter."""
        doc = self.to_snapshot().model_dump(mode="json", exclude_none=True)
        doc.pop("version", None)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        snapshot = self.to_snapshot().model_dump(mode="json", exclude_none=True)
        Path(path).write_text(json.dumps(snapshot, indent=2) + "\n")
        self.dirty = False

    @classmethod
    def load(
        cls,
        path,
        *,
        clock: Optional[Clock] = None,
        report_period_s: float = 5.0,
        denylist: Iterable[str] = (),
    ) -> "RegistryState":
        state = cls(clock=clock, report_period_s=report_period_s, denylist=denylist)
        snapshot = RegistrySnapshot.model_validate(json.loads(Path(path).read_text()))
        state._entries = {
            doc.report.node_id: StoredEntry.from_wire(doc) for doc in snapshot.nodes
        }
        state._version = snapshot.version
        return state
