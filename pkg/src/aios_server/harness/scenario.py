"""Scenario orchestration: spawn registries and nodes, wire a topology, inject
faults, and tear everything down.

Two modes share one spec shape. Simulated mode builds everything in process on
a SimNetwork with a manual clock (deterministic; used by the property tests and
benchmarks). Real mode binds actual localhost sockets via uvicorn.
"""

from __future__ import annotations

import asyncio
import json
import random
import socket
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from ..clock import ManualClock
from ..config import NodeConfig, RegistryConfig
from ..dht import DhtNode
from ..gossip import GossipCore
from ..node.agents import builtin_by_name
from ..node.runtime import NodeRuntime
from ..node.sysinfo import FixedSampler
from ..registry.service import RegistryService
from ..transport import Address
from ..wire import encode
from .simnet import SimNetwork

TOPOLOGIES = ("star-via-registry", "line-bootstrap", "full-bootstrap")
CLOCK_MODES = ("simulated", "real")

DEFAULT_AGENTS = ["echo_agent"]


class SpawnError(RuntimeError):
    pass


@dataclass
class FaultEvent:
    time: float
    action: str  # kill | partition | heal
    target: Optional[str] = None  # node/registry name for kill
    groups: List[List[str]] = field(default_factory=list)  # for partition

    @classmethod
    def from_doc(cls, doc: dict) -> "FaultEvent":
        action = doc["action"]
        if action not in ("kill", "partition", "heal"):
            raise ValueError(f"unknown fault action {action!r}")
        return cls(
            time=float(doc["time"]),
            action=action,
            target=doc.get("target"),
            groups=[list(g) for g in doc.get("groups", [])],
        )


@dataclass
class ScenarioSpec:
    node_count: int
    registry_count: int = 1
    topology: str = "star-via-registry"
    seed: int = 0
    clock: str = "simulated"
    faults: List[FaultEvent] = field(default_factory=list)
    agents: List[str] = field(default_factory=lambda: list(DEFAULT_AGENTS))

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if self.registry_count < 0:
            raise ValueError("registry_count must be >= 0")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        if self.clock not in CLOCK_MODES:
            raise ValueError(f"clock must be one of {CLOCK_MODES}")
        if self.topology == "star-via-registry" and self.registry_count == 0:
            raise ValueError("star-via-registry needs at least one registry")

    @classmethod
    def from_doc(cls, doc: dict) -> "ScenarioSpec":
        return cls(
            node_count=int(doc["node_count"]),
            registry_count=int(doc.get("registry_count", 1)),
            topology=doc.get("topology", "star-via-registry"),
            seed=int(doc.get("seed", 0)),
            clock=doc.get("clock", "simulated"),
            faults=[FaultEvent.from_doc(f) for f in doc.get("faults", [])],
            agents=list(doc.get("agents", DEFAULT_AGENTS)),
        )

    @classmethod
    def from_file(cls, path) -> "ScenarioSpec":
        return cls.from_doc(json.loads(Path(path).read_text()))


class GossipBinding:
    """Connects a GossipCore to SimNetwork datagrams."""

    def __init__(self, net: SimNetwork, core: GossipCore, owner: str):
        self.net = net
        self.core = core
        net.register_datagram(owner, core.address, self._on_datagram)

    def _on_datagram(self, payload: bytes, src: Address) -> None:
        self.emit(self.core.on_datagram(payload, src))

    def emit(self, sends) -> None:
        for address, message in sends:
            self.net.send_datagram(self.core.address, address, encode(message))


@dataclass
class SimNode:
    name: str
    runtime: NodeRuntime
    gossip: GossipCore
    binding: GossipBinding
    dht: Optional[DhtNode]
    rpc_address: Address


@dataclass
class SimRegistry:
    name: str
    service: RegistryService
    rpc_address: Address


class SimHandle:
    """A spawned in-process network; drives time, faults, and teardown."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.clock = ManualClock()
        self.net = SimNetwork(seed=spec.seed, clock=self.clock)
        self.nodes: List[SimNode] = []
        self.registries: List[SimRegistry] = []
        self._pending_faults = sorted(spec.faults, key=lambda f: f.time)
        self._last_report = 0.0
        self.closed = False

    # -- addresses ---------------------------------------------------------

    @staticmethod
    def node_ip(i: int) -> str:
        return f"10.0.0.{i + 1}"

    @staticmethod
    def registry_ip(j: int) -> str:
        return f"10.0.1.{j + 1}"

    def node_addresses(self) -> List[Address]:
        return [n.rpc_address for n in self.nodes]

    def registry_addresses(self) -> List[Address]:
        return [r.rpc_address for r in self.registries]

    # -- construction --------------------------------------------------------

    async def _build(self) -> None:
        spec = self.spec
        for j in range(spec.registry_count):
            name = f"registry-{j}"
            address = (self.registry_ip(j), 9000)
            peers = [
                (self.registry_ip(k), 9000) for k in range(spec.registry_count) if k != j
            ]
            config = RegistryConfig(
                registry_id=name,
                listen_host=address[0],
                listen_port=address[1],
                peers=peers,
            )
            service = RegistryService(
                config, clock=self.clock, transport=self.net.transport(name)
            )
            self.net.register_rpc(name, address, service.handle_rpc)
            self.registries.append(SimRegistry(name, service, address))

        registries = self.registry_addresses()
        use_dht = spec.topology in ("line-bootstrap", "full-bootstrap")
        for i in range(spec.node_count):
            name = f"node-{i}"
            ip = self.node_ip(i)
            rpc_address = (ip, 8080)
            config = NodeConfig(
                node_id=name,
                node_name=name,
                listen_host=ip,
                listen_port=8080,
                registries=list(registries),
                standalone=True,
            )
            core = GossipCore(
                name,
                ip,
                8001,
                clock=self.clock,
                rng=random.Random(self.net.rng.getrandbits(64)),
            )
            binding = GossipBinding(self.net, core, name)
            dht = None
            if use_dht:
                dht = DhtNode(
                    ip,
                    8002,
                    self.net.transport(name),
                    node_name=name,
                    clock=self.clock,
                    advertise_ip=ip,
                    advertise_port=8080,
                )
                self.net.register_rpc(name, (ip, 8002), dht.handle_rpc)
            runtime = NodeRuntime(
                config,
                self.net.transport(name),
                clock=self.clock,
                sampler=FixedSampler(),
                gossip=core,
                dht=dht,
                gossip_emit=binding.emit,
            )
            self.net.register_rpc(name, rpc_address, runtime.handle_rpc)
            self.nodes.append(SimNode(name, runtime, core, binding, dht, rpc_address))

        self._wire_topology()
        for node in self.nodes:
            if node.dht is not None and self.spec.node_count > 1:
                await node.dht.bootstrap(self._dht_bootstrap_for(node))
        for node in self.nodes:
            for descriptor in builtin_by_name(spec.agents) if spec.agents else []:
                await node.runtime.register_local_agent(descriptor)
            await node.runtime.push_status()

    def _wire_topology(self) -> None:
        nodes = self.nodes
        if self.spec.topology == "line-bootstrap":
            for left, right in zip(nodes, nodes[1:]):
                left.gossip.add_peer(right.gossip.address, right.name)
                right.gossip.add_peer(left.gossip.address, left.name)
        elif self.spec.topology == "full-bootstrap":
            for a in nodes:
                for b in nodes:
                    if a is not b:
                        a.gossip.add_peer(b.gossip.address, b.name)
        # star-via-registry leaves gossip unseeded: discovery flows through
        # the registries, which is the point of that topology

    def _dht_bootstrap_for(self, node: SimNode) -> List[Address]:
        idx = self.nodes.index(node)
        if self.spec.topology == "line-bootstrap":
            neighbour = self.nodes[idx - 1] if idx > 0 else self.nodes[1]
        else:
            neighbour = self.nodes[0] if idx != 0 else self.nodes[1]
        assert neighbour.dht is not None
        return [(neighbour.dht.contact.ip, neighbour.dht.contact.port)]

    # -- time -----------------------------------------------------------------

    def _apply_due_faults(self) -> None:
        now = self.clock.now()
        while self._pending_faults and self._pending_faults[0].time <= now:
            fault = self._pending_faults.pop(0)
            if fault.action == "kill":
                self.net.kill(fault.target)
            elif fault.action == "heal":
                self.net.heal()
            elif fault.action == "partition":
                self.net.partition(*[set(g) for g in fault.groups])

    async def tick(self, dt: float = 1.0) -> None:
        """One simulated step: time, faults, reports, gossip, delivery, sweeps."""
        self.clock.advance(dt)
        self._apply_due_faults()
        now = self.clock.now()
        report_period = self.nodes[0].runtime.config.report_period_s if self.nodes else 5.0
        if now - self._last_report >= report_period:
            self._last_report = now
            for node in self.nodes:
                if not self.net.is_down(node.name):
                    await node.runtime.push_status()
        for node in self.nodes:
            node.binding.emit(node.gossip.tick())
        self.net.deliver_round()
        for registry in self.registries:
            registry.service.state.health_sweep()

    async def run_for(self, seconds: float, dt: float = 1.0) -> None:
        steps = int(round(seconds / dt))
        for _ in range(steps):
            await self.tick(dt)

    async def teardown(self) -> None:
        self.closed = True


def _checked_port(host: str, port: int, culprit: str) -> int:
    """Bind-check a port (0 allocates an ephemeral one); returns the port."""
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
        return sock.getsockname()[1]
    except OSError as exc:
        raise SpawnError(f"cannot bind {host}:{port} for {culprit}: {exc}") from exc
    finally:
        sock.close()


class RealHandle:
    """The same layout on actual localhost sockets."""

    def __init__(self, spec: ScenarioSpec):
        if spec.faults:
            raise SpawnError("fault schedules require the simulated clock")
        self.spec = spec
        self.nodes = []  # NodeServer instances
        self.registries = []  # RegistryService instances
        self._servers = []  # (uvicorn.Server, asyncio.Task) pairs
        self._node_addresses: List[Address] = []
        self._registry_addresses: List[Address] = []
        self.closed = False

    def node_addresses(self) -> List[Address]:
        return list(self._node_addresses)

    def registry_addresses(self) -> List[Address]:
        return list(self._registry_addresses)

    async def _serve_app(self, app, host: str, port: int) -> None:
        import uvicorn

        server = uvicorn.Server(
            uvicorn.Config(app, host=host, port=port, log_level="warning", lifespan="off")
        )
        task = asyncio.get_running_loop().create_task(server.serve())
        self._servers.append((server, task))
        while not server.started and not task.done():
            await asyncio.sleep(0.01)
        if task.done():  # surfaced bind failure
            raise SpawnError(f"server on {host}:{port} failed to start")

    async def _build(self) -> None:
        from ..node.service import NodeServer
        from ..registry.service import create_registry_app

        spec = self.spec
        host = "127.0.0.1"
        registry_ports = [
            _checked_port(host, 0, f"registry-{j}") for j in range(spec.registry_count)
        ]
        self._registry_addresses = [(host, p) for p in registry_ports]
        for j, port in enumerate(registry_ports):
            peers = [(host, p) for p in registry_ports if p != port]
            config = RegistryConfig(
                registry_id=f"registry-{j}", listen_host=host, listen_port=port, peers=peers
            )
            service = RegistryService(config)
            await self._serve_app(create_registry_app(service), host, port)
            service.start_background()
            self.registries.append(service)

        node_ports = [
            (
                _checked_port(host, 0, f"node-{i} rpc"),
                _checked_port(host, 0, f"node-{i} gossip"),
                _checked_port(host, 0, f"node-{i} dht"),
            )
            for i in range(spec.node_count)
        ]
        self._node_addresses = [(host, rpc) for rpc, _, _ in node_ports]
        for i, (rpc_port, gossip_port, dht_port) in enumerate(node_ports):
            seeds: List[Address] = []
            bootstrap: List[Address] = []
            if spec.topology == "line-bootstrap" and i > 0:
                seeds = [(host, node_ports[i - 1][1])]
                bootstrap = [(host, node_ports[i - 1][2])]
            elif spec.topology == "full-bootstrap":
                seeds = [(host, g) for k, (_, g, _) in enumerate(node_ports) if k != i]
                bootstrap = [(host, node_ports[0][2])] if i != 0 else []
            config = NodeConfig(
                node_id=f"node-{i}",
                node_name=f"node-{i}",
                listen_host=host,
                listen_port=rpc_port,
                gossip_host=host,
                gossip_port=gossip_port,
                dht_port=dht_port,
                seed_nodes=seeds,
                dht_bootstrap=bootstrap,
                registries=self._registry_addresses,
                agents=list(spec.agents),
                standalone=True,
            )
            server = NodeServer(config)
            await server.start()
            await self._serve_app(server.app, host, rpc_port)
            self.nodes.append(server)

    async def teardown(self) -> None:
        if self.closed:
            return
        self.closed = True
        for node in self.nodes:
            await node.stop()
        for service in self.registries:
            await service.stop()
        for server, _ in self._servers:
            server.should_exit = True
        await asyncio.gather(*(task for _, task in self._servers), return_exceptions=True)


async def spawn_network(spec: ScenarioSpec):
    """Build and start the network described by spec; returns a handle."""
    if spec.clock == "simulated":
        handle = SimHandle(spec)
    else:
        handle = RealHandle(spec)
    await handle._build()
    return handle
