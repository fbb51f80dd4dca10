"""JSON configuration with dotted-path access and the node settings schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional

from .transport import Address, parse_address


class Config:
    """Read-only view over a nested dict, addressed by dotted keys,
    e.g. get("p2p.gossip.port")."""

    def __init__(self, data: Optional[dict] = None):
        self.data = data or {}

    @classmethod
    def from_file(cls, path) -> "Config":
        return cls(json.loads(Path(path).read_text()))

    def get(self, dotted: str, default: Any = None) -> Any:
        node: Any = self.data
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node


class ConfigError(ValueError):
    pass


def _addresses(values) -> List[Address]:
    return [parse_address(v) if isinstance(v, str) else (v[0], int(v[1])) for v in values or []]


@dataclass
class NodeConfig:
    node_id: str
    node_name: str
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    gossip_host: str = "127.0.0.1"
    gossip_port: int = 8001
    gossip_period_s: float = 1.0
    seed_nodes: List[Address] = field(default_factory=list)
    dht_port: int = 0  # 0: gossip_port + 1
    dht_bootstrap: List[Address] = field(default_factory=list)
    registries: List[Address] = field(default_factory=list)
    report_period_s: float = 5.0
    agents: List[str] = field(default_factory=lambda: ["echo_agent", "math_agent", "stats_agent"])
    standalone: bool = False
    location: str = ""

    def __post_init__(self):
        if not (self.registries or self.dht_bootstrap or self.seed_nodes or self.standalone):
            raise ConfigError(
                "node needs at least one of: registry addresses, dht bootstrap, "
                "seed nodes, or standalone=true"
            )
        if self.dht_port == 0:
            self.dht_port = self.gossip_port + 1

    @property
    def listen_address(self) -> Address:
        return self.listen_host, self.listen_port

    @classmethod
    def from_config(cls, config: Config) -> "NodeConfig":
        node_name = config.get("node.name", "")
        node_id = config.get("p2p.node_id") or config.get("node.id") or node_name
        if not node_id:
            raise ConfigError("p2p.node_id (or node.id / node.name) is required")
        listen = config.get("node.listen", "127.0.0.1:8080")
        host, port = parse_address(listen) if isinstance(listen, str) else listen
        return cls(
            node_id=node_id,
            node_name=node_name or node_id,
            listen_host=host,
            listen_port=int(port),
            gossip_host=config.get("p2p.gossip.host", "127.0.0.1"),
            gossip_port=int(config.get("p2p.gossip.port", 8001)),
            gossip_period_s=float(config.get("p2p.gossip.period_ms", 1000)) / 1000.0,
            seed_nodes=_addresses(config.get("p2p.gossip.seed_nodes")),
            dht_port=int(config.get("p2p.dht.port", 0)),
            dht_bootstrap=_addresses(config.get("p2p.dht.bootstrap")),
            registries=_addresses(config.get("node.registries")),
            report_period_s=float(config.get("node.report_period_ms", 5000)) / 1000.0,
            agents=list(config.get("node.agents", ["echo_agent", "math_agent", "stats_agent"])),
            standalone=bool(config.get("node.standalone", False)),
            location=str(config.get("node.location", "")),
        )


@dataclass
class RegistryConfig:
    registry_id: str
    listen_host: str = "127.0.0.1"
    listen_port: int = 9000
    peers: List[Address] = field(default_factory=list)
    report_period_s: float = 5.0
    sweep_period_s: float = 1.0
    sync_period_s: float = 5.0
    snapshot_path: Optional[str] = None
    denylist: List[str] = field(default_factory=list)
    ui_dir: Optional[str] = None

    @property
    def listen_address(self) -> Address:
        return self.listen_host, self.listen_port

    @classmethod
    def from_config(cls, config: Config) -> "RegistryConfig":
        listen = config.get("registry.listen", "127.0.0.1:9000")
        host, port = parse_address(listen) if isinstance(listen, str) else listen
        return cls(
            registry_id=config.get("registry.id", f"registry-{port}"),
            listen_host=host,
            listen_port=int(port),
            peers=_addresses(config.get("registry.peers")),
            report_period_s=float(config.get("registry.report_period_ms", 5000)) / 1000.0,
            sweep_period_s=float(config.get("registry.sweep_period_ms", 1000)) / 1000.0,
            sync_period_s=float(config.get("registry.sync_period_ms", 5000)) / 1000.0,
            snapshot_path=config.get("registry.snapshot_path"),
            denylist=list(config.get("registry.denylist", [])),
            ui_dir=config.get("registry.ui_dir"),
        )
