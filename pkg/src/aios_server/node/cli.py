"""Command line launcher for one agent-hosting node."""

from __future__ import annotations

import argparse
import asyncio
import logging
from typing import List, Optional

from ..config import Config, NodeConfig
from .service import NodeServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aios-node", description="Run one agent-hosting node."
    )
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument("--listen", help="host:port for the RPC listener (overrides config)")
    parser.add_argument(
        "--registry",
        action="append",
        default=[],
        metavar="HOST:PORT",
        help="registry to report to; repeatable (overrides config)",
    )
    parser.add_argument(
        "--seed",
        action="append",
        default=[],
        metavar="HOST:PORT",
        help="gossip seed peer; repeatable (overrides config)",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_node_config(args: argparse.Namespace) -> NodeConfig:
    config = Config.from_file(args.config)
    # flags land in the raw tree so the usual validation still applies
    if args.listen:
        config.data.setdefault("node", {})["listen"] = args.listen
    if args.registry:
        config.data.setdefault("node", {})["registries"] = list(args.registry)
    if args.seed:
        config.data.setdefault("p2p", {}).setdefault("gossip", {})["seed_nodes"] = list(args.seed)
    return NodeConfig.from_config(config)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    if not args.verbose:
        logging.getLogger("httpx").setLevel(logging.WARNING)
    node_config = load_node_config(args)
    try:
        asyncio.run(NodeServer(node_config).serve())
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
