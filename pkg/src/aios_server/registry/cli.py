"""Command line launcher for a registry node."""

from __future__ import annotations

import argparse
import asyncio
import logging
from typing import List, Optional

from ..config import Config, RegistryConfig
from .service import RegistryServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aios-registry", description="Run a registry node.")
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument(
        "--peer",
        action="append",
        default=[],
        metavar="HOST:PORT",
        help="peer registry to sync with; repeatable (overrides config)",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_registry_config(args: argparse.Namespace) -> RegistryConfig:
    config = Config.from_file(args.config)
    if args.peer:
        config.data.setdefault("registry", {})["peers"] = list(args.peer)
    return RegistryConfig.from_config(config)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    if not args.verbose:
        logging.getLogger("httpx").setLevel(logging.WARNING)
    try:
        asyncio.run(RegistryServer(load_registry_config(args)).serve())
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
