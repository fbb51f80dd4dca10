"""Spawn a real localhost network for end-to-end clients.

Prints one JSON line with the listen addresses, then serves until stdin
closes (so a parent process that dies takes the network down with it).
Used by the dashboard test suite; handy for manual poking too:

    python scripts/serve_scenario.py 3 echo_agent,math_agent,stats_agent
"""

import asyncio
import json
import sys

from aios_server.harness import ScenarioSpec, spawn_network


async def main() -> None:
    node_count = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    agents = sys.argv[2].split(",") if len(sys.argv) > 2 else ["echo_agent", "math_agent"]
    spec = ScenarioSpec(
        node_count=node_count,
        registry_count=1,
        topology="full-bootstrap",
        clock="real",
        agents=agents,
    )
    handle = await spawn_network(spec)
    try:
        reg_host, reg_port = handle.registry_addresses()[0]
        print(
            json.dumps(
                {
                    "registry": f"http://{reg_host}:{reg_port}",
                    "nodes": [f"http://{h}:{p}" for h, p in handle.node_addresses()],
                }
            ),
            flush=True,
        )
        loop = asyncio.get_running_loop()
        reader = asyncio.StreamReader()
        await loop.connect_read_pipe(
            lambda: asyncio.StreamReaderProtocol(reader), sys.stdin
        )
        await reader.read()  # blocks until the parent closes our stdin
    finally:
        await handle.teardown()


if __name__ == "__main__":
    asyncio.run(main())
