"""`aios-bench`: delegation load, registration timing, convergence, spawn."""

from __future__ import annotations

import argparse
import asyncio
import hashlib
import json
from pathlib import Path
from typing import List, Optional

from ..transport import HttpRpcTransport, parse_address
from .bench import bench_comm, bench_comm_sim, bench_registration, run_convergence
from .scenario import ScenarioSpec, SimHandle, spawn_network


def _ints(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part]


def render_table(headers: List[str], rows: List[List[str]]) -> str:
    widths = [
        max(len(str(h)), *(len(str(row[i])) for row in rows)) if rows else len(str(h))
        for i, h in enumerate(headers)
    ]
    def line(cells):
        return " | ".join(str(c).ljust(w) for c, w in zip(cells, widths))
    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([line(headers), rule] + [line(row) for row in rows])


def _write_out(path: Optional[str], docs: List[dict]) -> None:
    if not path:
        return
    with Path(path).open("a") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, separators=(",", ":")) + "\n")


async def _cmd_comm(args) -> int:
    requests = _ints(args.requests)
    concurrency = _ints(args.concurrency)
    if len(requests) != len(concurrency):
        raise SystemExit("--requests and --concurrency need the same number of entries")
    reports = []
    for total, width in zip(requests, concurrency):
        if args.target:
            transport = HttpRpcTransport()
            try:
                report = await bench_comm(
                    transport, parse_address(args.target), total, width, environment=args.env
                )
            finally:
                await transport.aclose()
        else:
            report = await bench_comm_sim(total, width, seed=args.seed, environment=args.env)
        reports.append(report)
    rows = [
        [
            r.environment,
            r.total_requests,
            r.concurrency,
            f"{r.success_count}/{r.total_requests}",
            f"{r.avg_latency_s:.3f}",
            f"{r.p95_latency_s:.3f}",
            f"{r.throughput_req_s:.1f}",
        ]
        for r in reports
    ]
    print(
        render_table(
            ["Environment", "Total Requests", "Concurrency", "Success",
             "Avg. Latency (s)", "P95 (s)", "Throughput (req/s)"],
            rows,
        )
    )
    _write_out(args.out, [r.to_doc() for r in reports])
    return 0


async def _cmd_reg(args) -> int:
    reports = await bench_registration(_ints(args.nodes), seed=args.seed)
    rows = [
        [r.node_count, f"{r.avg_ms:.3f}", f"{r.max_ms:.3f}", "yes" if r.all_registered else "NO"]
        for r in reports
    ]
    print(render_table(["Nodes", "Avg (ms)", "Max (ms)", "All registered"], rows))
    _write_out(args.out, [r.to_doc() for r in reports])
    return 0 if all(r.all_registered for r in reports) else 1


async def _cmd_converge(args) -> int:
    spec = ScenarioSpec(
        node_count=args.nodes,
        registry_count=args.registries,
        topology=args.topology,
        seed=args.seed,
        agents=[],
    )
    report = await run_convergence(spec, args.registrations, args.rounds)
    rows = [[i, f"{c:.3f}"] for i, c in enumerate(report.coverage)]
    print(render_table(["Round", "Coverage"], rows))
    _write_out(args.out, [report.to_doc()])
    return 0


async def _cmd_spawn(args) -> int:
    spec = ScenarioSpec.from_file(args.spec)
    handle = await spawn_network(spec)
    try:
        print("registries:", [f"{h}:{p}" for h, p in handle.registry_addresses()])
        print("nodes:     ", [f"{h}:{p}" for h, p in handle.node_addresses()])
        if isinstance(handle, SimHandle):
            horizon = max([f.time for f in spec.faults], default=0.0) + args.duration
            await handle.run_for(horizon)
            snapshot = handle.registries[0].service.state.to_snapshot() if handle.registries else None
            if snapshot is not None:
                rows = [
                    [e.report.node_id, e.health, len(e.report.available_agents)]
                    for e in snapshot.nodes
                ]
                print(render_table(["Node", "Health", "Agents"], rows))
            digest = hashlib.sha1(handle.net.event_log().encode()).hexdigest()[:12]
            print(f"events: {len(handle.net.events)} (log sha1 {digest})")
        else:
            print("serving; Ctrl-C to stop")
            while True:
                await asyncio.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        await handle.teardown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aios-bench", description="Benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    comm = sub.add_parser("comm", help="delegation load benchmark")
    comm.add_argument("--target", help="host:port of a running node (default: in-process)")
    comm.add_argument("--requests", default="50,100,200")
    comm.add_argument("--concurrency", default="5,10,20")
    comm.add_argument("--seed", type=int, default=0)
    comm.add_argument("--env", default="local")
    comm.add_argument("--out", help="append JSON-lines reports to this file")

    reg = sub.add_parser("reg", help="registration latency benchmark")
    reg.add_argument("--nodes", default="3,5,7")
    reg.add_argument("--seed", type=int, default=0)
    reg.add_argument("--out")

    conv = sub.add_parser("converge", help="gossip convergence trace")
    conv.add_argument("--nodes", type=int, default=20)
    conv.add_argument("--rounds", type=int, default=10)
    conv.add_argument("--registrations", type=int, default=1)
    conv.add_argument("--registries", type=int, default=0)
    conv.add_argument("--topology", default="full-bootstrap")
    conv.add_argument("--seed", type=int, default=0)
    conv.add_argument("--out")

    spawn = sub.add_parser("spawn", help="spawn a network from a scenario file")
    spawn.add_argument("--spec", required=True)
    spawn.add_argument("--duration", type=float, default=10.0,
                       help="extra simulated seconds to run past the last fault")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "comm": _cmd_comm,
        "reg": _cmd_reg,
        "converge": _cmd_converge,
        "spawn": _cmd_spawn,
    }[args.command]
    return asyncio.run(handler(args))


if __name__ == "__main__":
    raise SystemExit(main())
