"""Benchmarks: delegation load, registration latency, gossip convergence.

The load generator keeps exactly `concurrency` requests in flight (sliding
window). Latency is measured from request send to response decode. Failures
are counted, never raised, and successes + failures always equals the total.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from ..transport import Address, RpcTransport
from ..wire import METHOD_DELEGATE_TASK
from .scenario import ScenarioSpec, SimHandle, spawn_network


@dataclass
class BenchReport:
    environment: str
    total_requests: int
    concurrency: int
    success_count: int
    failure_count: int
    avg_latency_s: float
    p95_latency_s: float
    throughput_req_s: float
    wall_time_s: float
    traces: Optional[List[dict]] = None

    def __post_init__(self):
        assert self.success_count <= self.total_requests
        assert self.success_count + self.failure_count == self.total_requests

    def to_doc(self) -> dict:
        doc = {
            "environment": self.environment,
            "total_requests": self.total_requests,
            "concurrency": self.concurrency,
            "success_count": self.success_count,
            "failure_count": self.failure_count,
            "avg_latency_s": round(self.avg_latency_s, 6),
            "p95_latency_s": round(self.p95_latency_s, 6),
            "throughput_req_s": round(self.throughput_req_s, 3),
            "wall_time_s": round(self.wall_time_s, 6),
        }
        if self.traces is not None:
            doc["traces"] = self.traces
        return doc


def _echo_task_params(i: int) -> dict:
    return {
        "sender": {"id": "bench_user"},
        "recipient": {"id": "example/echo_agent", "role": "assistant"},
        "messages": [
            {"role": "user", "content": {"type": "text", "text": f"bench-{i}"}}
        ],
        "maxTokens": 64,
    }


def p95(latencies: Sequence[float]) -> float:
    if not latencies:
        return 0.0
    ranked = sorted(latencies)
    index = max(0, -(-len(ranked) * 95 // 100) - 1)  # ceil(0.95 n) - 1
    return ranked[index]


async def bench_comm(
    transport: RpcTransport,
    target: Address,
    total: int,
    concurrency: int,
    *,
    environment: str = "local",
    keep_traces: bool = False,
    timer: Callable[[], float] = time.perf_counter,
) -> BenchReport:
    """Drive `total` echo delegations at a fixed in-flight window."""
    latencies: List[float] = []
    traces: List[dict] = []
    successes = 0
    failures = 0
    started = timer()

    async def one(i: int):
        t0 = timer()
        try:
            result = await transport.call(target, METHOD_DELEGATE_TASK, _echo_task_params(i))
            ok = result.get("content", {}).get("text") == f"bench-{i}"
        except Exception:
            ok = False
        return i, ok, timer() - t0

    pending: set = set()
    issued = 0
    while issued < total or pending:
        while issued < total and len(pending) < concurrency:
            pending.add(asyncio.create_task(one(issued)))
            issued += 1
        done, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
        for task in done:
            i, ok, elapsed = task.result()
            latencies.append(elapsed)
            if ok:
                successes += 1
            else:
                failures += 1
            if keep_traces:
                traces.append({"request": i, "ok": ok, "latency_s": round(elapsed, 6)})
    wall = max(timer() - started, 1e-9)
    return BenchReport(
        environment=environment,
        total_requests=total,
        concurrency=concurrency,
        success_count=successes,
        failure_count=failures,
        avg_latency_s=sum(latencies) / len(latencies) if latencies else 0.0,
        p95_latency_s=p95(latencies),
        throughput_req_s=total / wall,
        wall_time_s=wall,
        traces=sorted(traces, key=lambda t: t["request"]) if keep_traces else None,
    )


async def bench_comm_sim(
    total: int,
    concurrency: int,
    *,
    seed: int = 0,
    environment: str = "local-sim",
) -> BenchReport:
    """Loopback variant: one simulated node, requests through its front door."""
    handle = await spawn_network(
        ScenarioSpec(node_count=1, registry_count=1, seed=seed, agents=["echo_agent"])
    )
    try:
        transport = handle.net.transport("bench-client")
        return await bench_comm(
            transport, handle.nodes[0].rpc_address, total, concurrency, environment=environment
        )
    finally:
        await handle.teardown()


@dataclass
class RegistrationReport:
    node_count: int
    avg_ms: float
    max_ms: float
    all_registered: bool
    samples_ms: List[float] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "node_count": self.node_count,
            "avg_ms": round(self.avg_ms, 3),
            "max_ms": round(self.max_ms, 3),
            "all_registered": self.all_registered,
        }


async def bench_registration(
    node_counts: Sequence[int],
    *,
    seed: int = 0,
    timeout_s: float = 5.0,
    timer: Callable[[], float] = time.perf_counter,
) -> List[RegistrationReport]:
    """Register one agent per node; time the call until it is visible in the
    registry index and resolvable through the DHT from another node."""
    if not node_counts:
        raise ValueError("node_counts must be nonempty")
    from ..node.agents import AgentDescriptor, echo_handler

    reports = []
    for n in node_counts:
        spec = ScenarioSpec(
            node_count=n,
            registry_count=1,
            topology="full-bootstrap" if n > 1 else "star-via-registry",
            seed=seed,
            agents=[],
        )
        handle = await spawn_network(spec)
        try:
            registry = handle.registries[0].service
            samples: List[float] = []
            complete = True
            for i, node in enumerate(handle.nodes):
                agent_id = f"bench/probe_agent_{i}"
                descriptor = AgentDescriptor(agent_id, ["probe"], echo_handler)
                t0 = timer()
                await node.runtime.register_local_agent(descriptor)
                visible = False
                deadline = t0 + timeout_s
                while timer() < deadline:
                    in_registry = agent_id in registry.state.agents_index()
                    if n > 1:
                        peer = handle.nodes[(i + 1) % n]
                        found = await peer.dht.find_agent(agent_id) if peer.dht else None
                        in_dht = found is not None
                    else:
                        in_dht = True
                    if in_registry and in_dht:
                        visible = True
                        break
                    await asyncio.sleep(0)
                samples.append((timer() - t0) * 1000.0)
                complete = complete and visible
            reports.append(
                RegistrationReport(
                    node_count=n,
                    avg_ms=sum(samples) / len(samples),
                    max_ms=max(samples),
                    all_registered=complete,
                    samples_ms=samples,
                )
            )
        finally:
            await handle.teardown()
    return reports


@dataclass
class ConvergenceReport:
    node_count: int
    registrations: int
    rounds: int
    coverage: List[float]  # mean fraction of nodes holding each record, per round

    @property
    def final_coverage(self) -> float:
        return self.coverage[-1] if self.coverage else 0.0

    def to_doc(self) -> dict:
        return {
            "node_count": self.node_count,
            "registrations": self.registrations,
            "rounds": self.rounds,
            "coverage": [round(c, 4) for c in self.coverage],
        }


async def run_convergence(
    spec: ScenarioSpec, registrations: int, rounds: int
) -> ConvergenceReport:
    """Inject registrations at t=0 and trace per-round directory coverage."""
    if spec.clock != "simulated":
        raise ValueError("convergence runs need the simulated clock")
    from ..node.agents import AgentDescriptor, echo_handler

    handle = await spawn_network(spec)
    assert isinstance(handle, SimHandle)
    try:
        agent_ids = []
        for r in range(registrations):
            origin = handle.nodes[r % len(handle.nodes)]
            agent_id = f"bench/gossiped_agent_{r}"
            await origin.runtime.register_local_agent(
                AgentDescriptor(agent_id, ["converge"], echo_handler)
            )
            agent_ids.append(agent_id)

        def coverage_now() -> float:
            if not agent_ids:
                return 1.0
            per_record = []
            for agent_id in agent_ids:
                holders = sum(
                    1 for node in handle.nodes if node.gossip.find_agent(agent_id) is not None
                )
                per_record.append(holders / len(handle.nodes))
            return sum(per_record) / len(per_record)

        curve = [coverage_now()]
        for _ in range(rounds):
            await handle.tick(1.0)
            curve.append(coverage_now())
        return ConvergenceReport(
            node_count=spec.node_count,
            registrations=registrations,
            rounds=rounds,
            coverage=curve,
        )
    finally:
        await handle.teardown()
