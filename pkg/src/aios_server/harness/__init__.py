from .bench import (
    BenchReport,
    ConvergenceReport,
    RegistrationReport,
    bench_comm,
    bench_comm_sim,
    bench_registration,
    run_convergence,
)
from .scenario import (
    FaultEvent,
    GossipBinding,
    RealHandle,
    ScenarioSpec,
    SimHandle,
    SpawnError,
    spawn_network,
)
from .simnet import SimNetwork, SimRpcTransport

__all__ = [
    "BenchReport",
    "ConvergenceReport",
    "FaultEvent",
    "GossipBinding",
    "RealHandle",
    "RegistrationReport",
    "ScenarioSpec",
    "SimHandle",
    "SimNetwork",
    "SimRpcTransport",
    "SpawnError",
    "bench_comm",
    "bench_comm_sim",
    "bench_registration",
    "run_convergence",
    "spawn_network",
]
