"""System metrics sampling behind an injectable interface."""

from __future__ import annotations

import platform
from typing import Protocol

from ..wire import SystemInfo


class SystemSampler(Protocol):
    def sample(self) -> SystemInfo: ...


class PsutilSampler:
    """Live cpu/memory readings; platform string from the host OS."""

    def __init__(self):
        import psutil

        self._psutil = psutil
        self._platform = platform.system()
        self._psutil.cpu_percent(interval=None)  # prime the delta-based counter

    def sample(self) -> SystemInfo:
        cpu = self._psutil.cpu_percent(interval=None)
        memory = self._psutil.virtual_memory().percent
        return SystemInfo(
            cpu_percent=min(100.0, max(0.0, float(cpu))),
            memory_percent=min(100.0, max(0.0, float(memory))),
            platform=self._platform,
        )


class FixedSampler:
    """Deterministic sampler for tests."""

    def __init__(self, cpu_percent: float = 23.4, memory_percent: float = 67.2, platform_name: str = "Linux"):
        self._info = SystemInfo(
            cpu_percent=cpu_percent, memory_percent=memory_percent, platform=platform_name
        )

    def sample(self) -> SystemInfo:
        return self._info
