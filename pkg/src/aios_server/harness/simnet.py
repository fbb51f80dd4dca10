"""In-process simulated network: inline RPC, round-based datagrams, faults.

Every observable event is appended to a JSON-lines log; with a fixed seed and
a manual clock the log is byte-identical across runs, which is what the
determinism checks in the test-suite compare.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from collections import deque
from typing import Awaitable, Callable, Dict, List, Optional, Set, Tuple

from ..clock import ManualClock
from ..transport import Address, RemoteRpcError, TransportError, format_address
from ..wire import RpcRequest, RpcResponse, make_request

DatagramHandler = Callable[[bytes, Address], None]
RpcHandler = Callable[[RpcRequest], Awaitable[RpcResponse]]
DatagramTap = Callable[[Address, Address, bytes], None]


class SimNetwork:
    def __init__(self, *, seed: int = 0, clock: Optional[ManualClock] = None):
        self.clock = clock or ManualClock()
        self.rng = random.Random(seed)
        self.seed = seed
        self._rpc_handlers: Dict[Address, RpcHandler] = {}
        self._datagram_handlers: Dict[Address, DatagramHandler] = {}
        self._owners: Dict[Address, str] = {}
        self._down: Set[str] = set()
        self._groups: List[Set[str]] = []
        self._queue: deque = deque()
        self.events: List[str] = []
        self.datagram_taps: List[DatagramTap] = []

    # -- membership -------------------------------------------------------

    def register_rpc(self, owner: str, address: Address, handler: RpcHandler) -> None:
        self._owners[address] = owner
        self._rpc_handlers[address] = handler

    def register_datagram(self, owner: str, address: Address, handler: DatagramHandler) -> None:
        self._owners[address] = owner
        self._datagram_handlers[address] = handler

    def owner_of(self, address: Address) -> Optional[str]:
        return self._owners.get(address)

    # -- faults ------------------------------------------------------------

    def kill(self, owner: str) -> None:
        self._down.add(owner)
        self._log("kill", target=owner)

    def revive(self, owner: str) -> None:
        self._down.discard(owner)
        self._log("revive", target=owner)

    def is_down(self, owner: str) -> bool:
        return owner in self._down

    def partition(self, *groups: Set[str]) -> None:
        self._groups = [set(g) for g in groups]
        self._log("partition", groups=[sorted(g) for g in self._groups])

    def heal(self) -> None:
        self._groups = []
        self._log("heal")

    def reachable(self, src_owner: Optional[str], dst_owner: Optional[str]) -> bool:
        if src_owner is None or dst_owner is None:
            return False
        if src_owner in self._down or dst_owner in self._down:
            return False
        if not self._groups or src_owner == dst_owner:
            return True
        for group in self._groups:
            if src_owner in group:
                return dst_owner in group
        return False  # src outside every group is cut off

    # -- rpc (inline, zero latency) ----------------------------------------

    async def rpc(self, src_owner: str, address: Address, method: str, params: dict, request_id: str) -> dict:
        dst_owner = self._owners.get(address)
        handler = self._rpc_handlers.get(address)
        self._log("rpc", src=src_owner, dst=format_address(address), method=method, id=request_id)
        if handler is None or not self.reachable(src_owner, dst_owner):
            self._log("rpc_drop", src=src_owner, dst=format_address(address), id=request_id)
            raise TransportError(f"{format_address(address)} unreachable from {src_owner}")
        response = await handler(make_request(request_id, method, params))
        if response.error is not None:
            self._log("rpc_error", id=request_id, code=response.error.code)
            raise RemoteRpcError(response.error.code, response.error.message, response.error.data)
        self._log("rpc_reply", id=request_id)
        return response.result or {}

    def transport(self, owner: str) -> "SimRpcTransport":
        return SimRpcTransport(self, owner)

    # -- datagrams (queued, delivered in synchronous rounds) -----------------

    def send_datagram(self, src: Address, dst: Address, payload: bytes) -> None:
        if len(payload) > 8192:
            raise TransportError("datagram exceeds 8192 bytes")
        self._log(
            "dgram_send",
            src=format_address(src),
            dst=format_address(dst),
            size=len(payload),
            sha=hashlib.sha1(payload).hexdigest()[:12],
        )
        self._queue.append((src, dst, payload))

    def deliver_round(self) -> int:
        """Deliver everything queued before this call; forwards go next round."""
        pending = len(self._queue)
        delivered = 0
        for _ in range(pending):
            src, dst, payload = self._queue.popleft()
            handler = self._datagram_handlers.get(dst)
            if handler is None or not self.reachable(self._owners.get(src), self._owners.get(dst)):
                self._log("dgram_drop", src=format_address(src), dst=format_address(dst))
                continue
            self._log(
                "dgram_deliver",
                src=format_address(src),
                dst=format_address(dst),
                sha=hashlib.sha1(payload).hexdigest()[:12],
            )
            for tap in self.datagram_taps:
                tap(src, dst, payload)
            handler(payload, src)
            delivered += 1
        return delivered

    def drain(self, max_rounds: int = 100) -> int:
        rounds = 0
        while self._queue and rounds < max_rounds:
            self.deliver_round()
            rounds += 1
        return rounds

    @property
    def pending_datagrams(self) -> int:
        return len(self._queue)

    # -- event log -----------------------------------------------------------

    def _log(self, kind: str, **fields) -> None:
        entry = {"seq": len(self.events), "t": round(self.clock.now(), 6), "kind": kind}
        entry.update(fields)
        self.events.append(json.dumps(entry, separators=(",", ":")))

    def event_log(self) -> str:
        return "\n".join(self.events) + ("\n" if self.events else "")


class SimRpcTransport:
    """Per-node outbound transport; records every call for trace assertions."""

    def __init__(self, network: SimNetwork, owner: str):
        self._network = network
        self._owner = owner
        self._seq = itertools.count(1)
        self.calls: List[Tuple[Address, str]] = []

    @property
    def owner(self) -> str:
        return self._owner

    async def call(self, address: Address, method: str, params: dict) -> dict:
        self.calls.append((address, method))
        request_id = f"{self._owner}-{next(self._seq)}"
        return await self._network.rpc(self._owner, address, method, params, request_id)
