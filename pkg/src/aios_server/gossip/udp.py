"""UDP binding for the gossip core: sockets in, core decisions out."""

from __future__ import annotations

import asyncio
from typing import List, Optional

from ..transport import MAX_DATAGRAM_BYTES, Address
from ..wire import encode
from .core import GossipCore, Send


class _GossipProtocol(asyncio.DatagramProtocol):
    def __init__(self, service: "GossipUdpService"):
        self._service = service

    def datagram_received(self, data: bytes, addr) -> None:
        self._service._on_datagram(data, (addr[0], addr[1]))


class GossipUdpService:
    """Runs a GossipCore over a real UDP socket with a periodic tick task."""

    def __init__(self, core: GossipCore):
        self.core = core
        self._transport: Optional[asyncio.DatagramTransport] = None
        self._ticker: Optional[asyncio.Task] = None

    async def start(self) -> Address:
        loop = asyncio.get_running_loop()
        self._transport, _ = await loop.create_datagram_endpoint(
            lambda: _GossipProtocol(self), local_addr=(self.core.ip, self.core.port)
        )
        sockname = self._transport.get_extra_info("sockname")
        self.core.port = sockname[1]  # reflect an os-assigned port
        self._ticker = loop.create_task(self._run_ticks())
        return self.core.address

    async def stop(self) -> None:
        if self._ticker is not None:
            self._ticker.cancel()
            self._ticker = None
        self._emit(self.core.departure())
        if self._transport is not None:
            self._transport.close()
            self._transport = None

    def emit(self, sends: List[Send]) -> None:
        self._emit(sends)

    def _on_datagram(self, payload: bytes, addr: Address) -> None:
        self._emit(self.core.on_datagram(payload, addr))

    def _emit(self, sends: List[Send]) -> None:
        if self._transport is None:
            return
        for address, message in sends:
            payload = encode(message)
            if len(payload) > MAX_DATAGRAM_BYTES:
                continue  # oversize messages are rejected at send time
            try:
                self._transport.sendto(payload, address)
            except OSError:
                self.core.note_send_failure(address)

    async def _run_ticks(self) -> None:
        while True:
            await asyncio.sleep(self.core.period_s)
            self._emit(self.core.tick())
