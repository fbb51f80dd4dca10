"""RPC transports: outbound call interface plus HTTP and UDP implementations."""

from __future__ import annotations

import asyncio
import itertools
import uuid
from typing import Awaitable, Callable, Optional, Protocol, Tuple

import httpx

from .wire import (
    RpcRequest,
    RpcResponse,
    WireError,
    decode,
    encode,
    make_request,
)

Address = Tuple[str, int]

# UDP messages must fit one datagram
MAX_DATAGRAM_BYTES = 8192


class TransportError(Exception):
    """Peer unreachable, timed out, or payload unsendable."""


class RemoteRpcError(Exception):
    """The peer answered with a JSON-RPC error response."""

    def __init__(self, code: int, message: str, data=None):
        super().__init__(f"[{code}] {message}")
        self.code = code
        self.message = message
        self.data = data


class RpcTransport(Protocol):
    async def call(self, address: Address, method: str, params: dict) -> dict:
        """Send one request, return the result map, raise on failure."""
        ...


def parse_address(text: str) -> Address:
    """Parse "host:port" into an address tuple."""
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)


def format_address(address: Address) -> str:
    return f"{address[0]}:{address[1]}"


def _raise_for_error(response: RpcResponse) -> dict:
    if response.error is not None:
        raise RemoteRpcError(response.error.code, response.error.message, response.error.data)
    return response.result or {}


class HttpRpcTransport:
    """JSON-RPC over HTTP POST /rpc, one request per call."""

    def __init__(self, *, timeout: float = 10.0, client: Optional[httpx.AsyncClient] = None):
        self._client = client or httpx.AsyncClient(timeout=timeout)

    async def call(self, address: Address, method: str, params: dict) -> dict:
        request = make_request(uuid.uuid4().hex, method, params)
        url = f"http://{address[0]}:{address[1]}/rpc"
        try:
            raw = await self._client.post(
                url, content=encode(request), headers={"content-type": "application/json"}
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"{method} to {format_address(address)}: {exc}") from exc
        try:
            response = decode(raw.content)
        except WireError as exc:
            raise TransportError(f"undecodable response from {format_address(address)}: {exc}") from exc
        if not isinstance(response, RpcResponse):
            raise TransportError(f"expected a response from {format_address(address)}")
        return _raise_for_error(response)

    async def aclose(self) -> None:
        await self._client.aclose()


RpcHandler = Callable[[RpcRequest], Awaitable[RpcResponse]]


class _UdpProtocol(asyncio.DatagramProtocol):
    def __init__(self, endpoint: "UdpRpcEndpoint"):
        self._endpoint = endpoint

    def datagram_received(self, data: bytes, addr) -> None:
        self._endpoint._on_datagram(data, (addr[0], addr[1]))


class UdpRpcEndpoint:
    """JSON-RPC over UDP: serves inbound requests and issues outbound calls
    on one socket, matching responses to callers by request id."""

    def __init__(self, handler: Optional[RpcHandler] = None, *, timeout: float = 5.0):
        self._handler = handler
        self._timeout = timeout
        self._pending: dict[str, asyncio.Future] = {}
        self._transport: Optional[asyncio.DatagramTransport] = None
        self._tag = uuid.uuid4().hex[:8]
        self._seq = itertools.count(1)
        self._tasks: set[asyncio.Task] = set()

    @property
    def local_address(self) -> Address:
        assert self._transport is not None, "endpoint not started"
        host, port = self._transport.get_extra_info("sockname")[:2]
        return host, port

    def set_handler(self, handler: RpcHandler) -> None:
        self._handler = handler

    async def start(self, host: str, port: int) -> Address:
        loop = asyncio.get_running_loop()
        self._transport, _ = await loop.create_datagram_endpoint(
            lambda: _UdpProtocol(self), local_addr=(host, port)
        )
        return self.local_address

    def close(self) -> None:
        for task in self._tasks:
            task.cancel()
        if self._transport is not None:
            self._transport.close()
            self._transport = None

    async def call(self, address: Address, method: str, params: dict) -> dict:
        assert self._transport is not None, "endpoint not started"
        request_id = f"{self._tag}-{next(self._seq)}"
        payload = encode(make_request(request_id, method, params))
        if len(payload) > MAX_DATAGRAM_BYTES:
            raise TransportError(f"{method} payload exceeds {MAX_DATAGRAM_BYTES} bytes")
        future: asyncio.Future = asyncio.get_running_loop().create_future()
        self._pending[request_id] = future
        try:
            self._transport.sendto(payload, address)
            try:
                response = await asyncio.wait_for(future, self._timeout)
            except asyncio.TimeoutError:
                raise TransportError(f"{method} to {format_address(address)} timed out") from None
        finally:
            self._pending.pop(request_id, None)
        return _raise_for_error(response)

    def _on_datagram(self, data: bytes, addr: Address) -> None:
        try:
            document = decode(data)
        except WireError:
            return  # garbage datagrams are dropped silently
        if isinstance(document, RpcResponse):
            future = self._pending.get(document.id)
            if future is not None and not future.done():
                future.set_result(document)
        elif isinstance(document, RpcRequest) and self._handler is not None:
            task = asyncio.get_running_loop().create_task(self._serve(document, addr))
            self._tasks.add(task)
            task.add_done_callback(self._tasks.discard)

    async def _serve(self, request: RpcRequest, addr: Address) -> None:
        response = await self._handler(request)
        payload = encode(response)
        if self._transport is not None and len(payload) <= MAX_DATAGRAM_BYTES:
            self._transport.sendto(payload, addr)
