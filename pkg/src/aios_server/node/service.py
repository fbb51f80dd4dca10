"""HTTP front-end for a node: one raw-body JSON-RPC endpoint plus the
full server assembly (gossip socket, DHT socket, report loop, uvicorn)."""

from __future__ import annotations

import asyncio
import json
import logging
import random
from typing import Optional

import uvicorn
from fastapi import FastAPI, Request, Response

from ..clock import SystemClock
from ..config import NodeConfig
from ..dht import Contact, DhtNode
from ..gossip import GossipCore, GossipUdpService
from ..transport import HttpRpcTransport, UdpRpcEndpoint
from ..wire import (
    INVALID_REQUEST,
    PARSE_ERROR,
    RpcRequest,
    WireParseError,
    WireError,
    decode,
    encode,
    make_error_response,
)
from .agents import builtin_by_name
from .runtime import NodeRuntime
from .sysinfo import PsutilSampler

log = logging.getLogger("aios.node")


def _salvage_id(raw: bytes) -> str:
    # a malformed request still deserves an addressed response when possible
    try:
        document = json.loads(raw)
    except Exception:
        return "0"
    if isinstance(document, dict):
        rid = document.get("id")
        if isinstance(rid, str) and rid:
            return rid
    return "0"


def create_app(runtime: NodeRuntime) -> FastAPI:
    app = FastAPI(title="aios-node", docs_url=None, redoc_url=None)
    app.state.runtime = runtime

    @app.post("/rpc")
    async def rpc(request: Request) -> Response:
        raw = await request.body()
        try:
            document = decode(raw)
        except WireParseError as exc:
            response = make_error_response("0", PARSE_ERROR, str(exc))
        except WireError as exc:
            response = make_error_response(_salvage_id(raw), INVALID_REQUEST, str(exc))
        else:
            if isinstance(document, RpcRequest):
                response = await runtime.handle_rpc(document)
            else:
                response = make_error_response(
                    _salvage_id(raw), INVALID_REQUEST, "expected a request document"
                )
        return Response(content=encode(response), media_type="application/json")

    return app


class NodeServer:
    """Everything one node runs: HTTP RPC, gossip UDP, DHT UDP, report loop."""

    def __init__(self, config: NodeConfig):
        self.config = config
        self.transport = HttpRpcTransport()
        clock = SystemClock()
        self.gossip = GossipCore(
            node_id=config.node_id,
            ip=config.gossip_host,
            port=config.gossip_port,
            clock=clock,
            rng=random.Random(),
            period_s=config.gossip_period_s,
        )
        self.gossip_service = GossipUdpService(self.gossip)
        self.dht_endpoint = UdpRpcEndpoint()
        self.dht = DhtNode(
            config.listen_host,
            config.dht_port,
            self.dht_endpoint,
            node_name=config.node_id,
            clock=clock,
            # agent records must point at the task listener, not the DHT socket
            advertise_ip=config.listen_host,
            advertise_port=config.listen_port,
        )
        self.dht_endpoint.set_handler(self.dht.handle_rpc)
        self.runtime = NodeRuntime(
            config,
            self.transport,
            clock=clock,
            sampler=PsutilSampler(),
            gossip=self.gossip,
            dht=self.dht,
            gossip_emit=self.gossip_service.emit,
        )
        self.app = create_app(self.runtime)
        self._report_task: Optional[asyncio.Task] = None
        self._server: Optional[uvicorn.Server] = None

    async def start(self) -> None:
        await self.gossip_service.start()
        for address in self.config.seed_nodes:
            self.gossip.add_peer(address)
        host, port = await self.dht_endpoint.start(self.config.listen_host, self.config.dht_port)
        # ephemeral bind (port 0): reflect the real socket into the DHT identity;
        # advertise_ip/port stay pointed at the task listener
        self.dht.contact = Contact(self.dht.node_id, self.config.listen_host, port)
        if self.config.dht_bootstrap:
            # a lost ping during a peer's own startup shouldn't orphan the node
            for attempt in range(3):
                joined = await self.dht.bootstrap(self.config.dht_bootstrap)
                if joined:
                    break
                await asyncio.sleep(0.5 * (attempt + 1))
            log.info("dht joined %d contacts", joined)
        for descriptor in builtin_by_name(self.config.agents):
            await self.runtime.register_local_agent(descriptor)
        if self.config.registries:
            self._report_task = asyncio.get_running_loop().create_task(
                self.runtime.push_status_forever()
            )

    async def stop(self) -> None:
        if self._report_task is not None:
            self._report_task.cancel()
            self._report_task = None
        await self.runtime.shutdown()
        await self.gossip_service.stop()
        self.dht_endpoint.close()
        await self.transport.aclose()

    async def serve(self) -> None:
        """Run until the process is interrupted or aios/shutdown arrives."""
        await self.start()
        uv_config = uvicorn.Config(
            self.app,
            host=self.config.listen_host,
            port=self.config.listen_port,
            log_level="warning",
            lifespan="off",
        )
        self._server = uvicorn.Server(uv_config)
        serve_task = asyncio.get_running_loop().create_task(self._server.serve())
        try:
            while not self.runtime.stopped and not serve_task.done():
                await asyncio.sleep(0.2)
        finally:
            self._server.should_exit = True
            await serve_task
            await self.stop()
