"""Registry RPC surface, periodic sweeps/sync, persistence, and the /ui mount."""

from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import uvicorn
from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..clock import Clock, SystemClock
from ..config import RegistryConfig
from ..transport import (
    Address,
    HttpRpcTransport,
    RemoteRpcError,
    RpcTransport,
    TransportError,
    parse_address,
)
from ..wire import (
    AGENT_NOT_FOUND,
    DELEGATION_FAILED,
    INTERNAL_ERROR,
    INVALID_PARAMS,
    INVALID_REQUEST,
    METHOD_DELEGATE_TASK,
    METHOD_HEALTH,
    METHOD_LIST_NODES,
    METHOD_LOOKUP_AGENT,
    METHOD_NOT_FOUND,
    METHOD_REGISTER_NODE,
    METHOD_RELAY_TASK,
    PARSE_ERROR,
    RegisterNodeParams,
    RegistrySnapshot,
    RelayTaskParams,
    RpcRequest,
    RpcResponse,
    WireError,
    WireParseError,
    decode,
    encode,
    make_error_response,
    make_result_response,
)
from .state import RegistryState

log = logging.getLogger("aios.registry")

SAVE_DEBOUNCE_S = 0.2

_PLACEHOLDER_UI = """<!doctype html>
<html><head><title>aios registry</title></head>
<body><h1>aios registry</h1>
<p>No dashboard bundle is installed. Build the frontend and point
<code>registry.ui_dir</code> at its <code>dist/</code> directory.</p>
</body></html>"""


class RegistryService:
    def __init__(
        self,
        config: RegistryConfig,
        *,
        clock: Optional[Clock] = None,
        transport: Optional[RpcTransport] = None,
        state: Optional[RegistryState] = None,
    ):
        self.config = config
        self.clock = clock or SystemClock()
        self.transport = transport or HttpRpcTransport()
        if state is not None:
            self.state = state
        elif config.snapshot_path and Path(config.snapshot_path).is_file():
            self.state = RegistryState.load(
                config.snapshot_path,
                clock=self.clock,
                report_period_s=config.report_period_s,
                denylist=config.denylist,
            )
        else:
            self.state = RegistryState(
                clock=self.clock,
                report_period_s=config.report_period_s,
                denylist=config.denylist,
            )
        self._save_handle: Optional[asyncio.TimerHandle] = None
        self._tasks: List[asyncio.Task] = []

    # -- rpc ----------------------------------------------------------------

    async def handle_rpc(self, request: RpcRequest) -> RpcResponse:
        try:
            if request.method == METHOD_REGISTER_NODE:
                try:
                    params = RegisterNodeParams.model_validate(request.params)
                except ValidationError as exc:
                    return make_error_response(request.id, INVALID_PARAMS, str(exc))
                ack = self.state.register_node(params)
                self._schedule_save()
                return make_result_response(request.id, ack)
            if request.method == METHOD_LIST_NODES:
                snapshot = self.state.to_snapshot()
                return make_result_response(
                    request.id, snapshot.model_dump(mode="json", exclude_none=True)
                )
            if request.method == METHOD_LOOKUP_AGENT:
                query = request.params.get("query") or request.params.get("agent_id")
                if not query or not isinstance(query, str):
                    return make_error_response(
                        request.id, INVALID_PARAMS, "lookupAgent needs a nonempty 'query'"
                    )
                hits = self.state.lookup_agent(query)
                return make_result_response(
                    request.id, {"agents": [h.to_doc() for h in hits]}
                )
            if request.method == METHOD_HEALTH:
                return make_result_response(
                    request.id,
                    {
                        "status": "ok",
                        "registry_id": self.config.registry_id,
                        "version": self.state.version,
                        "nodes": len(self.state),
                    },
                )
            if request.method == METHOD_RELAY_TASK:
                return await self._relay(request)
            return make_error_response(
                request.id, METHOD_NOT_FOUND, f"unknown method {request.method}"
            )
        except Exception as exc:  # keep the endpoint alive through handler bugs
            return make_error_response(request.id, INTERNAL_ERROR, str(exc))

    async def _relay(self, request: RpcRequest) -> RpcResponse:
        try:
            params = RelayTaskParams.model_validate(request.params)
        except ValidationError as exc:
            return make_error_response(request.id, INVALID_PARAMS, str(exc))
        entry = self.state.entry(params.node_id)
        if entry is None:
            return make_error_response(
                request.id, AGENT_NOT_FOUND, f"no registered node {params.node_id!r}"
            )
        try:
            result = await self.transport.call(
                parse_address(entry.address), METHOD_DELEGATE_TASK, params.task
            )
        except RemoteRpcError as exc:
            return make_error_response(request.id, exc.code, exc.message)
        except TransportError as exc:
            return make_error_response(
                request.id, DELEGATION_FAILED, f"relay to {entry.address} failed: {exc}"
            )
        return make_result_response(request.id, result)

    # -- peer synchronization ---------------------------------------------------

    async def sync_with_peers(
        self, peers: Optional[List[Address]] = None
    ) -> Dict[Address, Optional[int]]:
        """Pull each peer's node list and merge; None marks an unreachable peer."""
        outcome: Dict[Address, Optional[int]] = {}
        own = (self.config.listen_host, self.config.listen_port)
        for peer in peers if peers is not None else self.config.peers:
            if peer == own:
                continue  # sync with self is a no-op
            try:
                raw = await self.transport.call(peer, METHOD_LIST_NODES, {})
                snapshot = RegistrySnapshot.model_validate(raw)
            except (TransportError, RemoteRpcError, ValidationError) as exc:
                log.warning("peer %s:%s skipped: %s", peer[0], peer[1], exc)
                outcome[peer] = None
                continue
            outcome[peer] = len(self.state.merge_entries(snapshot.nodes))
        if any(outcome.values()):
            self._schedule_save()
        return outcome

    # -- persistence ---------------------------------------------------------------

    def _schedule_save(self) -> None:
        if not self.config.snapshot_path:
            return
        try:
            loop = asyncio.get_running_loop()
        except RuntimeError:
            self._do_save()  # no loop (synchronous tests): write through
            return
        if self._save_handle is None:
            self._save_handle = loop.call_later(SAVE_DEBOUNCE_S, self._do_save)

    def _do_save(self) -> None:
        self._save_handle = None
        if self.config.snapshot_path and self.state.dirty:
            self.state.save(self.config.snapshot_path)

    # -- periodic work -----------------------------------------------------------------

    async def _sweep_forever(self) -> None:
        while True:
            await asyncio.sleep(self.config.sweep_period_s)
            if self.state.health_sweep():
                self._schedule_save()

    async def _sync_forever(self) -> None:
        while True:
            await asyncio.sleep(self.config.sync_period_s)
            await self.sync_with_peers()

    def start_background(self) -> None:
        loop = asyncio.get_running_loop()
        self._tasks = [loop.create_task(self._sweep_forever())]
        if self.config.peers:
            self._tasks.append(loop.create_task(self._sync_forever()))

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        self._tasks = []
        if self._save_handle is not None:
            self._save_handle.cancel()
            self._save_handle = None
        self._do_save()
        if isinstance(self.transport, HttpRpcTransport):
            await self.transport.aclose()


def _salvage_id(raw: bytes) -> str:
    try:
        document = json.loads(raw)
    except Exception:
        return "0"
    if isinstance(document, dict):
        rid = document.get("id")
        if isinstance(rid, str) and rid:
            return rid
    return "0"


def create_registry_app(service: RegistryService) -> FastAPI:
    app = FastAPI(title="aios-registry", docs_url=None, redoc_url=None)
    app.state.service = service

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
                response = await service.handle_rpc(document)
            else:
                response = make_error_response(
                    _salvage_id(raw), INVALID_REQUEST, "expected a request document"
                )
        return Response(content=encode(response), media_type="application/json")

    ui_dir = service.config.ui_dir or "frontend/dist"
    if Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/ui")
        async def ui_placeholder() -> HTMLResponse:
            return HTMLResponse(_PLACEHOLDER_UI)

    return app


class RegistryServer:
    """Registry service bound to a real HTTP listener."""

    def __init__(self, config: RegistryConfig):
        self.service = RegistryService(config)
        self.app = create_registry_app(self.service)
        self._server: Optional[uvicorn.Server] = None

    async def serve(self) -> None:
        config = self.service.config
        uv_config = uvicorn.Config(
            self.app,
            host=config.listen_host,
            port=config.listen_port,
            log_level="warning",
            lifespan="off",
        )
        self._server = uvicorn.Server(uv_config)
        self.service.start_background()
        try:
            await self._server.serve()
        finally:
            await self.service.stop()
