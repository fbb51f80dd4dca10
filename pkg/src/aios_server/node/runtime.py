"""Agent-hosting node runtime: RPC dispatch, execution workflow, registration.

Task handling follows a fixed order: execute locally when a hosted agent
matches the recipient (or the delegation intent), otherwise resolve a remote
host — gossip directory first, DHT lookup as fallback — delegate with a
timeout and one retry, and return the remote result untouched.
"""

from __future__ import annotations

import asyncio
import inspect
import json
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Union

from ..clock import Clock, SystemClock, format_rfc3339
from ..config import NodeConfig
from ..dht import DhtNode, LookupFailedError, StoreFailedError
from ..gossip import GossipCore, Send
from ..transport import Address, RemoteRpcError, RpcTransport, TransportError
from ..wire import (
    AGENT_NOT_FOUND,
    INTERNAL_ERROR,
    INVALID_PARAMS,
    METHOD_DELEGATE_TASK,
    METHOD_NODE_STATUS,
    METHOD_REGISTER_NODE,
    METHOD_SHUTDOWN,
    METHOD_NOT_FOUND,
    NODE_SHUTTING_DOWN,
    AgentMetadata,
    DelegationContent,
    DelegationParams,
    DelegationResult,
    HumanTaskParams,
    HumanTaskResult,
    MessageContent,
    NodeStatusReport,
    RegisterNodeParams,
    RpcRequest,
    RpcResponse,
    TaskAssignment,
    WireValidationError,
    make_error_response,
    make_result_response,
    parse_task_params,
)
from .agents import AgentDescriptor, AgentError
from .sysinfo import FixedSampler, SystemSampler

DELEGATE_TIMEOUT_S = 10.0


class DuplicateAgentError(ValueError):
    pass


class AgentNotFoundError(LookupError):
    pass


@dataclass
class RemoteCandidate:
    agent_id: str
    node_id: str
    ip: str
    port: int
    last_seen: float


class NodeRuntime:
    def __init__(
        self,
        config: NodeConfig,
        transport: RpcTransport,
        *,
        clock: Optional[Clock] = None,
        sampler: Optional[SystemSampler] = None,
        gossip: Optional[GossipCore] = None,
        dht: Optional[DhtNode] = None,
        gossip_emit: Optional[Callable[[List[Send]], None]] = None,
        delegate_timeout_s: float = DELEGATE_TIMEOUT_S,
    ):
        self.config = config
        self.node_id = config.node_id
        self.transport = transport
        self.clock = clock or SystemClock()
        self.sampler = sampler or FixedSampler()
        self.gossip = gossip
        self.dht = dht
        self._gossip_emit = gossip_emit or (lambda sends: None)
        self.delegate_timeout_s = delegate_timeout_s
        self.agents: Dict[str, AgentDescriptor] = {}
        self.assignments: Dict[str, TaskAssignment] = {}
        self.assignment_history: Dict[str, List[str]] = {}
        self.accepting = True
        self.stopped = False
        self._inflight = 0
        self._idle = asyncio.Event()
        self._idle.set()

    @property
    def advertise_address(self) -> Address:
        return self.config.listen_host, self.config.listen_port

    # -- rpc dispatch ---------------------------------------------------------

    async def handle_rpc(self, request: RpcRequest) -> RpcResponse:
        try:
            if request.method.startswith("dht/"):
                if self.dht is None:
                    return make_error_response(request.id, METHOD_NOT_FOUND, "dht disabled")
                return await self.dht.handle_rpc(request)
            if request.method == METHOD_DELEGATE_TASK:
                return await self._serve_task(request)
            if request.method == METHOD_NODE_STATUS:
                report = self.report_status()
                return make_result_response(
                    request.id, report.model_dump(mode="json", exclude_none=True)
                )
            if request.method == METHOD_SHUTDOWN:
                self.accepting = False
                asyncio.get_running_loop().create_task(self.shutdown())
                return make_result_response(request.id, {"stopping": True})
            return make_error_response(
                request.id, METHOD_NOT_FOUND, f"unknown method {request.method}"
            )
        except Exception as exc:  # a handler bug must still produce a response
            return make_error_response(request.id, INTERNAL_ERROR, str(exc))

    async def _serve_task(self, request: RpcRequest) -> RpcResponse:
        if not self.accepting:
            return make_error_response(request.id, NODE_SHUTTING_DOWN, "node is shutting down")
        try:
            params = parse_task_params(request.params)
        except WireValidationError as exc:
            return make_error_response(request.id, INVALID_PARAMS, str(exc))
        self._inflight += 1
        self._idle.clear()
        try:
            result = await self.handle_task(params, request.params, task_id=request.id)
            return make_result_response(request.id, result)
        except AgentNotFoundError as exc:
            return make_error_response(request.id, AGENT_NOT_FOUND, str(exc))
        finally:
            self._inflight -= 1
            if self._inflight == 0:
                self._idle.set()

    # -- the execution workflow --------------------------------------------------

    async def handle_task(
        self,
        params: Union[HumanTaskParams, DelegationParams],
        raw_params: dict,
        *,
        task_id: str,
    ) -> dict:
        self._track(task_id, params.recipient.id or "unknown/unknown", "pending")
        agent = self._match_local(params)
        if agent is not None:
            return await self._execute_local(agent, params, task_id)

        candidates = await self._resolve_remote(params)
        if not candidates:
            self._track(task_id, params.recipient.id, "failed")
            raise AgentNotFoundError(
                f"no local or remote agent matches {params.recipient.id!r}"
            )
        last_error: Optional[BaseException] = None
        for candidate in candidates[:2]:  # one retry against the next candidate
            self._track(task_id, candidate.agent_id, "running")
            try:
                result = await asyncio.wait_for(
                    self.transport.call(
                        (candidate.ip, candidate.port), METHOD_DELEGATE_TASK, raw_params
                    ),
                    self.delegate_timeout_s,
                )
            except (TransportError, RemoteRpcError, asyncio.TimeoutError) as exc:
                last_error = exc
                continue
            self._track(task_id, candidate.agent_id, "completed")
            return result  # integrated verbatim
        self._track(task_id, candidates[0].agent_id, "failed")
        return self._failure_payload(params, f"delegation failed: {last_error}")

    async def _execute_local(
        self,
        agent: AgentDescriptor,
        params: Union[HumanTaskParams, DelegationParams],
        task_id: str,
    ) -> dict:
        self._track(task_id, agent.agent_id, "running")
        if isinstance(params, HumanTaskParams):
            task_name = "chat"
            arguments: Dict[str, Any] = {
                "text": params.messages[-1].content.text,
                "messages": [m.model_dump(mode="json") for m in params.messages],
                "maxTokens": params.maxTokens,
            }
        else:
            task_name = params.task.name
            arguments = dict(params.task.arguments)
        try:
            output = agent.handler(task_name, arguments) if agent.handler else ""
            if inspect.isawaitable(output):
                output = await output
        except AgentError as exc:
            self._track(task_id, agent.agent_id, "failed")
            return self._failure_payload(params, str(exc), model=agent.model)
        except Exception:
            self._track(task_id, agent.agent_id, "failed")
            raise
        self._track(task_id, agent.agent_id, "completed")
        if isinstance(params, HumanTaskParams):
            text = output if isinstance(output, str) else json.dumps(output, separators=(", ", ": "))
            budget = params.maxTokens * 4  # character budget, no tokenizer in scope
            stop = "endTurn"
            if len(text) > budget:
                text = text[:budget]
                stop = "maxTokens"
            return HumanTaskResult(
                sender=params.recipient,
                recipient=params.sender,
                content=MessageContent(type="text", text=text),
                model=agent.model,
                stopReason=stop,
            ).model_dump(mode="json", exclude_none=True)
        if not isinstance(output, dict):
            output = {"text": str(output)}
        return DelegationResult(
            sender=params.recipient,
            recipient=params.sender,
            content=DelegationContent(task=params.task.name, status="completed", output=output),
            isError=False,
        ).model_dump(mode="json", exclude_none=True)

    def _failure_payload(
        self,
        params: Union[HumanTaskParams, DelegationParams],
        message: str,
        *,
        model: str = "none",
    ) -> dict:
        if isinstance(params, HumanTaskParams):
            return HumanTaskResult(
                sender=params.recipient,
                recipient=params.sender,
                content=MessageContent(type="text", text=message),
                model=model,
                stopReason="error",
            ).model_dump(mode="json", exclude_none=True)
        return DelegationResult(
            sender=params.recipient,
            recipient=params.sender,
            content=DelegationContent(task=params.task.name, status="failed", output={"error": message}),
            isError=True,
        ).model_dump(mode="json", exclude_none=True)

    def _match_local(
        self, params: Union[HumanTaskParams, DelegationParams]
    ) -> Optional[AgentDescriptor]:
        recipient = params.recipient.id
        if recipient in self.agents:
            return self.agents[recipient]
        if "/" not in recipient:
            for agent in self.agents.values():
                if agent.bare_name == recipient:
                    return agent
        if isinstance(params, DelegationParams):
            for agent in self.agents.values():
                if params.intent in agent.description:
                    return agent
        return None

    async def _resolve_remote(
        self, params: Union[HumanTaskParams, DelegationParams]
    ) -> List[RemoteCandidate]:
        recipient = params.recipient.id
        records = []
        if self.gossip is not None:
            if "/" in recipient:
                hit = self.gossip.find_agent(recipient)
                if hit is not None:
                    records.append(hit)
            else:
                records.extend(
                    r for r in self.gossip.agents() if r.agent_id.split("/", 1)[1] == recipient
                )
            if not records and isinstance(params, DelegationParams):
                records.extend(self.gossip.find_agents_by_capability(params.intent))
        candidates = [
            RemoteCandidate(r.agent_id, r.node_id, r.node_ip, r.node_port, r.last_seen)
            for r in records
            if r.node_id != self.node_id and r.node_ip and r.node_port
        ]
        if not candidates and self.dht is not None and "/" in recipient:
            try:
                meta = await self.dht.find_agent(recipient)
            except LookupFailedError:
                meta = None
            if (
                meta
                and meta.get("node_id") != self.node_id
                and meta.get("node_ip")
                and meta.get("node_port")
            ):
                candidates.append(
                    RemoteCandidate(
                        str(meta.get("agent_id", recipient)),
                        str(meta["node_id"]),
                        str(meta["node_ip"]),
                        int(meta["node_port"]),
                        float(meta.get("last_update", 0.0)),
                    )
                )
        candidates = [c for c in candidates if (c.ip, c.port) != self.advertise_address]
        unique: Dict[tuple, RemoteCandidate] = {}
        for c in candidates:
            unique.setdefault((c.node_id, c.agent_id), c)
        # freshest advertisement wins; stable tie-break keeps runs reproducible
        return sorted(unique.values(), key=lambda c: (-c.last_seen, c.node_id))

    # -- registration & status ------------------------------------------------------

    async def register_local_agent(self, desc: AgentDescriptor) -> None:
        if desc.agent_id in self.agents:
            raise DuplicateAgentError(f"{desc.agent_id} already registered")
        self.agents[desc.agent_id] = desc
        host, port = self.advertise_address
        if self.gossip is not None:
            self._gossip_emit(
                self.gossip.register_agent(
                    desc.agent_id, desc.description, node_ip=host, node_port=port
                )
            )
        if self.dht is not None:
            try:
                await self.dht.register_agent(
                    desc.agent_id,
                    {
                        "description": list(desc.description),
                        "last_seen": format_rfc3339(self.clock.now()),
                    },
                )
            except StoreFailedError:
                pass  # no reachable replica yet; re-registration will retry
        await self.push_status()

    def unregister_local_agent(self, agent_id: str) -> None:
        self.agents.pop(agent_id, None)
        if self.gossip is not None:
            self.gossip.unregister_agent(agent_id)

    def report_status(self) -> NodeStatusReport:
        return NodeStatusReport(
            node_id=self.config.node_id,
            node_name=self.config.node_name,
            timestamp=format_rfc3339(self.clock.now()),
            system_info=self.sampler.sample(),
            available_agents=list(self.agents.keys()),
        )

    def _register_params(self) -> dict:
        now = format_rfc3339(self.clock.now())
        host, port = self.advertise_address
        agent_docs = [
            AgentMetadata(
                agent_id=a.agent_id,
                description=list(a.description),
                last_seen=now,
                node_id=self.node_id,
                node_ip=host,
                node_port=port,
            )
            for a in self.agents.values()
        ]
        params = RegisterNodeParams(
            report=self.report_status(), address=f"{host}:{port}", agents=agent_docs
        )
        return params.model_dump(mode="json", exclude_none=True)

    async def push_status(self) -> Dict[Address, bool]:
        """One registration round against every configured registry."""
        outcome: Dict[Address, bool] = {}
        if not self.config.registries:
            return outcome
        params = self._register_params()
        for address in self.config.registries:
            try:
                await self.transport.call(address, METHOD_REGISTER_NODE, params)
                outcome[address] = True
            except (TransportError, RemoteRpcError):
                outcome[address] = False
        return outcome

    async def push_status_forever(self) -> None:
        """Periodic registration with per-registry backoff on failure."""
        delay = self.config.report_period_s
        while not self.stopped:
            results = await self.push_status()
            if results and not any(results.values()):
                delay = min(delay * 2, self.config.report_period_s * 8)
            else:
                delay = self.config.report_period_s
            await asyncio.sleep(delay)

    # -- lifecycle ----------------------------------------------------------------

    def _track(self, task_id: str, agent_id: str, status: str) -> None:
        history = self.assignment_history.setdefault(task_id, [])
        if history and history[-1] == status:
            pass  # e.g. retry against the next candidate stays "running"
        else:
            history.append(status)
        self.assignments[task_id] = TaskAssignment(
            task_id=task_id, assigned_agent=agent_id, status=status
        )

    async def shutdown(self, grace_s: float = 5.0) -> None:
        """Stop accepting work, drain in-flight tasks, announce departure."""
        self.accepting = False
        try:
            await asyncio.wait_for(self._idle.wait(), grace_s)
        except asyncio.TimeoutError:
            pass
        for task_id, assignment in list(self.assignments.items()):
            if assignment.status in ("pending", "running"):
                self._track(task_id, assignment.assigned_agent, "failed")
        if self.gossip is not None:
            self._gossip_emit(self.gossip.departure())
        self.stopped = True
