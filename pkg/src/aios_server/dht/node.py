"""DHT node: replicated key/value store with iterative XOR-metric lookups.

Agent records are stored under "agent:<agent_id>" on the R nodes whose ids
are closest to the key digest; lookups walk progressively closer contacts
with bounded parallelism.
"""

from __future__ import annotations

import asyncio
import secrets
from dataclasses import dataclass, field
from typing import List, Optional

from ..clock import Clock, SystemClock
from ..transport import Address, RemoteRpcError, RpcTransport, TransportError
from ..wire import (
    DHT_FIND_NODE,
    DHT_FIND_VALUE,
    DHT_PING,
    DHT_STORE,
    INTERNAL_ERROR,
    INVALID_PARAMS,
    METHOD_NOT_FOUND,
    RpcRequest,
    RpcResponse,
    make_error_response,
    make_result_response,
    validate_agent_id,
)
from .routing import (
    DEFAULT_K,
    Contact,
    RoutingTable,
    contact_from_doc,
    contact_to_doc,
    key_digest,
)

DEFAULT_ALPHA = 3
DEFAULT_REPLICAS = 3


class StoreFailedError(RuntimeError):
    def __init__(self, key: str):
        super().__init__(f"no replica accepted {key!r}")
        self.key = key


class LookupFailedError(RuntimeError):
    """Every lookup candidate was unreachable; carries the partial contact set."""

    def __init__(self, key: str, partial: List[Contact]):
        super().__init__(f"all candidates unreachable for {key!r}")
        self.key = key
        self.partial = partial


@dataclass
class StoreRecord:
    key: str
    value: dict
    stored_at: float
    replica_of: Optional[int] = None  # id of the node that pushed the replica


@dataclass
class LookupResult:
    value: Optional[dict]
    contacts: List[Contact]
    rounds: int

    @property
    def found(self) -> bool:
        return self.value is not None


class DhtNode:
    def __init__(
        self,
        ip: str,
        port: int,
        transport: RpcTransport,
        *,
        node_id: Optional[int] = None,
        node_name: Optional[str] = None,
        advertise_ip: Optional[str] = None,
        advertise_port: Optional[int] = None,
        clock: Optional[Clock] = None,
        k: int = DEFAULT_K,
        alpha: int = DEFAULT_ALPHA,
        replicas: int = DEFAULT_REPLICAS,
    ):
        if node_id is None:
            # a name pins the id deterministically; anonymous nodes draw one
            node_id = key_digest(node_name) if node_name else secrets.randbits(160)
        self.node_id = node_id
        self.node_name = node_name
        self.contact = Contact(node_id, ip, port)
        self.advertise_ip = advertise_ip if advertise_ip is not None else ip
        self.advertise_port = advertise_port if advertise_port is not None else port
        self.transport = transport
        self.clock = clock or SystemClock()
        self.k = k
        self.alpha = alpha
        self.replicas = replicas
        self.table = RoutingTable(node_id, k)
        self.records: dict[str, StoreRecord] = {}
        self._probing: set[int] = set()  # bucket indexes with a probe in flight

    # -- wire ------------------------------------------------------------

    def _sender_doc(self) -> dict:
        return contact_to_doc(self.contact)

    async def handle_rpc(self, request: RpcRequest) -> RpcResponse:
        try:
            params = request.params
            sender = params.get("sender")
            if isinstance(sender, dict):
                # ping handlers never probe, which bounds admission recursion:
                # a probe is itself a ping and must not trigger further probes
                await self._admit(contact_from_doc(sender), probe=request.method != DHT_PING)
            if request.method == DHT_PING:
                return make_result_response(request.id, {"node_id": self.contact.hex_id()})
            if request.method == DHT_STORE:
                origin = int(sender["node_id"], 16) if isinstance(sender, dict) else None
                self._put_local(str(params["key"]), dict(params["value"]), replica_of=origin)
                return make_result_response(request.id, {"stored": True})
            if request.method == DHT_FIND_NODE:
                target = int(params["target"], 16)
                nodes = [contact_to_doc(c) for c in self.table.find_closest(target, self.k)]
                return make_result_response(request.id, {"nodes": nodes})
            if request.method == DHT_FIND_VALUE:
                key = str(params["key"])
                record = self.records.get(key)
                if record is not None:
                    return make_result_response(request.id, {"value": record.value})
                nodes = [contact_to_doc(c) for c in self.table.find_closest(key_digest(key), self.k)]
                return make_result_response(request.id, {"nodes": nodes})
            return make_error_response(request.id, METHOD_NOT_FOUND, f"unknown method {request.method}")
        except (KeyError, ValueError, TypeError) as exc:
            return make_error_response(request.id, INVALID_PARAMS, f"bad params: {exc}")
        except Exception as exc:  # pragma: no cover - defensive
            return make_error_response(request.id, INTERNAL_ERROR, str(exc))

    # -- routing-table admission ------------------------------------------

    async def ping(self, contact: Contact) -> bool:
        try:
            await self.transport.call(contact.address, DHT_PING, {"sender": self._sender_doc()})
        except (TransportError, RemoteRpcError):
            return False
        return True

    async def _admit(self, contact: Contact, *, probe: bool) -> None:
        if contact.node_id == self.node_id:
            return
        resident = self.table.observe(contact)
        if resident is None:
            return
        bucket = self.table.bucket_of(contact.node_id)
        if not probe or bucket in self._probing:
            return  # full bucket keeps its residents
        self._probing.add(bucket)
        try:
            alive = await self.ping(resident)
        finally:
            self._probing.discard(bucket)
        if alive:
            self.table.touch(resident.node_id)
        else:
            self.table.replace(resident.node_id, contact)

    async def join(self, bootstrap: List[Contact]) -> int:
        """Seed the table and walk toward our own id to learn neighbours."""
        for contact in bootstrap:
            await self._admit(contact, probe=True)
        try:
            await self._iterate(self.node_id, key=None)
        except LookupFailedError:
            pass
        return len(self.table)

    async def bootstrap(self, addresses: List[Address]) -> int:
        """Join through raw addresses, learning each peer's id with a ping."""
        contacts: List[Contact] = []
        for address in addresses:
            try:
                reply = await self.transport.call(
                    address, DHT_PING, {"sender": self._sender_doc()}
                )
                contacts.append(Contact(int(str(reply["node_id"]), 16), address[0], address[1]))
            except (TransportError, RemoteRpcError, KeyError, ValueError):
                continue
        return await self.join(contacts)

    # -- storage ----------------------------------------------------------

    def _put_local(self, key: str, value: dict, replica_of: Optional[int] = None) -> None:
        existing = self.records.get(key)
        if existing is not None:
            old = existing.value.get("last_update")
            new = value.get("last_update")
            if old is not None and new is not None and new < old:
                return  # stale replica write; last writer wins
        self.records[key] = StoreRecord(key, value, self.clock.now(), replica_of)

    async def store(self, key: str, value: dict) -> int:
        """Write value to the replicas closest to hash(key); returns the count."""
        target = key_digest(key)
        try:
            found = await self._iterate(target, key=None)
            candidates = found.contacts
        except LookupFailedError as err:
            candidates = err.partial
        pool = {self.node_id: self.contact}
        for contact in candidates:
            pool.setdefault(contact.node_id, contact)
        ranked = sorted(pool.values(), key=lambda c: (c.node_id ^ target, c.node_id))
        written = 0
        for contact in ranked[: self.replicas]:
            if contact.node_id == self.node_id:
                self._put_local(key, value)
                written += 1
                continue
            try:
                await self.transport.call(
                    contact.address,
                    DHT_STORE,
                    {"sender": self._sender_doc(), "key": key, "value": value},
                )
                written += 1
            except (TransportError, RemoteRpcError):
                continue
        if written == 0:
            raise StoreFailedError(key)
        return written

    async def lookup(self, key: str) -> LookupResult:
        record = self.records.get(key)
        if record is not None:
            return LookupResult(value=dict(record.value), contacts=[], rounds=0)
        return await self._iterate(key_digest(key), key=key)

    # -- agent registry over the store -------------------------------------

    async def register_agent(self, agent_id: str, metadata: Optional[dict] = None) -> dict:
        validate_agent_id(agent_id)
        record = dict(metadata or {})
        record.setdefault("agent_id", agent_id)
        record["last_update"] = self.clock.now()
        record["node_id"] = self.node_name if self.node_name else self.contact.hex_id()
        record["node_ip"] = self.advertise_ip
        record["node_port"] = self.advertise_port
        await self.store(f"agent:{agent_id}", record)
        return record

    async def find_agent(self, agent_id: str) -> Optional[dict]:
        validate_agent_id(agent_id)
        result = await self.lookup(f"agent:{agent_id}")
        return result.value

    # -- iterative lookup ---------------------------------------------------

    async def _query_peer(self, contact: Contact, target_hex: str, key: Optional[str]) -> dict:
        if key is None:
            params = {"sender": self._sender_doc(), "target": target_hex}
            return await self.transport.call(contact.address, DHT_FIND_NODE, params)
        params = {"sender": self._sender_doc(), "key": key}
        return await self.transport.call(contact.address, DHT_FIND_VALUE, params)

    async def _iterate(self, target: int, *, key: Optional[str]) -> LookupResult:
        """Rounds of alpha parallel queries, walking closer until nothing improves."""
        target_hex = f"{target:040x}"
        known: dict[int, Contact] = {
            c.node_id: c for c in self.table.find_closest(target, self.k) if c.node_id != self.node_id
        }
        queried: set[int] = set()
        failed: set[int] = set()
        successes = 0
        rounds = 0
        while True:
            ranked = sorted(known.values(), key=lambda c: (c.node_id ^ target, c.node_id))[: self.k]
            batch = [c for c in ranked if c.node_id not in queried and c.node_id not in failed]
            batch = batch[: self.alpha]
            if not batch:
                break
            best_before = min((c.node_id ^ target for c in known.values()), default=None)
            rounds += 1
            replies = await asyncio.gather(
                *(self._query_peer(c, target_hex, key) for c in batch), return_exceptions=True
            )
            value: Optional[dict] = None
            for contact, reply in zip(batch, replies):
                queried.add(contact.node_id)
                if isinstance(reply, BaseException):
                    if isinstance(reply, (TransportError, RemoteRpcError)):
                        failed.add(contact.node_id)
                        continue
                    raise reply
                successes += 1
                await self._admit(contact, probe=False)
                if key is not None and "value" in reply:
                    value = dict(reply["value"])
                    continue
                for doc in reply.get("nodes", []):
                    learned = contact_from_doc(doc)
                    if learned.node_id == self.node_id:
                        continue
                    known.setdefault(learned.node_id, learned)
                    await self._admit(learned, probe=False)
            if value is not None:
                contacts = [c for c in ranked if c.node_id not in failed]
                return LookupResult(value=value, contacts=contacts, rounds=rounds)
            best_after = min((c.node_id ^ target for c in known.values()), default=None)
            if best_before is not None and (best_after is None or best_after >= best_before):
                break
        if queried and successes == 0:
            # carry everything we know, reachable or not — it is all we have
            partial = sorted(known.values(), key=lambda c: (c.node_id ^ target, c.node_id))
            raise LookupFailedError(key or target_hex, partial[: self.k])
        closest = sorted(
            (c for c in known.values() if c.node_id not in failed),
            key=lambda c: (c.node_id ^ target, c.node_id),
        )[: self.k]
        return LookupResult(value=None, contacts=closest, rounds=rounds)
