"""DHT tests: XOR metric laws, bucket policy, lookup vs brute-force oracle."""

import asyncio
import hashlib
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aios_server.dht import (
    Contact,
    DhtNode,
    LookupFailedError,
    NoBucketError,
    RoutingTable,
    SelfInsertError,
    bucket_index,
    key_digest,
    xor_distance,
)
from aios_server.harness import SimNetwork
from aios_server.wire import DHT_PING, make_request


def oracle_closest(contacts, key, count):
    # independent route: a global sort of every contact by XOR distance,
    # unlike the implementation's banded bucket walk
    return sorted(contacts, key=lambda c: (c.node_id ^ key, c.node_id))[:count]


ids_160 = st.integers(min_value=0, max_value=2**160 - 1)


# -- metric and placement -------------------------------------------------


def test_xor_distance_toy():
    assert xor_distance(0b0001, 0b1001) == 0b1000
    assert xor_distance(7, 7) == 0
    assert xor_distance(3, 12) == xor_distance(12, 3)


@settings(max_examples=200, deadline=None)
@given(a=ids_160, b=ids_160, c=ids_160)
def test_xor_metric_laws(a, b, c):
    assert xor_distance(a, a) == 0
    assert xor_distance(a, b) == xor_distance(b, a)
    assert xor_distance(a, b) ^ xor_distance(b, c) == xor_distance(a, c)


def test_bucket_index_toys():
    assert bucket_index(0b0001, 0b1001) == 3  # floor(log2(8))
    assert bucket_index(42, 43) == 0  # differ in lowest bit
    assert bucket_index(0, 1 << 159) == 159  # differ in highest bit
    with pytest.raises(NoBucketError):
        bucket_index(5, 5)


def test_key_digest_is_sha1_of_key():
    key = "agent:example/echo_agent"
    expected = int.from_bytes(hashlib.sha1(key.encode()).digest(), "big")
    assert key_digest(key) == expected
    assert key_digest(key) == key_digest(key)
    assert key_digest(key) != key_digest("agent:example/math_agent")


# -- routing table ---------------------------------------------------------


def contact(i, ip="10.0.0.1", port=9000):
    return Contact(i, ip, port)


def test_insert_into_empty_table():
    table = RoutingTable(owner_id=0)
    assert table.insert(contact(0b1001))
    assert len(table) == 1
    assert 0b1001 in table
    assert table.bucket_contents(3) == [contact(0b1001)]


def test_self_insert_rejected():
    table = RoutingTable(owner_id=77)
    with pytest.raises(SelfInsertError):
        table.observe(contact(77))


def test_twenty_first_contact_dropped_when_residents_alive():
    table = RoutingTable(owner_id=0, k=20)
    residents = [contact((1 << 100) + j) for j in range(20)]
    for c in residents:
        assert table.insert(c, probe=lambda _: True)
    extra = contact((1 << 100) + 20)
    assert not table.insert(extra, probe=lambda _: True)
    assert extra.node_id not in table
    assert set(table.bucket_contents(100)) == set(residents)
    # the probed least-recently-seen resident moved to the fresh end
    assert table.bucket_contents(100)[-1] == residents[0]


def test_dead_lru_evicted_for_new_contact():
    table = RoutingTable(owner_id=0, k=20)
    residents = [contact((1 << 100) + j) for j in range(20)]
    for c in residents:
        table.insert(c)
    extra = contact((1 << 100) + 20)
    assert table.insert(extra, probe=lambda _: False)
    inside = table.bucket_contents(100)
    assert residents[0] not in inside
    assert inside[-1] == extra
    assert len(inside) == 20


def test_reinsert_moves_contact_to_fresh_end():
    table = RoutingTable(owner_id=0)
    a, b, c = contact(0b1001), contact(0b1010), contact(0b1100)
    for x in (a, b, c):
        table.insert(x)
    table.insert(a)
    assert table.bucket_contents(3) == [b, c, a]


def test_find_closest_small_table_matches_oracle():
    table = RoutingTable(owner_id=0)
    members = [contact(5), contact(9), contact(200)]
    for c in members:
        table.insert(c)
    key = 8
    assert table.find_closest(key, 20) == oracle_closest(members, key, 20)
    assert table.find_closest(key, 1) == oracle_closest(members, key, 1)


def test_find_closest_empty_table():
    assert RoutingTable(owner_id=0).find_closest(12345, 20) == []


def test_find_closest_rejects_bad_count():
    with pytest.raises(ValueError):
        RoutingTable(owner_id=0).find_closest(1, 0)


@settings(max_examples=150, deadline=None)
@given(owner=ids_160, others=st.sets(ids_160, max_size=60), key=ids_160)
def test_find_closest_matches_global_sort(owner, others, key):
    table = RoutingTable(owner)
    for i in others - {owner}:
        table.insert(contact(i))
    known = list(table.contacts())
    for count in (1, 3, 20):
        assert table.find_closest(key, count) == oracle_closest(known, key, count)


def test_find_closest_matches_oracle_on_200_contacts():
    import random

    rng = random.Random(42)
    owner = rng.getrandbits(160)
    table = RoutingTable(owner)
    for _ in range(200):
        i = rng.getrandbits(160)
        if i != owner:
            table.insert(contact(i))
    known = list(table.contacts())
    for _ in range(50):
        key = rng.getrandbits(160)
        assert table.find_closest(key, 20) == oracle_closest(known, key, 20)


@settings(max_examples=100, deadline=None)
@given(owner=ids_160, others=st.sets(ids_160, max_size=60))
def test_bucket_placement_invariant(owner, others):
    table = RoutingTable(owner)
    for i in others - {owner}:
        table.insert(contact(i))
    for index in range(160):
        for c in table.bucket_contents(index):
            assert bucket_index(owner, c.node_id) == index


# -- networked node ---------------------------------------------------------


def build_network(n, *, seed=0):
    net = SimNetwork(seed=seed)
    nodes = []
    for i in range(n):
        name = f"dht{i}"
        address = (f"10.0.0.{i}", 9000)
        node = DhtNode(
            address[0], address[1], net.transport(name), node_name=name, clock=net.clock
        )
        net.register_rpc(name, address, node.handle_rpc)
        nodes.append(node)
    return net, nodes


async def bootstrap_all(nodes):
    for node in nodes:
        await node.join([p.contact for p in nodes if p is not node])


def test_store_replicates_to_globally_closest_three():
    async def run():
        net, nodes = build_network(8)
        await bootstrap_all(nodes)
        key = "agent:example/echo_agent"
        written = await nodes[0].store(key, {"agent_id": "example/echo_agent", "last_update": 1.0})
        assert written == 3
        expected = {
            c.node_id for c in oracle_closest([p.contact for p in nodes], key_digest(key), 3)
        }
        holders = {p.node_id for p in nodes if key in p.records}
        assert holders == expected

    asyncio.run(run())


def test_register_then_find_from_peer():
    async def run():
        net, nodes = build_network(5)
        await bootstrap_all(nodes)
        await nodes[1].register_agent("example/echo_agent", {"description": ["echo"]})
        found = await nodes[4].find_agent("example/echo_agent")
        assert found is not None
        assert found["node_id"] == "dht1"
        assert found["node_ip"] == "10.0.0.1"
        assert found["node_port"] == 9000
        assert found["description"] == ["echo"]

    asyncio.run(run())


def test_single_node_stores_locally_and_answers_in_zero_rounds():
    async def run():
        net, nodes = build_network(1)
        await nodes[0].register_agent("example/echo_agent")
        result = await nodes[0].lookup("agent:example/echo_agent")
        assert result.found
        assert result.rounds == 0

    asyncio.run(run())


def test_restore_with_newer_last_update_wins_on_all_replicas():
    async def run():
        net, nodes = build_network(5)
        await bootstrap_all(nodes)
        net.clock.set(100.0)
        await nodes[2].register_agent("example/echo_agent", {"description": ["v1"]})
        net.clock.set(200.0)
        await nodes[2].register_agent("example/echo_agent", {"description": ["v2"]})
        key = "agent:example/echo_agent"
        holders = [p for p in nodes if key in p.records]
        assert holders
        for holder in holders:
            assert holder.records[key].value["last_update"] == 200.0
            assert holder.records[key].value["description"] == ["v2"]

    asyncio.run(run())


def test_stale_restore_is_ignored():
    async def run():
        net, nodes = build_network(1)
        node = nodes[0]
        node._put_local("k", {"v": "new", "last_update": 50.0})
        node._put_local("k", {"v": "old", "last_update": 10.0})
        assert node.records["k"].value["v"] == "new"

    asyncio.run(run())


def test_find_agent_unknown_is_none():
    async def run():
        net, nodes = build_network(5)
        await bootstrap_all(nodes)
        assert await nodes[0].find_agent("example/ghost") is None

    asyncio.run(run())


def test_ping_admits_sender_to_routing_table():
    async def run():
        net, nodes = build_network(2)
        sender = nodes[0]
        receiver = nodes[1]
        request = make_request(
            "r1",
            DHT_PING,
            {"sender": {"node_id": sender.contact.hex_id(), "ip": "10.0.0.0", "port": 9000}},
        )
        response = await receiver.handle_rpc(request)
        assert response.result == {"node_id": receiver.contact.hex_id()}
        assert sender.node_id in receiver.table

    asyncio.run(run())


def test_unknown_dht_method_is_rpc_error():
    async def run():
        net, nodes = build_network(1)
        response = await nodes[0].handle_rpc(make_request("r1", "dht/unknown", {}))
        assert response.error is not None
        assert response.error.code == -32601

    asyncio.run(run())


def test_line_bootstrap_lookup_crosses_intermediate_hops():
    async def run():
        net, nodes = build_network(8)
        for i in range(1, 8):
            await nodes[i].join([nodes[i - 1].contact])
        await nodes[0].register_agent("example/echo_agent", {"description": ["echo"]})
        result = await nodes[7].lookup("agent:example/echo_agent")
        assert result.found
        assert result.rounds >= 1
        assert result.value["node_id"] == "dht0"

    asyncio.run(run())


def test_lookup_round_bound_on_bootstrapped_network():
    async def run():
        import random

        rng = random.Random(7)
        net, nodes = build_network(16)
        await bootstrap_all(nodes)
        bound = math.ceil(math.log2(16)) + 3
        for trial in range(100):
            writer, reader = rng.sample(nodes, 2)
            key = f"agent:example/a{trial}"
            await writer.store(key, {"agent_id": f"example/a{trial}", "last_update": float(trial)})
            result = await reader.lookup(key)
            assert result.found, key
            assert result.rounds <= bound
            # the table's banded walk must agree with the global sort
            known = list(reader.table.contacts())
            got = reader.table.find_closest(key_digest(key), 20)
            assert got == oracle_closest(known, key_digest(key), 20)

    asyncio.run(run())


def test_all_candidates_unreachable_raises_lookup_failed():
    async def run():
        net, nodes = build_network(3)
        await bootstrap_all(nodes)
        net.kill("dht1")
        net.kill("dht2")
        with pytest.raises(LookupFailedError) as err:
            await nodes[0].lookup("agent:example/ghost")
        assert len(err.value.partial) == 2

    asyncio.run(run())


def test_store_survives_unreachable_peers_with_local_replica():
    async def run():
        net, nodes = build_network(3)
        await bootstrap_all(nodes)
        net.kill("dht1")
        net.kill("dht2")
        written = await nodes[0].store("agent:example/solo", {"last_update": 1.0})
        assert written == 1
        assert "agent:example/solo" in nodes[0].records

    asyncio.run(run())


def test_seeded_runs_produce_identical_event_logs():
    def run_once():
        async def scenario():
            net, nodes = build_network(8, seed=7)
            await bootstrap_all(nodes)
            await nodes[0].register_agent("example/echo_agent")
            await nodes[5].find_agent("example/echo_agent")
            return net.event_log()

        return asyncio.run(scenario())

    assert run_once() == run_once()
