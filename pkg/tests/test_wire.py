"""Wire format tests: golden fixtures, round trips, validation verdicts."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aios_server import wire
from aios_server.wire import golden


def corpus_dict():
    return dict(wire.golden_corpus())


def test_corpus_has_all_seven_documents():
    names = [name for name, _ in wire.golden_corpus()]
    assert names == [
        "human_request",
        "human_response",
        "delegation_request",
        "delegation_response",
        "node_status_report",
        "task_assignment",
        "agent_metadata",
    ]


def test_every_corpus_entry_decodes():
    for name, raw in wire.golden_corpus():
        doc = wire.decode(raw)
        assert doc is not None, name


def test_golden_reencode_preserves_fields():
    # whitespace-insensitive: compare parsed trees, which also checks every
    # field name and value survived the decode/encode cycle
    for name, raw in wire.golden_corpus():
        doc = wire.decode(raw)
        assert json.loads(wire.encode(doc)) == json.loads(raw), name


def test_encode_is_byte_stable():
    for name, raw in wire.golden_corpus():
        doc = wire.decode(raw)
        assert wire.encode(doc) == wire.encode(doc), name


def test_human_request_fields():
    req = wire.decode(corpus_dict()["human_request"])
    assert isinstance(req, wire.RpcRequest)
    assert req.method == "aios/delegateTask"
    assert req.id == "12345"
    params = wire.parse_task_params(req.params)
    assert isinstance(params, wire.HumanTaskParams)
    assert params.maxTokens == 200
    assert params.sender.id == "human_user"
    assert params.recipient.role == "assistant"
    assert params.messages[0].content.text.startswith("Summarize")


def test_node_status_report_fields():
    report = wire.decode(corpus_dict()["node_status_report"])
    assert isinstance(report, wire.NodeStatusReport)
    assert report.node_id == "Node_42"
    assert report.system_info.cpu_percent == 23.4
    assert len(report.available_agents) == 3


def test_task_assignment_fields():
    doc = wire.decode(corpus_dict()["task_assignment"])
    assert isinstance(doc, wire.TaskAssignment)
    assert doc.task_id == "task-987"
    assert doc.assigned_agent == "example/language_tutor"
    assert doc.status == "running"


def test_agent_metadata_fields():
    doc = wire.decode(corpus_dict()["agent_metadata"])
    assert isinstance(doc, wire.AgentMetadata)
    assert doc.agent_id == "example/academic_agent"
    assert doc.description == ["text_analysis", "research"]
    assert doc.last_seen == "2025-02-28T12:00:00Z"


def test_repaired_fixture_matches_published_prefix():
    # only the text up to the truncation point is comparable to the source
    resp = wire.decode(corpus_dict()["human_response"])
    text = resp.result["content"]["text"]
    cut = golden.REPAIRED["human_response"]
    assert text.startswith(cut)
    assert text == golden.HUMAN_RESPONSE_TRUNCATION_POINT + "% improvement."


def test_wrong_jsonrpc_version_rejected():
    bad = b'{"jsonrpc":"1.0","id":"1","method":"aios/nodeStatus","params":{}}'
    with pytest.raises(wire.WireVersionError):
        wire.decode(bad)


def test_malformed_json_is_parse_error():
    with pytest.raises(wire.WireParseError):
        wire.decode(b'{"jsonrpc": "2.0",')


def test_validation_error_lists_offending_paths():
    bad = json.loads(corpus_dict()["human_request"])
    bad["params"]["messages"][0]["content"]["type"] = "markdown"
    with pytest.raises(wire.WireValidationError) as err:
        wire.decode(json.dumps(bad))
    paths = [path for path, _ in err.value.violations]
    assert any("messages.0.content.type" in p for p in paths)


def test_response_requires_exactly_one_of_result_error():
    with pytest.raises(Exception):
        wire.RpcResponse(jsonrpc="2.0", id="x", result={"a": 1}, error=wire.RpcError(code=1, message="y"))
    with pytest.raises(Exception):
        wire.RpcResponse(jsonrpc="2.0", id="x")
    # a constructed-around-validation value is refused at encode time
    invalid = wire.RpcResponse.model_construct(
        jsonrpc="2.0", id="x", result={"a": 1}, error=wire.RpcError(code=1, message="y")
    )
    with pytest.raises(wire.EncodingRefusedError):
        wire.encode(invalid)


def test_make_error_response_reserved_codes():
    # oracle: the JSON-RPC 2.0 reserved-code table
    reserved = {
        -32700: "Parse error",
        -32600: "Invalid Request",
        -32601: "Method not found",
        -32602: "Invalid params",
        -32603: "Internal error",
    }
    for code, message in reserved.items():
        resp = wire.make_error_response("task-001", code, message)
        assert resp.id == "task-001"
        assert resp.error.code == code
        assert resp.result is None
        encoded = json.loads(wire.encode(resp))
        assert "result" not in encoded
        assert encoded["error"] == {"code": code, "message": message}


def test_validate_delegation_golden_params_ok():
    req = wire.decode(corpus_dict()["delegation_request"])
    verdict = wire.validate_delegation(req.params)
    assert verdict.ok
    assert verdict.params.intent == "extract_data"
    assert verdict.params.task.name == "Extract statistical features"


def test_validate_delegation_empty_intent():
    req = wire.decode(corpus_dict()["delegation_request"])
    params = dict(req.params)
    params["intent"] = ""
    verdict = wire.validate_delegation(params)
    assert not verdict.ok
    assert [path for path, _ in verdict.violations] == ["intent"]


def test_validate_delegation_defaults_missing_arguments():
    params = {
        "intent": "extract_data",
        "sender": {"id": "a"},
        "recipient": {"id": "b"},
        "task": {"name": "t"},
    }
    verdict = wire.validate_delegation(params)
    assert verdict.ok
    assert verdict.params.task.arguments == {}
    # round-trips through the wire with the defaulted map
    req = wire.make_request("r1", wire.METHOD_DELEGATE_TASK, verdict.params.model_dump(exclude_none=True))
    back = wire.decode(wire.encode(req))
    assert back.params["task"]["arguments"] == {}


def test_delegation_result_error_flag_invariant():
    endpoint = {"id": "a"}
    ok = wire.DelegationResult(
        sender=endpoint,
        recipient=endpoint,
        content={"task": "t", "status": "failed", "output": {}},
        isError=True,
    )
    assert ok.isError
    with pytest.raises(Exception):
        wire.DelegationResult(
            sender=endpoint,
            recipient=endpoint,
            content={"task": "t", "status": "completed", "output": {}},
            isError=True,
        )


def test_agent_id_format_enforced():
    with pytest.raises(Exception):
        wire.AgentMetadata(agent_id="plainname", last_seen="2025-02-28T12:00:00Z")
    with pytest.raises(Exception):
        wire.AgentMetadata(agent_id="too/many/slashes", last_seen="2025-02-28T12:00:00Z")
    meta = wire.AgentMetadata(agent_id="ns/name", last_seen="2025-02-28T12:00:00Z")
    assert meta.description == []


json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**31), max_value=2**31),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
    st.text(max_size=20),
)
json_values = st.recursive(
    json_scalars,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(st.text(min_size=1, max_size=10), children, max_size=4),
    ),
    max_leaves=12,
)
json_maps = st.dictionaries(st.text(min_size=1, max_size=10), json_values, max_size=5)
idents = st.text(
    alphabet="abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=24
)


@settings(max_examples=150, deadline=None)
@given(id=idents, method=idents, params=json_maps)
def test_request_round_trip_property(id, method, params):
    req = wire.make_request(id, method, params)
    assert wire.decode(wire.encode(req)) == req


@settings(max_examples=150, deadline=None)
@given(id=idents, result=json_maps)
def test_response_round_trip_property(id, result):
    # avoid keys that trigger task-result sniffing with free-form payloads
    result = {k: v for k, v in result.items() if k not in ("stopReason", "isError")}
    resp = wire.make_result_response(id, result)
    assert wire.decode(wire.encode(resp)) == resp


@settings(max_examples=100, deadline=None)
@given(
    sender=idents,
    mtype=st.sampled_from(["agent_register", "agent_update", "heartbeat"]),
    data=json_maps,
    ttl=st.integers(min_value=0, max_value=16),
)
def test_gossip_envelope_round_trip(sender, mtype, data, ttl):
    env = wire.GossipEnvelope(
        sender_id=sender,
        message_type=mtype,
        data=data,
        timestamp="2025-02-28T12:00:00.000001Z",
        ttl=ttl,
    )
    assert wire.decode(wire.encode(env)) == env
