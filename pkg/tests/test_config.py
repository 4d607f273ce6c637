import random
from pathlib import Path

import pytest

from conftest import random_formula, random_subset
from gbqs.config import SpecError, emit_spec, parse_spec, parse_spec_document
from gbqs.constructions import two_layer_one_common, two_layer_parties
from gbqs.formula import And, Literal, Or, Threshold, evaluate, parties

GOLDEN = Path(__file__).parent / "data" / "two_layer_k4.json"


def test_bare_threshold_document():
    f = parse_spec('{"threshold": 3, "of": ["p1", "p2", "p3", "p4"]}')
    assert f == Threshold(3, tuple(Literal(f"p{i}") for i in range(1, 5)))


def test_bare_literal_document():
    assert parse_spec('"p1"') == Literal("p1")


def test_and_or_sugar():
    f = parse_spec('{"and": ["a", {"or": ["b", "c"]}]}')
    assert f == And((Literal("a"), Or((Literal("b"), Literal("c")))))


def test_golden_document_matches_construction(two_layer_k4):
    doc = parse_spec_document(GOLDEN.read_bytes())
    assert doc.formula == two_layer_k4
    assert doc.version == 1
    assert doc.declared_parties == two_layer_parties(4)


def test_golden_byte_round_trip():
    data = GOLDEN.read_bytes()
    doc = parse_spec_document(data)
    assert emit_spec(doc.formula, doc.declared_parties) == data


def test_emit_is_deterministic(two_layer_k4):
    assert emit_spec(two_layer_k4) == emit_spec(two_layer_k4)


def test_emit_single_literal():
    data = emit_spec(Literal("p1"))
    assert parse_spec(data) == Literal("p1")
    assert b'"quorums": "p1"' in data


def test_semantic_round_trip_large_formula():
    f = two_layer_one_common(7)
    back = parse_spec(emit_spec(f))
    assert back == f
    universe = sorted(parties(f))
    rng = random.Random(40)
    for _ in range(1000):
        subset = random_subset(rng, universe)
        assert evaluate(f, subset) == evaluate(back, subset)


def test_semantic_round_trip_random_formulas():
    rng = random.Random(41)
    for _ in range(50):
        pool = [f"p{i}" for i in range(rng.randint(2, 9))]
        f = random_formula(rng, pool)
        assert parse_spec(emit_spec(f)) == f


def test_malformed_json_reports_position():
    with pytest.raises(SpecError) as err:
        parse_spec("{nope")
    assert "not valid JSON" in str(err.value)


def test_unknown_operator_key_reports_path():
    with pytest.raises(SpecError) as err:
        parse_spec('{"threshold": 1, "off": ["p1"]}')
    assert "unknown operator keys" in str(err.value)


def test_threshold_too_large_rejected_never_clamped():
    with pytest.raises(SpecError) as err:
        parse_spec('{"threshold": 5, "of": ["p1", "p2"]}')
    assert "out of range" in str(err.value)
    assert ".threshold" in err.value.path


def test_threshold_below_one_rejected():
    with pytest.raises(SpecError):
        parse_spec('{"threshold": 0, "of": ["p1", "p2"]}')


def test_threshold_must_be_integer():
    with pytest.raises(SpecError):
        parse_spec('{"threshold": true, "of": ["p1"]}')
    with pytest.raises(SpecError):
        parse_spec('{"threshold": 1.5, "of": ["p1"]}')


def test_undeclared_party_reports_path():
    doc = '{"v": 1, "parties": ["p1"], "quorums": {"and": ["p1", "p2"]}}'
    with pytest.raises(SpecError) as err:
        parse_spec(doc)
    assert "not declared" in str(err.value)
    assert err.value.path == "$.quorums.and[1]"


def test_duplicate_party_rejected():
    with pytest.raises(SpecError):
        parse_spec('{"parties": ["p1", "p1"], "quorums": "p1"}')


def test_unsupported_version_rejected():
    with pytest.raises(SpecError):
        parse_spec('{"v": 2, "quorums": "p1"}')


def test_nested_error_path_points_into_the_tree():
    doc = '{"threshold": 2, "of": ["p1", {"or": ["p2", 7]}]}'
    with pytest.raises(SpecError) as err:
        parse_spec(doc)
    assert err.value.path == "$.of[1].or[1]"
