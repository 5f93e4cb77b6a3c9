import pytest

from bistream.errors import DuplicateId, EmptyInput, InvalidValue, SchemaError
from bistream.matrix import EntropyReport, from_dense, identity, perfect_matrix
from bistream.multi import AttributeSpec, MultiStream, aggregate_beta
from bistream.rng import derive
from bistream.stream import SETTINGS, StreamTuple, init_stream

from conftest import H_SEED, SEED_2X2


def test_aggregate_beta():
    assert aggregate_beta([EntropyReport(0.3, 0.6, 0.5)]) == 0.5
    assert aggregate_beta([EntropyReport(1, 1, 1), EntropyReport(0, 1, 0)]) == 0.5
    agg = aggregate_beta([EntropyReport(H_SEED, 1, H_SEED), EntropyReport(1, 1, 1)])
    assert agg == pytest.approx((H_SEED + 1) / 2)
    assert agg == pytest.approx(0.8610, abs=1e-4)
    assert aggregate_beta([EntropyReport(0, 0, 0), EntropyReport(0, 0, 0)]) == 0.0
    with pytest.raises(EmptyInput):
        aggregate_beta([])


def test_aggregate_between_min_and_max():
    reps = [EntropyReport(0.2, 1.0, 0.2), EntropyReport(2.5, 3.0, 2.5 / 3), EntropyReport(1.0, 2.0, 0.5)]
    agg = aggregate_beta(reps)
    assert min(r.beta for r in reps) <= agg <= max(r.beta for r in reps)
    fixed = EntropyReport(agg * 4.0, 4.0, agg)
    assert aggregate_beta(reps + [fixed]) == pytest.approx(agg)


def test_single_attribute_matches_engine():
    spec = AttributeSpec("income", policy=SETTINGS["iii"])
    multi = MultiStream([spec], master_seed=5)
    state, ref = init_stream(from_dense(SEED_2X2), [StreamTuple("a", 1.0), StreamTuple("b", 2.0)],
                             SETTINGS["iii"], derive(5, "income"), attr="income")
    assert multi.ingest_multi("a", {"income": 1.0}) == []
    assert multi.ingest_multi("b", {"income": 2.0}) == ref
    for n in range(30):
        assert multi.ingest_multi(f"n{n}", {"income": n * 2.0}) == state.ingest(StreamTuple(f"n{n}", n * 2.0))


def test_two_identical_attributes():
    specs = [AttributeSpec("x", policy=SETTINGS["ii"]), AttributeSpec("y", policy=SETTINGS["ii"])]
    multi = MultiStream(specs, master_seed=1)
    # give both attributes the same substream seed
    multi.rngs["y"] = derive(1, "x")
    multi.ingest_multi("a", {"x": 3.0, "y": 3.0})
    multi.ingest_multi("b", {"x": 4.0, "y": 4.0})
    for n in range(40):
        events = multi.ingest_multi(f"n{n}", {"x": float(n), "y": float(n)})
        xs = [(e.id, e.value) for e in events if e.attr == "x"]
        ys = [(e.id, e.value) for e in events if e.attr == "y"]
        assert xs == ys


def test_aggregate_of_seed_and_perfect():
    specs = [AttributeSpec("x"), AttributeSpec("y", seed_matrix=perfect_matrix(2))]
    multi = MultiStream(specs, master_seed=0)
    multi.ingest_multi("a", {"x": 1.0, "y": 1.0})
    events = multi.ingest_multi("b", {"x": 2.0, "y": 3.0})
    assert all(e.beta == pytest.approx(0.8610, abs=1e-4) for e in events)
    assert multi.per_attribute_beta() == pytest.approx({"x": H_SEED, "y": 1.0})


def test_adding_attribute_keeps_other_stream():
    def values(specs):
        multi = MultiStream(specs, master_seed=9)
        out = []
        for n in range(30):
            vals = {s.name: (float(n) if s.kind == "numeric" else "p") for s in specs}
            out += [(e.id, e.value) for e in multi.ingest_multi(f"n{n}", vals) if e.attr == "age"]
        return out

    base = [AttributeSpec("age", policy=SETTINGS["i"])]
    extra = base + [AttributeSpec("zip", kind="categorical", labels=["p", "q"], seed_matrix=perfect_matrix(2))]
    assert values(base) == values(extra)


def test_mixed_kinds_and_schema_errors():
    specs = [
        AttributeSpec("income"),
        AttributeSpec("region", kind="categorical", labels=["n", "s"], seed_matrix=identity(2)),
    ]
    multi = MultiStream(specs, master_seed=3)
    multi.ingest_multi("a", {"income": 1.0, "region": "n"})
    events = multi.ingest_multi("b", {"income": 5.0, "region": "s"})
    assert [(e.attr, e.id) for e in events] == [("income", "a"), ("income", "b"), ("region", "a"), ("region", "b")]
    assert [e.t for e in events] == [1, 2, 1, 2]
    with pytest.raises(SchemaError):
        multi.ingest_multi("c", {"income": 1.0})
    with pytest.raises(SchemaError):
        multi.ingest_multi("c", {"income": 1.0, "region": "n", "zip": "x"})
    with pytest.raises(InvalidValue):
        multi.ingest_multi("c", {"income": "1", "region": "n"})
    with pytest.raises(InvalidValue):
        multi.ingest_multi("c", {"income": 1.0, "region": 3})
    with pytest.raises(DuplicateId):
        multi.ingest_multi("a", {"income": 1.0, "region": "n"})
    events = multi.ingest_multi("c", {"income": 2.0, "region": "e"})
    assert {e.attr for e in events} == {"income", "region"}
    assert all(e.t == 3 for e in events)


def test_categorical_only_schema():
    specs = [AttributeSpec("c", kind="categorical", labels=["x", "y"], seed_matrix=perfect_matrix(2))]
    multi = MultiStream(specs, master_seed=0)
    events = multi.ingest_multi("a", {"c": "x"})
    assert len(events) == 1 and events[0].t == 1 and events[0].beta == 1.0


def test_schema_validation():
    with pytest.raises(SchemaError):
        MultiStream([], 0)
    with pytest.raises(SchemaError):
        MultiStream([AttributeSpec("a"), AttributeSpec("a")], 0)
    with pytest.raises(SchemaError):
        AttributeSpec("c", kind="categorical")
