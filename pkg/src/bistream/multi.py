"""Tuples with several attributes, each protected by its own engine.

Every attribute owns an independent matrix and an RNG substream derived from
the master seed and the attribute name.  The reported guarantee is the
aggregate ``sum(H_m) / sum(log2 r_m)`` over attributes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .categorical import CategoricalStream
from .errors import EmptyInput, InvalidValue, SchemaError, ShapeError, DuplicateId
from .events import OutputEvent
from .matrix import EntropyReport, TransitionMatrix, from_dense
from .rng import derive
from .stream import NumericStream, Policy, StreamTuple, init_stream

Engine = Union[NumericStream, CategoricalStream]

SEED_MATRIX_2X2 = ((0.8, 0.2), (0.2, 0.8))


def default_seed_matrix() -> TransitionMatrix:
    return from_dense(SEED_MATRIX_2X2)


@dataclass
class AttributeSpec:
    """Schema entry for one attribute.

    Numeric attributes use ``policy`` and ``seed_matrix`` (the 2x2 matrix
    with 0.8 on the diagonal when omitted).  Categorical attributes need
    ``labels`` and a matching ``seed_matrix``.
    """

    name: str
    kind: str = "numeric"
    policy: Policy = field(default_factory=Policy)
    seed_matrix: TransitionMatrix | None = None
    labels: Sequence[str] | None = None
    on_unknown: str = "expand"
    expand_lambda: float = 0.5
    expand_transforms: int = 1
    expand_target: str | None = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise SchemaError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "numeric" and self.seed_matrix is None:
            self.seed_matrix = default_seed_matrix()
        if self.kind == "categorical":
            if not self.labels:
                raise SchemaError(f"categorical attribute {self.name!r} needs a label list")
            if self.seed_matrix is None:
                raise SchemaError(f"categorical attribute {self.name!r} needs a matrix")


def aggregate_beta(reports: Sequence[EntropyReport]) -> float:
    if not reports:
        raise EmptyInput("aggregate_beta needs at least one report")
    h_max = sum(rep.h_max for rep in reports)
    if h_max == 0.0:
        return 0.0
    return min(1.0, max(0.0, sum(rep.h for rep in reports) / h_max))


class MultiStream:
    """Lockstep driver for one engine per attribute.

    Until enough records have arrived to fill the numeric seed matrices,
    records are held and published together once the seed is complete.
    """

    def __init__(self, specs: Sequence[AttributeSpec], master_seed: int, record: bool = False):
        if not specs:
            raise SchemaError("schema needs at least one attribute")
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise SchemaError(f"attribute names must be distinct: {names}")
        self.specs = list(specs)
        self.master_seed = master_seed
        self.record = record
        sizes = {s.seed_matrix.r for s in specs if s.kind == "numeric"}
        if len(sizes) > 1:
            raise ShapeError(f"numeric seed matrices must share one size, got {sorted(sizes)}")
        self.seed_size = sizes.pop() if sizes else 0
        self.rngs = {s.name: derive(master_seed, s.name) for s in specs}
        self.engines: dict[str, Engine] = {}
        for s in specs:
            if s.kind == "categorical":
                self.engines[s.name] = CategoricalStream(
                    s.labels, s.seed_matrix, self.rngs[s.name], attr=s.name,
                    on_unknown=s.on_unknown, expand_lambda=s.expand_lambda,
                    expand_transforms=s.expand_transforms, expand_target=s.expand_target,
                    record=record,
                )
        self.pending: list[tuple[str, dict]] = []
        self.seen: set[str] = set()
        self.t = 0

    @property
    def started(self) -> bool:
        return self.t > 0

    def check_values(self, values: Mapping) -> dict:
        names = {s.name for s in self.specs}
        if set(values) != names:
            missing = sorted(names - set(values))
            extra = sorted(set(values) - names)
            raise SchemaError(f"attribute mismatch: missing {missing}, unexpected {extra}")
        out = {}
        for s in self.specs:
            v = values[s.name]
            if s.kind == "numeric":
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise InvalidValue(f"attribute {s.name!r} expects a number, got {v!r}")
                out[s.name] = float(v)
            else:
                if not isinstance(v, str):
                    raise InvalidValue(f"attribute {s.name!r} expects a category label, got {v!r}")
                out[s.name] = v
        return out

    def ingest_multi(self, id: str, values: Mapping) -> list[OutputEvent]:
        if id in self.seen:
            raise DuplicateId(f"duplicate id {id!r}")
        vals = self.check_values(values)
        if not self.started and len(self.pending) + 1 < self.seed_size:
            self.pending.append((id, vals))
            self.seen.add(id)
            return []
        if not self.started:
            self.pending.append((id, vals))
            events = self._start()
            self.seen.add(id)
            return events
        events: list[OutputEvent] = []
        for s in self.specs:
            eng = self.engines[s.name]
            if s.kind == "numeric":
                events.extend(eng.ingest(StreamTuple(id, vals[s.name])))
            else:
                events.extend(eng.ingest(id, vals[s.name]))
        self.seen.add(id)
        self.t += 1
        return self._stamp(events)

    def _start(self) -> list[OutputEvent]:
        records, self.pending = self.pending, []
        events: list[OutputEvent] = []
        for s in self.specs:
            if s.kind == "numeric":
                tuples = [StreamTuple(i, v[s.name]) for i, v in records]
                eng, evs = init_stream(s.seed_matrix, tuples, s.policy, self.rngs[s.name], attr=s.name, record=self.record)
                self.engines[s.name] = eng
                events.extend(evs)
        self.t = len(records)
        by_t: list[list[OutputEvent]] = [[] for _ in records]
        for s in self.specs:
            if s.kind == "categorical":
                eng = self.engines[s.name]
                for n, (i, v) in enumerate(records):
                    by_t[n].extend(eng.ingest(i, v[s.name]))
        # seed releases of numeric attributes carry the seed beta; categorical
        # records are stamped once the whole seed batch is out
        cat_events = [e for evs in by_t for e in evs]
        return self._stamp(events + cat_events)

    def reports(self) -> list[EntropyReport]:
        return [self.engines[s.name].matrix.entropy_report() for s in self.specs if s.name in self.engines]

    def current_beta(self) -> float:
        return aggregate_beta(self.reports())

    def per_attribute_beta(self) -> dict[str, float]:
        return {s.name: self.engines[s.name].current_beta() for s in self.specs if s.name in self.engines}

    def _stamp(self, events: list[OutputEvent]) -> list[OutputEvent]:
        beta = self.current_beta()
        for e in events:
            e.beta = beta
        return events
