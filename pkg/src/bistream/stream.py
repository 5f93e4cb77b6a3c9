"""Zero-delay protection of a numeric attribute.

Each arriving individual is appended to the cumulative matrix as an unmixed
column, mixed with one or more already published individuals through
T-transforms, and released at once.  Partners whose protected values moved
get an ``update`` event in the same call; nothing is ever queued.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DuplicateId, InsufficientSeed, InvalidLambda, InvalidRange, InvalidValue, ShapeError
from .events import OutputEvent
from .matrix import TransitionMatrix, TTransform
from .rng import Rng

__all__ = [
    "SETTINGS",
    "NumericStream",
    "Policy",
    "Snapshot",
    "StreamTuple",
    "current_beta",
    "ingest",
    "init_stream",
    "snapshot",
    "t_transform_values",
]


@dataclass(frozen=True)
class StreamTuple:
    id: str
    value: float


@dataclass(frozen=True)
class Policy:
    """How much mixing each arrival receives.

    ``lam=None`` draws the mixing weight uniformly from (0, 1) per transform;
    a float fixes it.  ``transforms=(lo, hi)`` draws the number of transforms
    per arrival uniformly from ``lo..hi``.
    """

    lam: float | None = None
    transforms: tuple[int, int] = (1, 1)
    partner_mode: str = "uniform_all"

    def __post_init__(self):
        if self.lam is not None and not (0.0 < self.lam < 1.0):
            raise InvalidLambda(f"fixed lambda must lie strictly inside (0, 1), got {self.lam!r}")
        lo, hi = self.transforms
        if lo < 1 or hi < lo:
            raise InvalidRange(f"transforms per arrival must satisfy 1 <= lo <= hi, got {self.transforms}")
        if self.partner_mode != "uniform_all":
            raise ValueError(f"unsupported partner mode {self.partner_mode!r}")

    def draw_count(self, rng: Rng) -> int:
        lo, hi = self.transforms
        return lo if lo == hi else rng.next_int_range(lo, hi)

    def draw_lambda(self, rng: Rng) -> float:
        return rng.next_lambda() if self.lam is None else self.lam


# the three experimental settings of the reference study
SETTINGS = {
    "i": Policy(lam=None, transforms=(1, 1)),
    "ii": Policy(lam=0.5, transforms=(1, 1)),
    "iii": Policy(lam=0.5, transforms=(2, 10)),
}


def t_transform_values(a_i: float, a_k: float, lam: float) -> tuple[float, float]:
    if not (0.0 <= lam < 1.0):
        raise InvalidLambda(f"lambda must lie in [0, 1), got {lam!r}")
    mu = 1.0 - lam
    return lam * a_i + mu * a_k, lam * a_k + mu * a_i


def _as_value(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidValue(f"numeric attribute expects a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise InvalidValue(f"non-finite value {value!r}")
    return v


@dataclass
class Snapshot:
    matrix: TransitionMatrix
    ids: list[str]
    protected: list[float]
    t: int


class NumericStream:
    """Stream state: cumulative matrix ``P^t`` plus the current protected values.

    Raw values are never stored.  With ``record=True`` the matrix operations
    of every arrival are kept in :attr:`history` for auditing.
    """

    def __init__(
        self,
        matrix: TransitionMatrix,
        ids: list[str],
        protected: list[float],
        policy: Policy,
        rng: Rng,
        attr: str | None = None,
        record: bool = False,
    ):
        self.matrix = matrix
        self.ids = ids
        self.protected = protected
        self.id_index = {i: n for n, i in enumerate(ids)}
        self.policy = policy
        self.rng = rng
        self.attr = attr
        self.t = len(ids)
        self.history: list[list[object]] | None = [] if record else None

    def current_beta(self) -> float:
        return self.matrix.entropy_report().beta

    def ingest(
        self, tup: StreamTuple, mixes: Sequence[tuple[int, float]] | None = None
    ) -> list[OutputEvent]:
        """Protect and release one tuple.

        ``mixes`` overrides the policy with explicit ``(partner_index, lam)``
        pairs; the RNG is then left untouched.
        """
        if tup.id in self.id_index:
            raise DuplicateId(f"duplicate id {tup.id!r}")
        value = _as_value(tup.value)
        r_old = self.matrix.r
        if mixes is not None:
            for k, _ in mixes:
                if not 0 <= k < r_old:
                    raise ShapeError(f"partner index {k} not among the {r_old} published individuals")
        new = r_old

        self.matrix.augment()
        ops: list[object] = ["augment"]
        self.ids.append(tup.id)
        self.protected.append(value)
        self.id_index[tup.id] = new

        if mixes is None:
            n = self.policy.draw_count(self.rng)
            plan = None
        else:
            n = len(mixes)
            plan = list(mixes)
        prot = self.protected
        touched: dict[int, None] = {}
        for s in range(n):
            if plan is None:
                lam = self.policy.draw_lambda(self.rng)
                k = self.rng.next_index(r_old)
            else:
                k, lam = plan[s]
            prot[new], prot[k] = t_transform_values(prot[new], prot[k], lam)
            t = TTransform(new, k, lam)
            self.matrix.apply_t(t)
            ops.append(t)
            touched[k] = None

        self.t += 1
        if self.history is not None:
            self.history.append(ops)
        beta = self.matrix.entropy_report().beta
        first = next(iter(touched), None)
        events = [
            OutputEvent(
                "release", self.t, tup.id, prot[new], beta,
                partner_id=None if first is None else self.ids[first], attr=self.attr,
            )
        ]
        for k in touched:
            events.append(OutputEvent("update", self.t, self.ids[k], prot[k], beta, partner_id=tup.id, attr=self.attr))
        return events

    def snapshot(self) -> Snapshot:
        return Snapshot(self.matrix.copy(), list(self.ids), list(self.protected), self.t)


def init_stream(
    seed_matrix: TransitionMatrix,
    seed_tuples: Sequence[StreamTuple],
    policy: Policy,
    rng: Rng,
    attr: str | None = None,
    record: bool = False,
) -> tuple[NumericStream, list[OutputEvent]]:
    """Publish the seed individuals, randomized jointly with ``seed_matrix``."""
    if len(seed_tuples) < 2:
        raise InsufficientSeed(f"need at least 2 seed tuples, got {len(seed_tuples)}")
    if seed_matrix.r != len(seed_tuples):
        raise ShapeError(f"seed matrix is {seed_matrix.r}x{seed_matrix.r} but {len(seed_tuples)} seed tuples given")
    seed_matrix.validate()
    ids = [tp.id for tp in seed_tuples]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DuplicateId(f"duplicate id {dup!r} in seed tuples")
    raw = [_as_value(tp.value) for tp in seed_tuples]
    matrix = seed_matrix.copy()
    protected = matrix.apply_to_numeric(raw)
    state = NumericStream(matrix, ids, protected, policy, rng, attr=attr, record=record)
    beta = state.current_beta()
    events = [
        OutputEvent("release", n + 1, i, protected[n], beta, attr=attr) for n, i in enumerate(ids)
    ]
    return state, events


def ingest(state: NumericStream, tup: StreamTuple) -> list[OutputEvent]:
    return state.ingest(tup)


def current_beta(state: NumericStream) -> float:
    return state.current_beta()


def snapshot(state: NumericStream) -> Snapshot:
    return state.snapshot()
