"""Sparse bistochastic matrices with an incrementally maintained entropy ledger.

A :class:`TransitionMatrix` ``P`` is stored column by column: ``cols[v]`` maps
each source index ``u`` to ``p_uv = Pr(Y = v | X = u)``.  Column ``v`` of ``P``
is therefore the recipe of protected value ``y_v = sum_u p_uv x_u``, and a
T-transform on individuals ``j`` and ``k`` only touches ``cols[j]`` and
``cols[k]``.

The ledger keeps ``-sum p log2 p`` over all stored entries so the entropy
rate ``H(P) = ledger / r`` and the privacy level ``beta = H(P) / log2 r`` are
O(1) queries.
"""
from __future__ import annotations

import math
import sys
from bisect import bisect_right
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import (
    InvalidDimension,
    InvalidLambda,
    InvalidTransform,
    MatrixIndexError,
    NotBistochastic,
    ParseError,
    ShapeError,
)

if TYPE_CHECKING:
    from .rng import Rng

__all__ = [
    "DUST",
    "RECOMPUTE_EVERY",
    "EntropyReport",
    "TTransform",
    "TransitionMatrix",
    "compose_t_transforms",
    "format_dense_text",
    "from_dense",
    "identity",
    "parse_dense_text",
    "perfect_matrix",
]

# entries below this after mixing are dropped and the column renormalized
DUST = 1e-15
# full ledger recomputation period, in apply_t calls
RECOMPUTE_EVERY = 10_000

_log2 = math.log2


@dataclass(frozen=True)
class TTransform:
    """Mix individuals ``j`` and ``k``: ``T = lam * I + (1 - lam) * Q``.

    ``Q`` is the transposition of ``j`` and ``k``; ``lam`` is the share each
    individual keeps of its own value.
    """

    j: int
    k: int
    lam: float

    def __post_init__(self):
        if self.j == self.k:
            raise InvalidTransform(f"T-transform needs two distinct indices, got j = k = {self.j}")
        if self.j < 0 or self.k < 0:
            raise MatrixIndexError(f"negative index in T-transform ({self.j}, {self.k})")
        if not (0.0 <= self.lam < 1.0):
            raise InvalidLambda(f"lambda must lie in [0, 1), got {self.lam!r}")


@dataclass(frozen=True)
class EntropyReport:
    h: float
    h_max: float
    beta: float


def _column_entropy(col: dict[int, float]) -> float:
    h = 0.0
    for p in col.values():
        h -= p * _log2(p)
    return h


class TransitionMatrix:
    """Square bistochastic matrix of growing size.

    Mutating methods (:meth:`augment`, :meth:`apply_t`) work in place.  Use
    :meth:`copy` to keep an earlier state around.
    """

    __slots__ = ("cols", "neg_entropy_sum", "_col_h", "_ops_since_recompute", "_row_cache")

    def __init__(self, cols: list[dict[int, float]]):
        if not cols:
            raise InvalidDimension("matrix dimension must be at least 1")
        self.cols = cols
        # -sum p log2 p over every stored entry (a non-negative number of bits)
        self.neg_entropy_sum = 0.0
        self._col_h: list[float] = []
        self._ops_since_recompute = 0
        self._row_cache: dict[int, tuple[list[int], list[float]]] = {}
        self.recompute_ledger()

    @property
    def r(self) -> int:
        return len(self.cols)

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def __repr__(self) -> str:
        return f"TransitionMatrix(r={self.r}, nnz={self.nnz}, beta={self.entropy_report().beta:.6f})"

    def copy(self) -> TransitionMatrix:
        new = TransitionMatrix.__new__(TransitionMatrix)
        new.cols = [dict(c) for c in self.cols]
        new.neg_entropy_sum = self.neg_entropy_sum
        new._col_h = list(self._col_h)
        new._ops_since_recompute = self._ops_since_recompute
        new._row_cache = {}
        return new

    # -- ledger ---------------------------------------------------------

    def recompute_ledger(self) -> float:
        """Rebuild the ledger from the sparse store; returns the new value."""
        self._col_h = [_column_entropy(c) for c in self.cols]
        self.neg_entropy_sum = math.fsum(-p * _log2(p) for c in self.cols for p in c.values())
        self._ops_since_recompute = 0
        return self.neg_entropy_sum

    def entropy_report(self) -> EntropyReport:
        r = self.r
        h = self.neg_entropy_sum / r
        if r == 1:
            return EntropyReport(h=h, h_max=0.0, beta=0.0)
        h_max = _log2(r)
        beta = min(1.0, max(0.0, h / h_max))
        return EntropyReport(h=h, h_max=h_max, beta=beta)

    # -- mutation -------------------------------------------------------

    def augment(self) -> None:
        """Append a new individual that has not been mixed with anyone yet."""
        r = self.r
        self.cols.append({r: 1.0})
        self._col_h.append(0.0)
        self._row_cache.clear()

    def apply_t(self, t: TTransform) -> None:
        """Right-multiply by the T-transform: ``P <- P @ T``.

        Columns ``j`` and ``k`` become ``lam*col_j + (1-lam)*col_k`` and
        ``lam*col_k + (1-lam)*col_j``.  Cost is linear in their joint support.
        """
        r = self.r
        j, k, lam = t.j, t.k, t.lam
        if j >= r or k >= r:
            raise MatrixIndexError(f"T-transform ({j}, {k}) out of range for r = {r}")
        mu = 1.0 - lam
        cj = self.cols[j]
        ck = self.cols[k]
        nj: dict[int, float] = {}
        nk: dict[int, float] = {}
        hj = hk = 0.0
        dust = False
        for u, a in cj.items():
            b = ck.get(u, 0.0)
            x = lam * a + mu * b
            y = lam * b + mu * a
            if x >= DUST:
                nj[u] = x
                hj -= x * _log2(x)
            elif x > 0.0:
                dust = True
            if y >= DUST:
                nk[u] = y
                hk -= y * _log2(y)
            elif y > 0.0:
                dust = True
        for u, b in ck.items():
            if u in cj:
                continue
            x = mu * b
            y = lam * b
            if x >= DUST:
                nj[u] = x
                hj -= x * _log2(x)
            elif x > 0.0:
                dust = True
            if y >= DUST:
                nk[u] = y
                hk -= y * _log2(y)
            elif y > 0.0:
                dust = True
        if dust:
            for col in (nj, nk):
                s = math.fsum(col.values())
                for u in col:
                    col[u] /= s
            hj = _column_entropy(nj)
            hk = _column_entropy(nk)
        self.neg_entropy_sum += (hj + hk) - (self._col_h[j] + self._col_h[k])
        self.cols[j] = nj
        self.cols[k] = nk
        self._col_h[j] = hj
        self._col_h[k] = hk
        self._row_cache.clear()
        self._ops_since_recompute += 1
        if self._ops_since_recompute >= RECOMPUTE_EVERY:
            self.recompute_ledger()

    # -- queries --------------------------------------------------------

    def apply_to_numeric(self, x: Sequence[float]) -> list[float]:
        """Protected values ``y = P' x``."""
        if len(x) != self.r:
            raise ShapeError(f"vector of length {len(x)} does not match r = {self.r}")
        return [math.fsum(p * x[u] for u, p in col.items()) for col in self.cols]

    def row(self, u: int) -> dict[int, float]:
        """Nonzero entries ``{v: p_uv}`` of row ``u`` (output distribution of source ``u``)."""
        if not 0 <= u < self.r:
            raise MatrixIndexError(f"row {u} out of range for r = {self.r}")
        return {v: col[u] for v, col in enumerate(self.cols) if u in col}

    def sample_category(self, u: int, rng: Rng) -> int:
        """Draw ``v`` with probability ``p_uv`` by inverse CDF over row ``u``."""
        cached = self._row_cache.get(u)
        if cached is None:
            row = self.row(u)
            outs = sorted(row)
            cdf: list[float] = []
            acc = 0.0
            for v in outs:
                acc += row[v]
                cdf.append(acc)
            cached = self._row_cache[u] = (outs, cdf)
        outs, cdf = cached
        x = rng.next_unit() * cdf[-1]
        i = bisect_right(cdf, x)
        return outs[min(i, len(outs) - 1)]

    def transpose(self) -> TransitionMatrix:
        rows: list[dict[int, float]] = [{} for _ in range(self.r)]
        for v, col in enumerate(self.cols):
            for u, p in col.items():
                rows[u][v] = p
        return TransitionMatrix(rows)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.r, self.r))
        for v, col in enumerate(self.cols):
            for u, p in col.items():
                a[u, v] = p
        return a

    def sum_errors(self) -> tuple[float, int, float, int]:
        """Worst column and row sum deviations from 1: ``(col_err, col, row_err, row)``."""
        row_sums = [0.0] * self.r
        col_err, worst_col = 0.0, 0
        for v, col in enumerate(self.cols):
            err = abs(math.fsum(col.values()) - 1.0)
            if err > col_err:
                col_err, worst_col = err, v
            for u, p in col.items():
                row_sums[u] += p
        row_err, worst_row = 0.0, 0
        for u, s in enumerate(row_sums):
            if abs(s - 1.0) > row_err:
                row_err, worst_row = abs(s - 1.0), u
        return col_err, worst_col, row_err, worst_row

    def validate(self, tol: float = 1e-9) -> None:
        """Raise :class:`NotBistochastic` unless every invariant holds within ``tol``."""
        for v, col in enumerate(self.cols):
            for u, p in col.items():
                if not (0.0 < p <= 1.0 + tol) or not 0 <= u < self.r:
                    raise NotBistochastic(f"entry ({u}, {v}) = {p!r} outside (0, 1]")
        col_err, c, row_err, rw = self.sum_errors()
        if col_err > tol or row_err > tol:
            raise NotBistochastic(
                f"worst column {c} off by {col_err:.3g}, worst row {rw} off by {row_err:.3g}"
            )
        fresh = math.fsum(-p * _log2(p) for col in self.cols for p in col.values())
        if abs(fresh - self.neg_entropy_sum) > tol:
            raise NotBistochastic(
                f"entropy ledger drifted: stored {self.neg_entropy_sum!r}, recomputed {fresh!r}"
            )

    def is_valid(self, tol: float = 1e-9) -> bool:
        try:
            self.validate(tol)
        except NotBistochastic:
            return False
        return True

    def memory_bytes(self) -> int:
        """Rough size of the sparse store (dict tables plus boxed floats)."""
        return (
            sys.getsizeof(self.cols)
            + sum(sys.getsizeof(c) for c in self.cols)
            + 24 * self.nnz
            + sys.getsizeof(self._col_h)
        )


def identity(r: int) -> TransitionMatrix:
    if r < 1:
        raise InvalidDimension(f"matrix dimension must be at least 1, got {r}")
    return TransitionMatrix([{v: 1.0} for v in range(r)])


def perfect_matrix(r: int) -> TransitionMatrix:
    """All entries ``1/r``: perfect secrecy, ``beta = 1``."""
    if r < 1:
        raise InvalidDimension(f"matrix dimension must be at least 1, got {r}")
    p = 1.0 / r
    return TransitionMatrix([dict.fromkeys(range(r), p) for _ in range(r)])


def from_dense(entries, tol: float = 1e-9) -> TransitionMatrix:
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    r = a.shape[0]
    if r == 0:
        raise InvalidDimension("matrix dimension must be at least 1")
    if not np.all(np.isfinite(a)):
        raise NotBistochastic("matrix has non-finite entries")
    if a.min() < -tol:
        u, v = np.unravel_index(np.argmin(a), a.shape)
        raise NotBistochastic(f"negative entry ({u}, {v}) = {a[u, v]!r}")
    col_dev = np.abs(a.sum(axis=0) - 1.0)
    row_dev = np.abs(a.sum(axis=1) - 1.0)
    if col_dev.max() > tol or row_dev.max() > tol:
        c, rw = int(col_dev.argmax()), int(row_dev.argmax())
        raise NotBistochastic(
            f"worst column {c} sums to {a[:, c].sum():.12g}, "
            f"worst row {rw} sums to {a[rw].sum():.12g}"
        )
    cols = []
    for v in range(r):
        nz = np.nonzero(a[:, v] > tol)[0]
        cols.append({int(u): float(a[u, v]) for u in nz})
    return TransitionMatrix(cols)


def compose_t_transforms(r: int, schedule: Iterable[TTransform]) -> TransitionMatrix:
    m = identity(r)
    for t in schedule:
        m.apply_t(t)
    return m


def parse_dense_text(text: str) -> np.ndarray:
    """Read the dense text format: one row per line, space-separated floats, ``#`` comments."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ParseError(f"bad matrix entry: {exc}", lineno) from None
    if not rows:
        raise ShapeError("matrix text holds no rows")
    if any(len(row) != len(rows[0]) for row in rows):
        raise ShapeError("matrix rows have unequal lengths")
    return np.array(rows, dtype=float)


def format_dense_text(a) -> str:
    a = np.asarray(a, dtype=float)
    return "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in a)
