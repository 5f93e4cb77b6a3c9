"""Brute-force dense reference implementations.

Nothing here touches :mod:`bistream.matrix`; every quantity is recomputed
from plain numpy arrays so agreement with the sparse engine is evidence
rather than a tautology.  All routines are O(r**3) and meant for r <= 200.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import MalformedLog, NotBistochastic, ShapeError

SLACK = 1e-9


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def dense_multiply(a, b) -> np.ndarray:
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise ShapeError(f"size mismatch {a.shape} vs {b.shape}")
    return a @ b


def t_matrix(r: int, j: int, k: int, lam: float) -> np.ndarray:
    t = np.eye(r)
    t[j, j] = t[k, k] = lam
    t[j, k] = t[k, j] = 1.0 - lam
    return t


def augment_dense(a) -> np.ndarray:
    a = _square(a)
    r = a.shape[0]
    out = np.zeros((r + 1, r + 1))
    out[:r, :r] = a
    out[r, r] = 1.0
    return out


def check_bistochastic(a, tol: float = SLACK) -> None:
    a = _square(a)
    if (a < -tol).any():
        raise NotBistochastic("negative entry")
    if np.abs(a.sum(axis=0) - 1).max() > tol or np.abs(a.sum(axis=1) - 1).max() > tol:
        raise NotBistochastic("row or column sums differ from 1")


def brute_entropy_rate(a) -> float:
    """``-(1/r) * sum p log2 p`` over all positive entries."""
    a = _square(a)
    check_bistochastic(a)
    p = a[a > 0]
    return float(-(p * (np.log(p) / np.log(2.0))).sum() / a.shape[0])


def brute_beta(a) -> float:
    a = _square(a)
    r = a.shape[0]
    if r == 1:
        return 0.0
    return brute_entropy_rate(a) / (np.log(r) / np.log(2.0))


def verify_product_entropy_bounds(a, b, slack: float = SLACK) -> bool:
    """``max(H(A), H(B)) <= H(AB) <= H(A) + H(B)`` within ``slack``."""
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise ShapeError(f"size mismatch {a.shape} vs {b.shape}")
    ha, hb = brute_entropy_rate(a), brute_entropy_rate(b)
    hab = brute_entropy_rate(dense_multiply(a, b))
    return max(ha, hb) - slack <= hab <= ha + hb + slack


def random_pair(rng: np.random.Generator, r: int) -> tuple[int, int]:
    j = int(rng.integers(r))
    k = int(rng.integers(r - 1))
    return j, k + (k >= j)


def convergence_trail(
    r: int, steps: int, seed: int, lam: float | None = 0.5, threshold: float | None = None
) -> list[float]:
    """Beta after each of ``steps`` random T-transforms applied to the identity.

    ``lam=None`` draws each weight uniformly from (0, 1).  The run stops early
    once beta reaches ``threshold``.
    """
    if r < 2:
        raise ShapeError("need r >= 2")
    rng = np.random.default_rng(seed)
    p = np.eye(r)
    trail = []
    for _ in range(steps):
        j, k = random_pair(rng, r)
        w = lam
        while w is None or w == 0.0:
            w = float(rng.random())
        p = dense_multiply(p, t_matrix(r, j, k, w))
        trail.append(brute_beta(p))
        if threshold is not None and trail[-1] >= threshold:
            break
    return trail


def fold(seed, ops: Iterable) -> np.ndarray:
    """Replay matrix operations on a dense copy: ``"augment"`` or objects with ``j, k, lam``."""
    p = _square(seed).copy()
    for op in ops:
        if op == "augment":
            p = augment_dense(p)
        else:
            p = dense_multiply(p, t_matrix(p.shape[0], op.j, op.k, op.lam))
    return p


def latest_values(events) -> tuple[list[str], dict[str, float]]:
    """Release order and latest published value per id from an event sequence."""
    order: list[str] = []
    latest: dict[str, float] = {}
    for e in events:
        if e.kind == "release":
            if e.id in latest:
                raise MalformedLog(f"id {e.id!r} released twice")
            order.append(e.id)
        elif e.id not in latest:
            raise MalformedLog(f"update for unreleased id {e.id!r}")
        latest[e.id] = e.value
    return order, latest


def reconstruct_check(raw: Sequence[float], events, matrix, tol: float = SLACK) -> bool:
    """True iff ``matrix' @ raw`` equals the latest published value of each id."""
    p = _square(matrix)
    order, latest = latest_values(events)
    if len(order) != p.shape[0] or len(raw) != p.shape[0]:
        raise MalformedLog(f"{len(order)} releases and {len(raw)} raw values for a {p.shape[0]}x{p.shape[0]} matrix")
    expected = p.T @ np.asarray(raw, dtype=np.float64)
    got = np.array([latest[i] for i in order], dtype=np.float64)
    return bool(np.abs(expected - got).max() <= tol)
