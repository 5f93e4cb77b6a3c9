import math
import random

import numpy as np
import pytest

from bistream import oracle
from bistream.errors import MalformedLog, NotBistochastic, ShapeError
from bistream.events import OutputEvent
from bistream.matrix import TTransform

from conftest import SEED_2X2, random_bistochastic


def test_dense_multiply():
    rnd = random.Random(0)
    a = random_bistochastic(rnd, 5).to_dense()
    b = random_bistochastic(rnd, 5).to_dense()
    assert np.allclose(oracle.dense_multiply(a, np.eye(5)), a)
    half = oracle.t_matrix(2, 0, 1, 0.5)
    assert np.array_equal(oracle.dense_multiply(half, half), np.full((2, 2), 0.5))
    ab = oracle.dense_multiply(a, b)
    assert np.abs(ab.sum(axis=0) - 1).max() <= 1e-12 and np.abs(ab.sum(axis=1) - 1).max() <= 1e-12
    with pytest.raises(ShapeError):
        oracle.dense_multiply(a, np.eye(4))


def test_brute_entropy_rate():
    assert oracle.brute_entropy_rate(SEED_2X2) == pytest.approx(0.7219, abs=1e-4)
    assert oracle.brute_entropy_rate(np.eye(4)) == 0.0
    assert oracle.brute_entropy_rate(np.full((5, 5), 0.2)) == pytest.approx(math.log2(5))
    with pytest.raises(NotBistochastic):
        oracle.brute_entropy_rate([[0.7, 0.3], [0.4, 0.6]])


def test_product_bounds_trivial_cases():
    i3 = np.eye(3)
    assert oracle.verify_product_entropy_bounds(i3, i3)
    star = np.full((3, 3), 1 / 3)
    b = random_bistochastic(random.Random(1), 3).to_dense()
    assert oracle.verify_product_entropy_bounds(star, b)
    assert oracle.brute_entropy_rate(star @ b) == pytest.approx(math.log2(3))


def test_convergence_trail_small():
    assert oracle.convergence_trail(2, 1, seed=0) == [pytest.approx(1.0)]


def test_half_weight_converges_faster_than_random():
    def steps_to(threshold, seed, lam):
        trail = oracle.convergence_trail(8, 5000, seed, lam=lam, threshold=threshold)
        return len(trail) if trail[-1] >= threshold else 10**9

    half = sorted(steps_to(0.99, s, 0.5) for s in range(50))
    rand = sorted(steps_to(0.99, s, None) for s in range(50))
    assert half[25] < rand[25]


def test_reconstruct_check():
    p = oracle.fold(SEED_2X2, ["augment", TTransform(2, 0, 0.5)])
    events = [
        OutputEvent("release", 1, "a", 12.0, 0.72),
        OutputEvent("release", 2, "b", 18.0, 0.72),
        OutputEvent("release", 3, "c", 21.0, 0.72, "a"),
        OutputEvent("update", 3, "a", 21.0, 0.72, "c"),
    ]
    assert oracle.reconstruct_check([10, 20, 30], events, p)
    events[3] = OutputEvent("update", 3, "a", 21.5, 0.72, "c")
    assert not oracle.reconstruct_check([10, 20, 30], events, p)
    assert oracle.reconstruct_check([1, 2, 3], [OutputEvent("release", n + 1, str(n), n + 1.0, 0) for n in range(3)], np.eye(3))


def test_reconstruct_check_malformed():
    with pytest.raises(MalformedLog):
        oracle.reconstruct_check([1], [OutputEvent("update", 1, "x", 1.0, 0)], np.eye(1))
    with pytest.raises(MalformedLog):
        oracle.reconstruct_check([1, 2], [OutputEvent("release", 1, "x", 1.0, 0)] * 2, np.eye(2))


@pytest.mark.parametrize("setting", ["i", "ii", "iii"])
def test_engine_agrees_with_oracle(setting):
    from bistream.matrix import from_dense
    from bistream.rng import Rng
    from bistream.stream import SETTINGS, StreamTuple, init_stream

    rnd = random.Random(setting)
    raw = [rnd.uniform(0, 100) for _ in range(60)]
    state, events = init_stream(from_dense(SEED_2X2), [StreamTuple("0", raw[0]), StreamTuple("1", raw[1])],
                                SETTINGS[setting], Rng(1), record=True)
    for n in range(2, len(raw)):
        events += state.ingest(StreamTuple(str(n), raw[n]))
        dense = state.matrix.to_dense()
        assert state.matrix.entropy_report().h == pytest.approx(oracle.brute_entropy_rate(dense), abs=1e-9)
    assert oracle.reconstruct_check(raw, events, state.matrix.to_dense())
    # augment then right-multiply, replayed densely
    folded = oracle.fold(SEED_2X2, [op for ops in state.history for op in ops])
    assert np.abs(folded - state.matrix.to_dense()).max() <= 1e-12
    left = np.asarray(SEED_2X2)
    for ops in state.history:
        for op in ops:
            left = oracle.augment_dense(left) if op == "augment" else oracle.t_matrix(left.shape[0], op.j, op.k, op.lam) @ left
    assert np.abs(left - folded).max() > 1e-6
