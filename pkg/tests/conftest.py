import math
import random

import numpy as np
import pytest

from bistream.matrix import TTransform, compose_t_transforms, from_dense

SEED_2X2 = [[0.8, 0.2], [0.2, 0.8]]
# binary entropy of 0.8, in bits
H_SEED = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))


def random_schedule(rnd: random.Random, r: int, n: int, lam=None):
    out = []
    for _ in range(n):
        j, k = rnd.sample(range(r), 2)
        out.append(TTransform(j, k, rnd.random() if lam is None else lam))
    return out


def random_bistochastic(rnd: random.Random, r: int, n: int | None = None):
    return compose_t_transforms(r, random_schedule(rnd, r, n if n is not None else 3 * r))


@pytest.fixture
def seed_matrix():
    return from_dense(SEED_2X2)


@pytest.fixture
def rnd():
    return random.Random(20240611)


def brute_neg_entropy(m) -> float:
    a = m.to_dense()
    p = a[a > 0]
    return float(-(p * np.log2(p)).sum())
