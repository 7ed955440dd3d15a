import math

import numpy as np
import pytest

# Closed forms, frozen
PI_M14 = 0.7511255444649425  # pi^(-1/4)
PI_M1 = 0.3183098861837907  # pi^(-1)
PI_M2 = 0.10132118364233778  # pi^(-2)


def dense_annihilator(n_max):
    """Independent oracle: a = sum_N sqrt(N) |N-1><N|."""
    d = n_max + 1
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def dense_lift(single, position, n_max):
    d = n_max + 1
    mats = [np.eye(d, dtype=complex)] * 4
    mats = list(mats)
    mats[position] = single
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def interior_selector(n_max, margin):
    d = n_max + 1
    keep = np.arange(d) <= n_max - margin
    full = keep
    for _ in range(3):
        full = np.logical_and.outer(full, keep).reshape(-1)
    return np.flatnonzero(full)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
