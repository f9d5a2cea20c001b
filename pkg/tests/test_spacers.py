from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenberg_cf.errors import GenerationFailed
from heisenberg_cf.spacers import deljunco_spacer, joint_distance, sample_windows


def naive_distance(idx, r, m, N, offsets) -> float:
    counts = Counter(tuple(int(idx[h + r + t]) for h in offsets) for t in range(N))
    cells = m ** len(offsets)
    seen = sum(abs(v / N - 1 / cells) for v in counts.values())
    return seen + (cells - len(counts)) / cells


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(5, 60), st.integers(2, 3), st.data())
def test_joint_distance_matches_naive(m, r, k, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10 ** 6)))
    idx = rng.integers(0, m, size=2 * r + 1)
    for N, offs in sample_windows(r, 0.1, k, 5, rng):
        assert joint_distance(idx, r, m, N, offs) == pytest.approx(naive_distance(idx, r, m, N, offs))


def test_periodic_map_is_far_from_uniform():
    r = 100
    idx = np.arange(2 * r + 1) % 4
    # consecutive pairs hit only 4 of 16 cells
    assert joint_distance(idx, r, 4, 80, (-r, -r + 1)) == pytest.approx(1.5)


@settings(max_examples=20, deadline=None)
@given(st.integers(10, 500), st.floats(0.05, 0.9), st.integers(2, 4))
def test_windows_respect_bounds(r, delta, k):
    for N, offs in sample_windows(r, delta, k, 20, np.random.default_rng(0)):
        assert N > delta * r
        assert len(set(offs)) == k
        assert all(h >= -r and h + N <= r for h in offs)


def test_certified_and_deterministic():
    D = ["w", "x", "y", "z"]
    res = deljunco_spacer(D, 10_000, 0.1, 0.1, order_k=2, seed=4)
    assert res.worst_distance < 0.1
    again = deljunco_spacer(D, 10_000, 0.1, 0.1, order_k=2, seed=4)
    assert np.array_equal(res.indices, again.indices)
    assert 0 <= res(-10_000) < 4 and 0 <= res(10_000) < 4
    with pytest.raises(IndexError):
        res(10_001)
    rep = res.report()
    assert rep["windows"] == 64 and rep["min_window_length"] > 1000
    # the certificate is reproducible from the recorded battery
    worst = max(joint_distance(res.indices, res.r, 4, N, offs) for N, offs in res.windows)
    assert worst == res.worst_distance


def test_third_order_mode():
    res = deljunco_spacer(range(4), 10_000, 0.2, 0.1, order_k=3, seed=0)
    assert res.order_k == 3 and res.worst_distance < 0.2


def test_generation_failure_and_bad_input():
    with pytest.raises(GenerationFailed) as err:
        deljunco_spacer(range(4), 10, 1e-6, 0.1, retries=5)
    assert err.value.exit_code == 3
    assert err.value.details["worst_distance"] > 0
    assert deljunco_spacer([0], 50, 0.01, 0.1).worst_distance == 0
    with pytest.raises(ValueError):
        deljunco_spacer([], 10, 0.1, 0.1)
    with pytest.raises(ValueError):
        deljunco_spacer(range(2), 10, 0.1, 1.5)
