import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from soclens.measures import (
    PairMetrics,
    cond_expectation,
    cov,
    dep,
    expectation,
    pair_metrics,
    significant,
    window_matrices,
    window_weights,
)
from soclens.trace import BinTrace, ImpliedKind, implied


def test_window_weights_sin_squared():
    w = window_weights(0, 5, 2)
    assert w.weights.tolist() == pytest.approx([0, 0.5, 1.0, 0.5, 0], abs=1e-15)
    assert w.weight_sum == pytest.approx(2.0, abs=1e-15)


def test_window_weights_rectangular():
    w = window_weights(0, 5, 0)
    assert w.weights.tolist() == [1.0] * 5
    assert w.weight_sum == 5


def test_window_weights_shift_invariant():
    a, b = window_weights(0, 5, 2), window_weights(10, 15, 2)
    assert np.array_equal(a.weights, b.weights)
    assert (b.u, b.v) == (10, 15)


@pytest.mark.parametrize("u, v, alpha", [(0, 2, 2), (3, 3, 1), (0, 10, -1)])
def test_window_weights_errors(u, v, alpha):
    with pytest.raises(ValueError):
        window_weights(u, v, alpha)


@pytest.mark.parametrize("n", [3, 4, 5, 64, 511, 512])
@pytest.mark.parametrize("alpha", [0, 0.5, 1, 2, 4])
def test_window_symmetry_and_peak(n, alpha):
    w = window_weights(0, n, alpha).weights
    assert np.allclose(w, w[::-1], atol=1e-12, rtol=0)
    assert w.max() == w[(n - 1) // 2]
    ref = oracle.weights(n, alpha)
    assert np.allclose(w, ref, atol=1e-12, rtol=0)


def test_expectation_examples():
    win = window_weights(0, 5, 2)
    assert expectation(BinTrace([1] * 5), win) == pytest.approx(1.0)
    assert expectation(BinTrace([0] * 5), win) == 0.0
    assert expectation(BinTrace([1, 0, 1, 0, 1]), win) == pytest.approx(0.5, abs=1e-12)


def test_expectation_shift_reads_zero_outside():
    win = window_weights(0, 3, 0)
    assert expectation(BinTrace([1, 1, 1]), win, delta=2) == pytest.approx(1 / 3)


def test_cond_expectation():
    assert cond_expectation(0.4, 0.4) == 1.0
    assert cond_expectation(0.0, 0.0) is None
    assert cond_expectation(0.3, 0.6) == pytest.approx(0.5)


def test_dep_examples():
    assert dep(0.5, 0.4, 0.2) == pytest.approx(0.0, abs=1e-15)
    assert dep(0.5, 0.5, 0.5) == pytest.approx(0.5)
    assert dep(0.5, 0.5, 0.0) == 0.0
    assert dep(0.0, 0.0, 0.0) == 0.0


def test_cov_examples():
    assert cov(0.5, 0.5, 0.5) == pytest.approx(1.0)
    assert cov(0.5, 0.4, 0.2) == pytest.approx(0.0, abs=1e-15)
    assert cov(0.5, 0.5, 0.0) == 0.0


def test_significant_examples():
    m = lambda d, c: PairMetrics(0.5, 0.5, 0.25, d, c, 0.5)
    assert significant(m(0.5, 0.3))
    assert not significant(m(0.5, 0.0))
    assert not significant(m(0.04, 0.2), eps_dep=0.05)
    with pytest.raises(ValueError):
        significant(m(0.5, 0.5), eps_dep=-1)


def test_pair_metrics_self_pair(rng):
    for _ in range(20):
        f = BinTrace(rng.integers(0, 2, 200))
        win = window_weights(20, 180, 2)
        m = pair_metrics(f, f, win, 0)
        assert m.ex_xy == pytest.approx(m.ex_x, abs=1e-12)
        if m.ex_x > 0:
            assert m.dep == pytest.approx(1 - m.ex_x, abs=1e-12)


def test_pair_metrics_zero_partner():
    x = BinTrace([1, 0, 1, 1, 0, 1])
    m = pair_metrics(x, BinTrace([0] * 6), window_weights(0, 6, 2), 0)
    assert (m.dep, m.cov, m.cond_ex) == (0.0, 0.0, None)


def test_pair_metrics_delayed_copy(rng):
    base = rng.integers(0, 2, 300)
    delayed = np.concatenate([np.zeros(5, dtype=int), base[:-5]])
    x, y = BinTrace(base), BinTrace(delayed)
    m = pair_metrics(x, y, window_weights(50, 250, 2), 5)
    assert m.ex_xy == pytest.approx(m.ex_x, abs=1e-12)
    assert m.dep == pytest.approx(1 - m.ex_x, abs=1e-12)
    assert m.cov == pytest.approx(4 * m.ex_x * (1 - m.ex_x), abs=1e-12)


traces = st.lists(st.integers(0, 1), min_size=8, max_size=64)


@st.composite
def pair_case(draw):
    x = draw(traces)
    y = draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
    u = draw(st.integers(0, len(x) - 3))
    v = draw(st.integers(u + 3, len(x)))
    alpha = draw(st.sampled_from([0, 1, 2, 4]))
    delta = draw(st.integers(-8, 8))
    return x, y, u, v, alpha, delta


@given(pair_case())
@settings(max_examples=300)
def test_matches_oracle(case):
    x, y, u, v, alpha, delta = case
    m = pair_metrics(BinTrace(x), BinTrace(y), window_weights(u, v, alpha), delta)
    ref = oracle.pair(x, y, u, v, alpha, delta)
    for key in ("ex_x", "ex_y", "ex_xy", "dep", "cov"):
        assert getattr(m, key) == pytest.approx(ref[key], abs=1e-9), key
    if ref["cond_ex"] is None:
        assert m.cond_ex is None
    else:
        assert m.cond_ex == pytest.approx(ref["cond_ex"], abs=1e-9)


@given(pair_case())
@settings(max_examples=200)
def test_codomain_and_raw_cov_bound(case):
    x, y, u, v, alpha, delta = case
    m = pair_metrics(BinTrace(x), BinTrace(y), window_weights(u, v, alpha), delta)
    for value in (m.ex_x, m.ex_y, m.ex_xy, m.dep, m.cov):
        assert 0.0 <= value <= 1.0
    assert m.ex_xy <= min(m.ex_x, m.ex_y) + 1e-15
    raw = oracle.pair(x, y, u, v, alpha, delta)["raw_cov"]
    assert -0.25 <= raw <= 0.25


@given(pair_case())
def test_symmetric_at_zero_shift(case):
    x, y, u, v, alpha, _ = case
    win = window_weights(u, v, alpha)
    a = pair_metrics(BinTrace(x), BinTrace(y), win, 0)
    b = pair_metrics(BinTrace(y), BinTrace(x), win, 0)
    assert a.dep == b.dep
    assert a.cov == b.cov


@given(pair_case())
def test_shift_duality(case):
    x, y, u, v, alpha, delta = case
    n = len(x)
    if not (0 <= u + delta and v + delta <= n):
        return
    a = pair_metrics(BinTrace(x), BinTrace(y), window_weights(u, v, alpha), delta)
    b = pair_metrics(BinTrace(y), BinTrace(x), window_weights(u + delta, v + delta, alpha), -delta)
    assert a.ex_xy == pytest.approx(b.ex_xy, abs=1e-12)


@given(pair_case())
def test_reflection_identity(case):
    x, _, u, v, alpha, delta = case
    win = window_weights(u, v, alpha)
    f = BinTrace(x)
    total = expectation(f, win) + expectation(implied(f, ImpliedKind.REFLECT), win)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_window_matrices_match_scalar_path(rng):
    levels = rng.integers(0, 2, size=(3, 120), dtype=np.uint8)
    kinds = list(ImpliedKind)
    win = window_weights(30, 90, 2)
    deltas = list(range(-6, 7))
    mats = window_matrices(levels, win, deltas, kinds)
    for i in range(12):
        for j in range(12):
            x = implied(BinTrace(levels[i // 4]), kinds[i % 4])
            y = implied(BinTrace(levels[j // 4]), kinds[j % 4])
            for d, delta in enumerate(deltas):
                m = pair_metrics(x, y, win, delta)
                assert mats.ex_xy[d, i, j] == pytest.approx(m.ex_xy, abs=1e-12)
                assert mats.dep[d, i, j] == pytest.approx(m.dep, abs=1e-12)
                assert mats.cov[d, i, j] == pytest.approx(m.cov, abs=1e-12)
                ce = mats.cond_ex(d, i, j)
                assert (ce is None) == (m.cond_ex is None)
