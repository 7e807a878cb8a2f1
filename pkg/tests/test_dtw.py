import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsc.core import DataError, LineSeries
from lsc.dtw import (
    FastDtwSpec,
    cross_dtw,
    dtw_distance,
    dtw_exact,
    dtw_fast,
    dtw_fast_path,
    dtw_pair,
    pairwise_dtw,
    pairwise_dtw_array,
)

from oracles import brute_dtw, warping_paths

seqs = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=12)
small_int_seqs = st.lists(st.integers(0, 3), min_size=1, max_size=6)


def test_known_values():
    assert dtw_exact([0, 1, 2], [0, 2])[0] == 1.0
    d, path = dtw_exact([0], [5, 5, 5])
    assert d == 15.0
    assert path.pairs == ((1, 1), (1, 2), (1, 3))


def test_identity_path():
    d, path = dtw_exact([3, 1, 4, 1, 5], [3, 1, 4, 1, 5])
    assert d == 0.0
    assert path.pairs == tuple((i, i) for i in range(1, 6))


def test_path_enumeration_counts():
    # Delannoy numbers D(n-1, m-1)
    assert len(warping_paths(1, 1)) == 1
    assert len(warping_paths(2, 2)) == 3
    assert len(warping_paths(3, 3)) == 13
    assert len(warping_paths(4, 4)) == 63


@given(small_int_seqs, small_int_seqs)
def test_exact_equals_brute_force(s, t):
    assert dtw_exact(s, t)[0] == brute_dtw(s, t)


@given(seqs, seqs)
def test_symmetry_and_nonnegativity(s, t):
    a = dtw_distance(s, t)
    b = dtw_distance(t, s)
    assert a >= 0
    assert abs(a - b) <= 1e-12 * max(1.0, a)


@given(seqs, seqs)
def test_path_valid_and_cost_consistent(s, t):
    d, path = dtw_exact(s, t)
    assert path.is_valid(len(s), len(t))
    assert path.cost(s, t) == pytest.approx(d, abs=1e-9)
    assert dtw_distance(s, t) == pytest.approx(d, abs=1e-9)


@given(seqs)
def test_self_distance_zero(s):
    assert dtw_distance(s, s) == 0.0
    assert dtw_fast(s, s, FastDtwSpec(radius=0, min_size=2)) == 0.0


@settings(max_examples=200)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=64),
       st.lists(st.floats(-10, 10), min_size=1, max_size=64),
       st.integers(0, 3))
def test_fast_admissible(s, t, radius):
    exact = dtw_distance(s, t)
    fast, path = dtw_fast_path(s, t, FastDtwSpec(radius=radius))
    assert fast >= exact - 1e-9
    assert path.is_valid(len(s), len(t))
    assert path.cost(s, t) == pytest.approx(fast, abs=1e-9)


@given(seqs, seqs)
def test_fast_full_band_is_exact(s, t):
    r = max(len(s), len(t))
    assert dtw_fast(s, t, FastDtwSpec(radius=r)) == pytest.approx(dtw_distance(s, t), abs=1e-9)


def test_normalized_by_path_length():
    s, t = [0.0, 1.0, 2.0], [0.0, 2.0]
    d, path = dtw_exact(s, t)
    assert dtw_distance(s, t, normalize=True) == pytest.approx(d / len(path))


def test_empty_and_nonfinite_rejected():
    with pytest.raises(DataError):
        dtw_exact([], [1.0])
    with pytest.raises(DataError):
        dtw_distance([np.nan], [1.0])


def test_pair_modes():
    rng = np.random.default_rng(1)
    s, t = rng.normal(size=20), rng.normal(size=20)
    assert dtw_pair(s, t, "exact") == dtw_distance(s, t)
    assert dtw_pair(s, t, "fast") == dtw_fast(s, t)
    with pytest.raises(ValueError):
        dtw_pair(s, t, "sloppy")


def test_pairwise_identical_lines():
    lines = [LineSeries(0, [1.0, 2.0, 3.0]), LineSeries(1, [1.0, 2.0, 3.0])]
    np.testing.assert_array_equal(pairwise_dtw(lines), np.zeros((2, 2)))


def test_pairwise_rejects_ragged():
    with pytest.raises(DataError):
        pairwise_dtw([LineSeries(0, [0, 1, 2]), LineSeries(1, [0, 2])])


@pytest.mark.parametrize("mode", ["exact", "fast"])
def test_pairwise_matches_single_pairs(mode):
    X = np.random.default_rng(5).normal(size=(5, 9))
    D = pairwise_dtw_array(X, mode=mode)
    for i, j in itertools.product(range(5), repeat=2):
        assert D[i, j] == dtw_pair(X[i], X[j], mode)
    np.testing.assert_array_equal(D, D.T)
    np.testing.assert_array_equal(np.diag(D), 0.0)


def test_pairwise_independent_of_workers():
    X = np.random.default_rng(6).normal(size=(17, 16))
    base = pairwise_dtw_array(X, workers=1)
    for w in (2, 4):
        np.testing.assert_array_equal(pairwise_dtw_array(X, workers=w), base)


def test_cross_matches_pairs():
    rng = np.random.default_rng(7)
    X, C = rng.normal(size=(6, 8)), rng.normal(size=(3, 8))
    D = cross_dtw(X, C)
    for i, j in itertools.product(range(6), range(3)):
        assert D[i, j] == dtw_distance(X[i], C[j])
    with pytest.raises(DataError):
        cross_dtw(X, rng.normal(size=(2, 7)))


@pytest.mark.parametrize("bad", [dict(radius=-1), dict(min_size=1)])
def test_fast_spec_validation(bad):
    with pytest.raises(ValueError):
        FastDtwSpec(**bad)
