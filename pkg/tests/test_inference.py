import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvperf.data import from_arrays
from mvperf.errors import DimensionMismatch
from mvperf.inference import (
    all_tuples,
    flip,
    joint_score,
    point_scores,
    predict,
    predict_bruteforce,
    predict_from_scores,
    predict_top,
    psi,
    view_score,
)
from mvperf.synthetic import random_instance


def test_psi_examples():
    ds = from_arrays([[[1, 0], [0, 1]]], [1, -1])
    assert psi(ds, 0, [1, -1]).tolist() == [1.0, -1.0]
    assert psi(ds, 0, [1, 1]).tolist() == [1.0, 1.0]


def test_psi_antisymmetric(rng):
    ds, _ = random_instance(rng, 9, 2)
    y = ds.labels
    np.testing.assert_array_equal(psi(ds, 1, y), -psi(ds, 1, flip(y)))


def test_view_score_examples():
    ds = from_arrays([[[1, 0], [0, 1]]], [1, -1])
    assert view_score(ds, 0, [0, 0], [1, 1]) == 0.0
    assert view_score(ds, 0, [1, 1], [1, -1]) == 0.0


def test_point_scores_example():
    ds = from_arrays([[[2, 5], [0, 3]]], [1, -1])
    assert point_scores(ds, [[1, 0]]).tolist() == [2.0, 0.0]
    assert point_scores(ds, [[0, 0]]).tolist() == [0.0, 0.0]


def test_sign_rule():
    assert predict_from_scores([2, -1, 0]).tolist() == [1, -1, 1]


def test_zero_weights_predict_all_positive(tiny):
    assert predict(tiny, [np.zeros(2), np.zeros(1)]).tolist() == [1, 1, 1, 1]


def test_weight_shape_checked(tiny):
    with pytest.raises(DimensionMismatch):
        predict(tiny, [np.zeros(2)])
    with pytest.raises(DimensionMismatch):
        predict(tiny, [np.zeros(2), np.zeros(3)])


def test_predict_top_ties_by_index():
    assert predict_top([1.0, 3.0, 1.0, 0.0], 2).tolist() == [1, 1, -1, -1]
    assert predict_top([0.0, 0.0, 0.0], 0).tolist() == [-1, -1, -1]


def test_all_tuples():
    Y = all_tuples(3)
    assert Y.shape == (8, 3)
    assert len({tuple(r) for r in Y.tolist()}) == 8


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.integers(1, 3))
def test_joint_score_decomposes(seed, n, m):
    rng = np.random.default_rng(seed)
    ds, W = random_instance(rng, n, m)
    y = rng.choice([1, -1], size=n)
    s = point_scores(ds, W)
    total = sum(view_score(ds, j, W[j], y) for j in range(m))
    assert float(y @ s) == pytest.approx(total, abs=1e-12)
    assert joint_score(ds, W, y) == pytest.approx(total, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_sign_rule_is_argmax(seed, n):
    rng = np.random.default_rng(seed)
    ds, W = random_instance(rng, n, 2)
    y = predict(ds, W)
    _, best = predict_bruteforce(ds, W)
    assert joint_score(ds, W, y) == pytest.approx(best, abs=1e-12)
