"""Joint feature map, per-view discriminants and the multivariate prediction."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import MultiViewDataset
from .errors import DataError, DimensionMismatch


def as_label_tuple(y, n: int | None = None) -> np.ndarray:
    """Return ``y`` as an int8 array over {+1, -1}, checking its length."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DimensionMismatch("a label tuple must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"label tuple has length {arr.shape[0]}, expected {n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise DataError("label tuple entries must be +1 or -1")
    return arr.astype(np.int8)


def flip(y) -> np.ndarray:
    return (-np.asarray(y)).astype(np.int8)


def check_weights(ds: MultiViewDataset, weights: Sequence) -> list[np.ndarray]:
    if len(weights) != ds.m:
        raise DimensionMismatch(f"got {len(weights)} weight vectors for {ds.m} views")
    out = []
    for j, (w, d) in enumerate(zip(weights, ds.dims)):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (d,):
            raise DimensionMismatch(f"view {j + 1}: weight shape {w.shape}, expected ({d},)")
        out.append(w)
    return out


def psi(ds: MultiViewDataset, j: int, y) -> np.ndarray:
    """Joint feature map of view ``j``: sum_i y_i x_i^j."""
    y = as_label_tuple(y, ds.n)
    return np.asarray(ds.views[j].T @ y.astype(np.float64)).ravel()


def view_score(ds: MultiViewDataset, j: int, w_j, y) -> float:
    """Discriminant of view ``j`` for tuple ``y``: w_j . psi(y)."""
    w_j = np.asarray(w_j, dtype=np.float64)
    if w_j.shape != (ds.dims[j],):
        raise DimensionMismatch(f"view {j + 1}: weight shape {w_j.shape}, expected ({ds.dims[j]},)")
    return float(w_j @ psi(ds, j, y))


def view_point_scores(ds: MultiViewDataset, j: int, w_j) -> np.ndarray:
    return np.asarray(ds.views[j] @ np.asarray(w_j, dtype=np.float64)).ravel()


def point_scores(ds: MultiViewDataset, weights: Sequence) -> np.ndarray:
    """s_i = sum_j w_j . x_i^j."""
    weights = check_weights(ds, weights)
    s = np.zeros(ds.n)
    for j, w in enumerate(weights):
        s += view_point_scores(ds, j, w)
    return s


def joint_score(ds: MultiViewDataset, weights: Sequence, y) -> float:
    """sum_j w_j . psi(x^j, y), the quantity the prediction maximizes."""
    weights = check_weights(ds, weights)
    return float(sum(view_score(ds, j, w, y) for j, w in enumerate(weights)))


def predict_from_scores(scores) -> np.ndarray:
    return np.where(np.asarray(scores) >= 0, 1, -1).astype(np.int8)


def predict(ds: MultiViewDataset, weights: Sequence) -> np.ndarray:
    """Multivariate prediction; the argmax decouples into sign(s_i), ties -> +1."""
    return predict_from_scores(point_scores(ds, weights))


def predict_top(scores, count: int) -> np.ndarray:
    """Label the ``count`` highest scores +1 (earlier index wins ties)."""
    scores = np.asarray(scores, dtype=np.float64)
    y = -np.ones(scores.shape[0], dtype=np.int8)
    y[np.argsort(-scores, kind="stable")[:count]] = 1
    return y


def all_tuples(n: int) -> np.ndarray:
    """Every tuple in {+1, -1}^n as rows of a (2^n, n) int8 array."""
    codes = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(n - 1, -1, -1)) & 1
    return np.where(bits == 1, -1, 1).astype(np.int8)


def predict_bruteforce(ds: MultiViewDataset, weights: Sequence, max_n: int = 20) -> tuple[np.ndarray, float]:
    """Exhaustive argmax over all 2^n tuples through psi directly.

    Returns the first maximizing tuple and its objective value.
    """
    if ds.n > max_n:
        raise ValueError(f"brute-force prediction limited to n <= {max_n}")
    weights = check_weights(ds, weights)
    Y = all_tuples(ds.n).astype(np.float64)
    values = np.zeros(Y.shape[0])
    for j, w in enumerate(weights):
        psis = np.asarray((ds.views[j].T @ Y.T).T)
        values += psis @ w
    best = int(np.argmax(values))
    return Y[best].astype(np.int8), float(values[best])
