"""Most-violated label tuple search.

The loss depends on a candidate tuple only through its contingency table,
and the margin part is linear in per-point scores. So for a fixed number of
false negatives ``fn`` and false positives ``fp`` the best tuple flips the
``fn`` lowest-scoring positives and the ``fp`` highest-scoring negatives.
Sweeping the (fn, fp) grid with prefix sums gives the exact maximizer in
O(n log n + P*N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import measures as M
from .data import MultiViewDataset
from .errors import DimensionMismatch, SearchError
from .inference import all_tuples, as_label_tuple, check_weights, point_scores


@dataclass(frozen=True)
class SearchResult:
    tuple: np.ndarray
    objective: float
    loss: float
    table: M.ContingencyTable

    @property
    def violation(self) -> float:
        """Slack this constraint demands: loss minus the margin it currently gets."""
        return self.objective


def _sorted_class(idx: np.ndarray, scores: np.ndarray) -> np.ndarray:
    return idx[np.argsort(-scores[idx], kind="stable")]


def most_violated_from_scores(scores, measure: M.Measure, truth) -> SearchResult:
    scores = np.asarray(scores, dtype=np.float64)
    truth = as_label_tuple(truth)
    if scores.shape != truth.shape:
        raise DimensionMismatch(f"{scores.shape[0]} scores for {truth.shape[0]} labels")

    pos = _sorted_class(np.flatnonzero(truth > 0), scores)
    neg = _sorted_class(np.flatnonzero(truth < 0), scores)
    P, N = len(pos), len(neg)
    cum_pos = np.concatenate(([0.0], np.cumsum(scores[pos])))
    cum_neg = np.concatenate(([0.0], np.cumsum(scores[neg])))

    fn, fp = np.meshgrid(np.arange(P + 1), np.arange(N + 1), indexing="ij")
    fn, fp = fn.ravel(), fp.ravel()
    delta = M.loss_grid(measure, P - fn, fp, fn, N - fp)
    # flipping the fn weakest positives costs 2*their score; flipping the fp
    # strongest negatives gains 2*their score
    gain = 2.0 * cum_neg[fp] - 2.0 * (cum_pos[P] - cum_pos[P - fn])
    obj = delta + gain
    obj[np.isnan(obj)] = -np.inf
    obj[(fn == 0) & (fp == 0)] = -np.inf

    order = np.lexsort((fn, fn + fp))
    ranked = obj[order]
    if not np.any(np.isfinite(ranked)):
        raise SearchError(f"no admissible tuple other than the truth for {measure.name} (n={truth.size})")
    best = order[int(np.argmax(ranked))]
    n_fn, n_fp = int(fn[best]), int(fp[best])

    y = truth.copy()
    y[pos[P - n_fn:]] = -1
    y[neg[:n_fp]] = 1
    table = M.ContingencyTable(P - n_fn, n_fp, n_fn, N - n_fp)
    lval = float(delta[best])
    objective = lval + float((y.astype(np.float64) - truth) @ scores)
    return SearchResult(y, objective, lval, table)


def most_violated(ds: MultiViewDataset, weights: Sequence, measure: M.Measure, truth=None) -> SearchResult:
    """Exact argmax of loss(y', y) + sum_j w_j.(psi_j(y') - psi_j(y)) over y' != y."""
    truth = ds.labels if truth is None else as_label_tuple(truth, ds.n)
    return most_violated_from_scores(point_scores(ds, weights), measure, truth)


def most_violated_bruteforce(
    ds: MultiViewDataset, weights: Sequence, measure: M.Measure, truth=None, max_n: int = 20
) -> SearchResult:
    """Enumerate every tuple other than the truth; evaluates the margin through psi."""
    if ds.n > max_n:
        raise ValueError(f"brute-force search limited to n <= {max_n}, got n={ds.n}")
    weights = check_weights(ds, weights)
    truth = ds.labels if truth is None else as_label_tuple(truth, ds.n)
    Y = all_tuples(ds.n)
    Y = Y[np.any(Y != truth, axis=1)]

    pp, tpos = Y > 0, truth > 0
    tp = np.count_nonzero(pp & tpos, axis=1)
    fp = np.count_nonzero(pp & ~tpos, axis=1)
    fn = np.count_nonzero(~pp & tpos, axis=1)
    tn = np.count_nonzero(~pp & ~tpos, axis=1)
    delta = M.loss_grid(measure, tp, fp, fn, tn)
    ok = ~np.isnan(delta)
    if not np.any(ok):
        raise SearchError(f"no admissible tuple other than the truth for {measure.name} (n={ds.n})")

    Yf = Y.astype(np.float64)
    yf = truth.astype(np.float64)
    margin = np.zeros(Y.shape[0])
    for j, w in enumerate(weights):
        X = ds.views[j]
        margin += np.asarray((X.T @ Yf.T).T) @ w - float(np.asarray(X.T @ yf).ravel() @ w)
    obj = np.where(ok, delta + margin, -np.inf)
    best = int(np.argmax(obj))
    table = M.ContingencyTable(int(tp[best]), int(fp[best]), int(fn[best]), int(tn[best]))
    return SearchResult(Y[best].copy(), float(obj[best]), float(delta[best]), table)
