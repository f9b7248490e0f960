"""Cutting-plane training loop, objectives and model persistence."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import measures as M
from .data import MultiViewDataset, validate
from .dual_qp import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    JointOmega,
    WorkingSet,
    build_joint_subproblem,
    build_omega,
    build_subproblem,
    make_constraint,
    recover_weights,
    solve_simplex_qp,
)
from .errors import DataError, DimensionMismatch, MeasureError
from .inference import check_weights, point_scores, predict_from_scores, predict_top, view_point_scores
from .search import most_violated_from_scores

log = logging.getLogger(__name__)

MODEL_FORMAT = "mvperf-model"
MODEL_VERSION = 1


@dataclass
class TrainConfig:
    C1: float = 1.0
    C2: float = 0.1
    T: int = 100
    epsilon: float = 1e-4
    measure: M.Measure = M.ERROR_RATE
    qp_tol: float = DEFAULT_TOL
    qp_max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0  # reserved for randomized tie-breaking; unused
    # False solves the dual with sum(alpha) = C1 over the working set alone,
    # i.e. with an unconstrained slack; xi is then reported unclamped too
    nonneg_slack: bool = True
    # "per_view": one exact solve per view, others fixed (the alternating
    # scheme). "joint": one solve over all views at once.
    update: str = "per_view"

    def validate(self):
        if not self.C1 > 0:
            raise ValueError(f"C1 must be positive, got {self.C1}")
        if not self.C2 >= 0:
            raise ValueError(f"C2 must be non-negative, got {self.C2}")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.qp_tol > 0:
            raise ValueError(f"qp_tol must be positive, got {self.qp_tol}")
        if self.update not in ("per_view", "joint"):
            raise ValueError(f"update must be 'per_view' or 'joint', got {self.update!r}")


@dataclass
class IterationLog:
    t: int
    xi: float
    violation: float
    primal: float
    # (before, after) value of each view's restricted objective around its solve
    view_objectives: list = field(default_factory=list)


@dataclass
class TrainState:
    weights: list
    working_set: WorkingSet
    xi: float = 0.0
    history: list = field(default_factory=list)
    status: str = "running"
    last_violation: float | None = None
    # multiplier of the xi >= 0 constraint in the last view solve
    slack_alpha: float = 0.0


@dataclass
class Model:
    weights: list
    measure: M.Measure
    config: dict
    status: str = "unknown"
    xi: float = 0.0
    working_set: list = field(default_factory=list)

    @property
    def dims(self) -> list[int]:
        return [int(w.shape[0]) for w in self.weights]

    @property
    def m(self) -> int:
        return len(self.weights)


def primal_objective(ds: MultiViewDataset, weights: Sequence, xi: float, C1: float, C2: float) -> float:
    """1/2 sum ||w_j||^2 + C1 xi + C2/2 sum_{j<j'} sum_i (w_j.x_i^j - w_j'.x_i^j')^2."""
    weights = check_weights(ds, weights)
    reg = 0.5 * sum(float(w @ w) for w in weights)
    resp = [view_point_scores(ds, j, w) for j, w in enumerate(weights)]
    consistency = 0.0
    for j in range(ds.m):
        for k in range(j):
            d = resp[j] - resp[k]
            consistency += float(d @ d)
    return reg + C1 * xi + 0.5 * C2 * consistency


def smooth_gradient(ds: MultiViewDataset, weights: Sequence, j: int, C2: float) -> np.ndarray:
    """Gradient of the slack-free part of the primal w.r.t. w_j: Omega_j w_j - beta_j."""
    weights = check_weights(ds, weights)
    X = ds.views[j]
    own = view_point_scores(ds, j, weights[j])
    others = sum(view_point_scores(ds, k, weights[k]) for k in range(ds.m) if k != j)
    return weights[j] + C2 * np.asarray(X.T @ ((ds.m - 1) * own - others)).ravel()


def compute_slack(ws: WorkingSet, weights: Sequence, clamp: bool = True) -> float:
    """xi = max(0, max_k [loss_k - sum_j w_j . psi_diff_j(k)]); 0 for an empty set."""
    if len(ws) == 0:
        return 0.0
    xi = float(np.max(ws.losses - ws.margins(weights)))
    return max(0.0, xi) if clamp else xi


class _Updater:
    """Weight update over a working set, carrying warm starts between calls."""

    def __init__(self, ds: MultiViewDataset, cfg: TrainConfig):
        self.ds, self.cfg = ds, cfg
        self.extra = 1 if cfg.nonneg_slack else 0
        if cfg.update == "joint":
            self.joint = JointOmega(ds, cfg.C2)
            self.alphas = [np.zeros(self.extra)]
        else:
            self.omegas = [build_omega(ds, j, cfg.C2) for j in range(ds.m)]
            self.alphas = [np.zeros(self.extra) for _ in range(ds.m)]

    def _solve(self, sub, k):
        cfg = self.cfg
        prev = self.alphas[k]
        warm = np.concatenate((prev, np.zeros(sub.size - len(prev))))
        result = solve_simplex_qp(sub, cfg.C1, cfg.qp_tol, cfg.qp_max_iter, alpha0=warm)
        self.alphas[k] = result.alpha
        return result.alpha

    def step(self, weights: list, ws: WorkingSet) -> list:
        """Update ``weights`` in place; returns (before, after) objective pairs."""
        ds, cfg = self.ds, self.cfg
        objs = []
        if cfg.update == "joint":
            sub = build_joint_subproblem(ws, self.joint, ds.m, slack_column=cfg.nonneg_slack)
            w = np.concatenate(weights)
            before = sub.primal_objective(w, cfg.C1, xi=sub.slack(w, clamp=False))
            w = recover_weights(sub, self._solve(sub, 0))
            after = sub.primal_objective(w, cfg.C1, xi=sub.slack(w, clamp=False))
            weights[:] = self.joint.split(w)
            objs.append((before, after))
        else:
            for j in range(ds.m):
                sub = build_subproblem(
                    ds, j, weights, ws, cfg.C2, omega=self.omegas[j], slack_column=cfg.nonneg_slack
                )
                before = sub.primal_objective(weights[j], cfg.C1, xi=sub.slack(weights[j], clamp=False))
                weights[j] = recover_weights(sub, self._solve(sub, j))
                after = sub.primal_objective(weights[j], cfg.C1, xi=sub.slack(weights[j], clamp=False))
                objs.append((before, after))
        last = self.alphas[-1]
        for c, a in zip(ws, last[self.extra:]):
            c.alpha = float(a)
        return objs

    @property
    def slack_alpha(self) -> float:
        return float(self.alphas[-1][0]) if self.extra else 0.0


def train(ds: MultiViewDataset, cfg: TrainConfig) -> tuple[Model, TrainState]:
    """Alternate most-violated search with one pass of weight updates.

    Starts from w = 0 and an empty working set. Each outer iteration finds
    the most violated tuple under the current weights, stops if it is
    violated by no more than xi + epsilon (or is already in the working
    set), otherwise adds it and re-solves every view once in order.
    """
    validate(ds)
    cfg.validate()
    truth = ds.labels
    weights = [np.zeros(d) for d in ds.dims]
    ws = WorkingSet()
    updater = _Updater(ds, cfg)
    state = TrainState(weights, ws)

    for t in range(1, cfg.T + 1):
        scores = point_scores(ds, weights)
        found = most_violated_from_scores(scores, cfg.measure, truth)
        state.last_violation = found.violation
        if found.violation <= state.xi + cfg.epsilon:
            state.status = "converged"
            break
        if not ws.add(make_constraint(ds, found.tuple, found.loss)):
            state.status = "converged"
            break

        view_objs = updater.step(weights, ws)
        state.slack_alpha = updater.slack_alpha
        state.xi = compute_slack(ws, weights, clamp=cfg.nonneg_slack)
        primal = primal_objective(ds, weights, state.xi, cfg.C1, cfg.C2)
        state.history.append(IterationLog(t, state.xi, found.violation, primal, view_objs))
        log.debug("t=%d xi=%.6g violation=%.6g primal=%.6g", t, state.xi, found.violation, primal)
    else:
        state.status = "max_iter"

    state.weights = weights
    return _make_model(weights, cfg, state), state


def train_on_working_set(
    ds: MultiViewDataset, cfg: TrainConfig, ws: WorkingSet, max_sweeps: int = 5000, rtol: float = 1e-13
) -> tuple[Model, TrainState]:
    """Repeat update passes over a fixed, preloaded working set until the
    primal objective stops moving (relative change <= rtol)."""
    validate(ds)
    cfg.validate()
    weights = [np.zeros(d) for d in ds.dims]
    updater = _Updater(ds, cfg)
    state = TrainState(weights, ws, status="max_iter")
    prev = None
    for t in range(1, max_sweeps + 1):
        view_objs = updater.step(weights, ws)
        state.xi = compute_slack(ws, weights, clamp=cfg.nonneg_slack)
        primal = primal_objective(ds, weights, state.xi, cfg.C1, cfg.C2)
        state.history.append(IterationLog(t, state.xi, 0.0, primal, view_objs))
        if prev is not None and abs(prev - primal) <= rtol * max(1.0, abs(primal)):
            state.status = "converged"
            break
        prev = primal
    state.slack_alpha = updater.slack_alpha
    state.weights = weights
    return _make_model(weights, cfg, state), state


def _make_model(weights, cfg: TrainConfig, state: TrainState) -> Model:
    return Model(
        weights=[w.copy() for w in weights],
        measure=cfg.measure,
        config={"C1": cfg.C1, "C2": cfg.C2, "T": cfg.T, "epsilon": cfg.epsilon, "qp_tol": cfg.qp_tol,
                "update": cfg.update, "nonneg_slack": cfg.nonneg_slack},
        status=state.status,
        xi=state.xi,
        working_set=[c.tuple.copy() for c in state.working_set],
    )


@dataclass
class EvalReport:
    table: M.ContingencyTable
    loss: float
    predictions: np.ndarray


def evaluate(ds: MultiViewDataset, model: Model, measure: M.Measure | None = None) -> EvalReport:
    """Predict with ``model`` and score the prediction against the dataset labels.

    Restricted measures only score certain tables. When the sign prediction
    is not one of them, the top-ranked points are labelled positive instead:
    k of them for the @k measures, as many as there are true positives for
    PRBEP.
    """
    if model.dims != ds.dims:
        raise DimensionMismatch(f"model dims {model.dims} do not match data dims {ds.dims}")
    measure = measure or model.measure
    scores = point_scores(ds, model.weights)
    pred = predict_from_scores(scores)
    table = M.contingency(pred, ds.labels)
    if not M.admissible(measure, table):
        count = measure.k if measure.kind in ("prec", "rec") else int(np.count_nonzero(ds.labels > 0))
        pred = predict_top(scores, min(count, ds.n))
        table = M.contingency(pred, ds.labels)
    return EvalReport(table, M.loss(measure, table), pred)


def model_slack(ds: MultiViewDataset, model: Model) -> float:
    """Recompute xi from a model's stored working set."""
    ws = WorkingSet()
    for y in model.working_set:
        ws.add(make_constraint(ds, y, M.tuple_loss(model.measure, y, ds.labels)))
    return compute_slack(ws, model.weights)


# -- persistence -------------------------------------------------------------


def _tuple_str(y) -> str:
    return "".join("+" if v > 0 else "-" for v in np.asarray(y).tolist())


def _tuple_from_str(s: str) -> np.ndarray:
    if not s or set(s) - {"+", "-"}:
        raise DataError(f"bad label tuple {s!r} in model file")
    return np.array([1 if ch == "+" else -1 for ch in s], dtype=np.int8)


def model_to_dict(model: Model) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "m": model.m,
        "dims": model.dims,
        "measure": model.measure.name,
        "config": {k: model.config[k] for k in ("C1", "C2", "T", "epsilon", "qp_tol") if k in model.config},
        "status": model.status,
        "xi": float(model.xi),
        "working_set": [_tuple_str(y) for y in model.working_set],
        "weights": [[float(v) for v in w.tolist()] for w in model.weights],
    }


def dumps_model(model: Model) -> str:
    # json writes floats with repr, the shortest round-trip decimal form
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def loads_model(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise DataError("not an mvperf model file")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {doc.get('version')!r}")
    try:
        weights = [np.array(w, dtype=np.float64) for w in doc["weights"]]
        if len(weights) != doc["m"] or [len(w) for w in weights] != doc["dims"]:
            raise DataError("model weights disagree with declared m/dims")
        if not all(w.ndim == 1 and np.all(np.isfinite(w)) for w in weights):
            raise DataError("model weights must be finite vectors")
        return Model(
            weights=weights,
            measure=M.parse_measure(doc["measure"]),
            config=dict(doc.get("config", {})),
            status=doc.get("status", "unknown"),
            xi=float(doc.get("xi", 0.0)),
            working_set=[_tuple_from_str(s) for s in doc.get("working_set", [])],
        )
    except (KeyError, TypeError, ValueError, MeasureError) as exc:
        raise DataError(f"malformed model file ({exc!r})") from None


def save_model(model: Model, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    return loads_model(text)


def history_csv(state: TrainState) -> str:
    rows = ["t,xi,violation,primal"]
    rows += [f"{h.t},{h.xi!r},{h.violation!r},{h.primal!r}" for h in state.history]
    return "\n".join(rows) + "\n"
