"""Brute-force verification suites.

Each suite draws seeded random instances, runs the fast path and an
independent oracle, and returns a :class:`SuiteReport` with pass/fail
counts. The CLI ``verify`` command and the acceptance tests both use them.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import measures as M
from .dual_qp import WorkingSet, build_subproblem, duality_gap, kkt_residual, make_constraint, solve_simplex_qp
from .errors import SearchError
from .inference import all_tuples, joint_score, predict, predict_bruteforce
from .search import most_violated, most_violated_bruteforce
from .synthetic import random_instance
from .trainer import (
    TrainConfig,
    primal_objective,
    smooth_gradient,
    train,
    train_on_working_set,
)

SUITES = ("constraint-search", "prediction", "qp-grid", "qp-certificate", "gradient", "full-constraint")


@dataclass
class SuiteReport:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.passed + self.failed

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def record(self, ok: bool, value: float, detail=None):
        self.worst = max(self.worst, float(value))
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 10:
                self.failures.append(detail)

    def summary(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        return f"{self.name}: {verdict} {self.passed}/{self.total} (worst {self.worst:.3g}, {self.seconds:.2f}s)"


def _measures_for(n: int, rng: np.random.Generator) -> list[M.Measure]:
    return [
        M.ERROR_RATE,
        M.F1,
        M.PRBEP,
        M.precision_at(int(rng.integers(1, n + 1))),
        M.recall_at(int(rng.integers(1, n + 1))),
    ]


def check_constraint_search(count: int = 200, seed: int = 0, max_n: int = 12, tol: float = 1e-12) -> SuiteReport:
    """Sort-based search vs. 2^n enumeration, all five measures per instance."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("constraint-search")
    t0 = time.perf_counter()
    for trial in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, 4))
        ds, W = random_instance(rng, n, m)
        worst, ok = 0.0, True
        for meas in _measures_for(n, rng):
            try:
                fast = most_violated(ds, W, meas)
            except SearchError:
                try:
                    most_violated_bruteforce(ds, W, meas)
                    ok = False
                except SearchError:
                    pass
                continue
            slow = most_violated_bruteforce(ds, W, meas)
            diff = abs(fast.objective - slow.objective)
            worst = max(worst, diff)
            ok &= diff <= tol and not np.array_equal(fast.tuple, ds.labels)
        rep.record(ok, worst, (trial, n, m))
    rep.seconds = time.perf_counter() - t0
    return rep


def check_prediction(count: int = 100, seed: int = 1, max_n: int = 10, tol: float = 1e-12) -> SuiteReport:
    """Sign-rule prediction vs. exhaustive argmax of the joint score."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("prediction")
    t0 = time.perf_counter()
    for trial in range(count):
        n = int(rng.integers(1, max_n + 1))
        ds, W = random_instance(rng, n, int(rng.integers(1, 4)))
        if trial % 5 == 0:
            W[0] = np.zeros_like(W[0])  # exercise ties
        _, best = predict_bruteforce(ds, W)
        diff = abs(joint_score(ds, W, predict(ds, W)) - best)
        rep.record(diff <= tol, diff, (trial, n))
    rep.seconds = time.perf_counter() - t0
    return rep


def random_subproblem(rng: np.random.Generator, size: int, C2: float | None = None):
    """A view subproblem built from a random dataset, weights and working set."""
    n = int(rng.integers(4, 11))
    m = int(rng.integers(1, 4))
    ds, W = random_instance(rng, n, m, max_dim=4, weight_scale=0.3)
    meas = M.ERROR_RATE if rng.random() < 0.5 else M.F1
    ws = WorkingSet()
    tuples = all_tuples(n)
    tuples = tuples[np.any(tuples != ds.labels, axis=1)]
    for idx in rng.permutation(len(tuples)):
        if len(ws) >= size:
            break
        y = tuples[idx]
        ws.add(make_constraint(ds, y, M.tuple_loss(meas, y, ds.labels)))
    C2 = float(rng.uniform(0.0, 1.0)) if C2 is None else C2
    j = int(rng.integers(m))
    return build_subproblem(ds, j, W, ws, C2, slack_column=True), ds


def _simplex_grid(k: int, steps: int) -> np.ndarray:
    """All points of {a >= 0, sum a = 1} with coordinates in multiples of 1/steps."""
    pts = []
    for bars in itertools.combinations(range(steps + k - 1), k - 1):
        prev, coords = -1, []
        for b in bars:
            coords.append(b - prev - 1)
            prev = b
        coords.append(steps + k - 2 - prev)
        pts.append(coords)
    return np.array(pts, dtype=np.float64) / steps


def grid_maximize(sub, C1: float, steps: int = 24, max_rounds: int = 5000) -> float:
    """Maximize the dual by a simplex grid, then a shrinking pattern search."""
    k = sub.size

    def dual(A):
        U = sub.beta[:, None] + sub.gammas @ A.T
        return -0.5 * np.einsum("ij,ij->j", U, sub.omega.solve(U)) + A @ sub.deltas + sub.offset

    pts = C1 * _simplex_grid(k, steps)
    vals = dual(pts)
    best = pts[int(np.argmax(vals))]
    best_val = float(np.max(vals))
    radius = C1 / steps
    local = _simplex_grid(k, 6) - 1.0 / k  # zero-sum perturbation pattern
    pairs = np.array([e for e in itertools.permutations(range(k), 2)])
    moves = np.zeros((len(pairs), k))
    moves[np.arange(len(pairs)), pairs[:, 0]] = 1.0
    moves[np.arange(len(pairs)), pairs[:, 1]] = -1.0
    for _ in range(max_rounds):
        if radius < 1e-13 * C1:
            break
        cand = np.vstack([best + radius * local * k, best + radius * moves, best + 0.25 * radius * moves])
        cand = np.clip(cand, 0.0, None)
        cand *= C1 / cand.sum(axis=1, keepdims=True)
        vals = dual(cand)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best, best_val = cand[i], float(vals[i])
        else:
            radius *= 0.5
    return best_val


def check_qp_grid(count: int = 30, seed: int = 2, size: int = 5, tol: float = 1e-6) -> SuiteReport:
    """Active-set dual optimum vs. grid search over the simplex (|W| = size incl. slack)."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("qp-grid")
    t0 = time.perf_counter()
    for trial in range(count):
        sub, _ = random_subproblem(rng, size - 1)
        C1 = float(rng.uniform(0.1, 5.0))
        alpha = solve_simplex_qp(sub, C1).alpha
        got = sub.dual_objective(alpha)
        ref = grid_maximize(sub, C1)
        # the solver may beat the grid, never lose to it
        ok = got >= ref - 1e-12 and got - ref <= tol * max(1.0, abs(got))
        rep.record(ok, abs(got - ref), (trial, got, ref))
    rep.seconds = time.perf_counter() - t0
    return rep


def qp_certificate(sub, C1: float, alpha: np.ndarray) -> dict:
    primal, dual, gap = duality_gap(sub, alpha, C1)
    return {
        "min_alpha": float(np.min(alpha)),
        "sum_error": abs(float(alpha.sum()) - C1) / C1,
        "kkt": kkt_residual(sub.gradient(alpha), alpha),
        "gap": gap,
        "primal": primal,
        "dual": dual,
    }


def check_qp_certificate(count: int = 60, seed: int = 3, max_size: int = 10, tol: float = 1e-8) -> SuiteReport:
    """Every solve is feasible, KKT-certified and has a vanishing duality gap."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("qp-certificate")
    t0 = time.perf_counter()
    for trial in range(count):
        size = int(rng.integers(1, max_size + 1))
        sub, _ = random_subproblem(rng, size)
        C1 = float(10 ** rng.uniform(-1, 1.5))
        alpha = solve_simplex_qp(sub, C1, tol=tol).alpha
        cert = qp_certificate(sub, C1, alpha)
        ok = (
            cert["min_alpha"] >= 0
            and cert["sum_error"] <= 1e-8
            and cert["kkt"] <= tol
            and abs(cert["gap"]) <= 1e-6
        )
        rep.record(ok, max(cert["kkt"], abs(cert["gap"])), (trial, cert))
    rep.seconds = time.perf_counter() - t0
    return rep


def check_gradient(count: int = 25, seed: int = 4, rtol: float = 1e-5) -> SuiteReport:
    """Central differences of the slack-free primal vs. Omega_j w_j - beta_j."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("gradient")
    t0 = time.perf_counter()
    for trial in range(count):
        n = int(rng.integers(2, 15))
        m = int(rng.integers(2, 5))
        ds, W = random_instance(rng, n, m, max_dim=5)
        C2 = float(rng.uniform(0.05, 2.0))
        worst = 0.0
        for j in range(m):
            analytic = smooth_gradient(ds, W, j, C2)
            numeric = np.zeros_like(analytic)
            for a in range(len(W[j])):
                h = 1e-5 * max(1.0, abs(W[j][a]))
                Wp = [w.copy() for w in W]
                Wm = [w.copy() for w in W]
                Wp[j][a] += h
                Wm[j][a] -= h
                numeric[a] = (primal_objective(ds, Wp, 0.0, 1.0, C2) - primal_objective(ds, Wm, 0.0, 1.0, C2)) / (2 * h)
            err = np.linalg.norm(numeric - analytic) / max(np.linalg.norm(analytic), 1e-12)
            worst = max(worst, err)
        rep.record(worst <= rtol, worst, (trial, n, m))
    rep.seconds = time.perf_counter() - t0
    return rep


def full_working_set(ds, measure: M.Measure) -> WorkingSet:
    """Every admissible tuple of {+1,-1}^n other than the truth."""
    ws = WorkingSet()
    for y in all_tuples(ds.n):
        if np.array_equal(y, ds.labels):
            continue
        table = M.contingency(y, ds.labels)
        if M.admissible(measure, table):
            ws.add(make_constraint(ds, y, M.loss(measure, table)))
    return ws


def compare_with_full_enumeration(ds, cfg: TrainConfig) -> tuple[float, float, float]:
    """(cutting-plane primal, full-enumeration primal, relative difference)."""
    model, state = train(ds, cfg)
    full = full_working_set(ds, cfg.measure)
    fmodel, fstate = train_on_working_set(ds, cfg, full)
    cp = primal_objective(ds, model.weights, state.xi, cfg.C1, cfg.C2)
    fe = primal_objective(ds, fmodel.weights, fstate.xi, cfg.C1, cfg.C2)
    return cp, fe, abs(cp - fe) / max(abs(fe), 1e-12)


def check_full_constraint(
    count: int = 30, seed: int = 5, max_n: int = 8, rtol: float = 1e-3, update: str = "per_view"
) -> SuiteReport:
    """Cutting-plane training vs. training on the full admissible set (m = 2)."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport(f"full-constraint[{update}]")
    t0 = time.perf_counter()
    kinds = [M.ERROR_RATE, M.F1, M.PRBEP]
    for trial in range(count):
        n = int(rng.integers(3, max_n + 1))
        ds, _ = random_instance(rng, n, 2)
        meas = kinds[trial % len(kinds)]
        cfg = TrainConfig(C1=1.0, C2=0.1, T=500, epsilon=1e-4, measure=meas, update=update)
        cp, fe, rel = compare_with_full_enumeration(ds, cfg)
        rep.record(rel <= rtol, rel, (trial, n, meas.name, cp, fe))
    rep.seconds = time.perf_counter() - t0
    return rep


def run_suite(name: str, seed: int | None = None, update: str = "per_view") -> SuiteReport:
    kwargs = {} if seed is None else {"seed": seed}
    if name == "constraint-search":
        return check_constraint_search(**kwargs)
    if name == "prediction":
        return check_prediction(**kwargs)
    if name == "qp-grid":
        return check_qp_grid(**kwargs)
    if name == "qp-certificate":
        return check_qp_certificate(**kwargs)
    if name == "gradient":
        return check_gradient(**kwargs)
    if name == "full-constraint":
        return check_full_constraint(update=update, **kwargs)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
