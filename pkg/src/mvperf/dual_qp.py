"""Per-view dual subproblem over the working set.

With every other view held fixed, the update of ``w_j`` is a QP in
``(w_j, xi)`` whose dual lives on the scaled simplex
``{alpha >= 0, sum(alpha) = C1}``::

    max_alpha  -1/2 (beta + G alpha)' Omega^-1 (beta + G alpha) + alpha' delta + const

where the columns of ``G`` are the per-view psi differences of the working
constraints. The primal solution is ``w_j = Omega^-1 (beta + G alpha)``.

``Omega_j = I + C2 (m - 1) X_j' X_j`` only depends on the data, so it is
Cholesky-factorized once per view and reused for every solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .data import MultiViewDataset
from .errors import DimensionMismatch, MVPerfError, SolverError
from .inference import as_label_tuple, view_point_scores

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


class OmegaFactor:
    """Cholesky factor of a symmetric positive-definite Omega_j."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        try:
            self._cho = cho_factor(self.matrix, lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise MVPerfError(f"Omega factorization failed: {exc}") from None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._cho, rhs, check_finite=False)


def build_omega(ds: MultiViewDataset, j: int, C2: float) -> OmegaFactor:
    """Omega_j = I + C2 (m-1) sum_i x_i^j x_i^j'."""
    if C2 < 0:
        raise ValueError("C2 must be non-negative")
    X = ds.views[j]
    gram = np.asarray((X.T @ X).todense())
    omega = np.eye(ds.dims[j]) + C2 * (ds.m - 1) * gram
    return OmegaFactor(0.5 * (omega + omega.T))


@dataclass
class WorkingConstraint:
    tuple: np.ndarray
    psi_diff: list
    loss: float
    alpha: float = 0.0

    @property
    def key(self) -> bytes:
        return self.tuple.tobytes()


def make_constraint(ds: MultiViewDataset, y_prime, loss: float) -> WorkingConstraint:
    """Cache psi_j(truth) - psi_j(y') for every view."""
    y_prime = as_label_tuple(y_prime, ds.n)
    diff = (ds.labels.astype(np.float64) - y_prime).astype(np.float64)
    psi_diff = [np.asarray(X.T @ diff).ravel() for X in ds.views]
    return WorkingConstraint(y_prime, psi_diff, float(loss))


class WorkingSet:
    """Ordered, duplicate-free list of working constraints."""

    def __init__(self, constraints: Sequence[WorkingConstraint] = ()):
        self.constraints: list[WorkingConstraint] = []
        self._keys: set[bytes] = set()
        for c in constraints:
            self.add(c)

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __getitem__(self, k):
        return self.constraints[k]

    def __contains__(self, y) -> bool:
        return np.asarray(y, dtype=np.int8).tobytes() in self._keys

    def add(self, c: WorkingConstraint) -> bool:
        """Append ``c``; returns False (and leaves the set alone) on a duplicate."""
        if c.key in self._keys:
            return False
        self._keys.add(c.key)
        self.constraints.append(c)
        return True

    @property
    def alphas(self) -> np.ndarray:
        return np.array([c.alpha for c in self.constraints])

    @property
    def losses(self) -> np.ndarray:
        return np.array([c.loss for c in self.constraints])

    def psi_matrix(self, j: int) -> np.ndarray:
        """Columns are the view-j psi differences, shape (d_j, |W|)."""
        return np.column_stack([c.psi_diff[j] for c in self.constraints])

    def margins(self, weights: Sequence) -> np.ndarray:
        """sum_j w_j . psi_diff_j for each constraint."""
        out = np.zeros(len(self))
        for j, w in enumerate(weights):
            out += self.psi_matrix(j).T @ w
        return out


@dataclass
class ViewSubproblem:
    """Dual QP data for one view; ``linear`` is the minimization-form linear term."""

    omega: OmegaFactor
    beta: np.ndarray
    gammas: np.ndarray
    deltas: np.ndarray
    gram: np.ndarray
    linear: np.ndarray
    omega_inv_beta: np.ndarray
    omega_inv_gammas: np.ndarray
    offset: float = 0.0

    @property
    def size(self) -> int:
        return self.gammas.shape[1]

    def gradient(self, alpha: np.ndarray) -> np.ndarray:
        """Gradient of q(alpha) = 1/2 a'Ha + linear'a (the negated dual, minus constants)."""
        return self.gram @ alpha + self.linear

    def dual_objective(self, alpha: np.ndarray) -> float:
        u = self.beta + self.gammas @ alpha
        return float(-0.5 * u @ self.omega.solve(u) + alpha @ self.deltas + self.offset)

    def slack(self, w: np.ndarray, clamp: bool = True) -> float:
        xi = float(np.max(self.deltas - self.gammas.T @ w))
        return max(0.0, xi) if clamp else xi

    def primal_objective(self, w: np.ndarray, C1: float, xi: float | None = None) -> float:
        """Per-view restricted primal at ``w`` (slack defaults to the clamped max)."""
        if xi is None:
            xi = self.slack(w)
        return float(0.5 * w @ (self.omega.matrix @ w) - w @ self.beta + self.offset + C1 * xi)


def build_subproblem(
    ds: MultiViewDataset,
    j: int,
    weights: Sequence,
    ws: WorkingSet,
    C2: float,
    omega: OmegaFactor | None = None,
    slack_column: bool = False,
) -> ViewSubproblem:
    """Assemble beta, gamma, delta and the dual Gram matrix for view ``j``.

    ``weights[j]`` itself is ignored; every other entry is held fixed.

    With ``slack_column`` a zero constraint (gamma = 0, delta = 0) is placed
    first. It is the constraint of the truth tuple itself and enforces
    ``xi >= 0``: its multiplier absorbs whatever part of C1 the working
    constraints do not use.
    """
    if len(ws) == 0:
        raise ValueError("working set is empty")
    if len(weights) != ds.m:
        raise DimensionMismatch(f"got {len(weights)} weight vectors for {ds.m} views")
    if omega is None:
        omega = build_omega(ds, j, C2)

    others = [k for k in range(ds.m) if k != j]
    other_resp = np.zeros(ds.n)
    offset = 0.0
    for k in others:
        r = view_point_scores(ds, k, weights[k])
        other_resp += r
        offset += 0.5 * C2 * float(r @ r)
    beta = C2 * np.asarray(ds.views[j].T @ other_resp).ravel()

    G = ws.psi_matrix(j)
    other_margin = np.zeros(len(ws))
    for k in others:
        other_margin += ws.psi_matrix(k).T @ np.asarray(weights[k], dtype=np.float64)
    deltas = ws.losses - other_margin
    if slack_column:
        G = np.column_stack((np.zeros(G.shape[0]), G))
        deltas = np.concatenate(([0.0], deltas))

    Z = omega.solve(G)
    H = G.T @ Z
    H = 0.5 * (H + H.T)
    omega_inv_beta = omega.solve(beta)
    linear = G.T @ omega_inv_beta - deltas
    return ViewSubproblem(omega, beta, G, deltas, H, linear, omega_inv_beta, Z, offset)


class JointOmega:
    """Factor of the all-view quadratic form of the slack-free primal.

    Block (j, j) is Omega_j; block (j, k) is -C2 X_j' X_k. Used by the joint
    update, which is not the per-view alternation.
    """

    def __init__(self, ds: MultiViewDataset, C2: float):
        dims = ds.dims
        self.offsets = np.concatenate(([0], np.cumsum(dims)))
        Xs = [ds.views[j] for j in range(ds.m)]
        Q = np.zeros((self.offsets[-1], self.offsets[-1]))
        for j in range(ds.m):
            sj = slice(self.offsets[j], self.offsets[j + 1])
            for k in range(ds.m):
                sk = slice(self.offsets[k], self.offsets[k + 1])
                cross = np.asarray((Xs[j].T @ Xs[k]).todense())
                if j == k:
                    Q[sj, sk] = np.eye(dims[j]) + C2 * (ds.m - 1) * cross
                else:
                    Q[sj, sk] = -C2 * cross
        self.factor = OmegaFactor(0.5 * (Q + Q.T))

    def split(self, w: np.ndarray) -> list[np.ndarray]:
        return [w[self.offsets[j]:self.offsets[j + 1]].copy() for j in range(len(self.offsets) - 1)]


def build_joint_subproblem(ws: WorkingSet, joint: JointOmega, m: int, slack_column: bool = True) -> ViewSubproblem:
    """Dual data for updating every view at once (beta = 0, delta = loss)."""
    if len(ws) == 0:
        raise ValueError("working set is empty")
    G = np.vstack([ws.psi_matrix(j) for j in range(m)])
    deltas = ws.losses
    if slack_column:
        G = np.column_stack((np.zeros(G.shape[0]), G))
        deltas = np.concatenate(([0.0], deltas))
    Z = joint.factor.solve(G)
    H = G.T @ Z
    H = 0.5 * (H + H.T)
    zero = np.zeros(G.shape[0])
    return ViewSubproblem(joint.factor, zero, G, deltas, H, -deltas, zero, Z, 0.0)


@dataclass
class QPResult:
    alpha: np.ndarray
    residual: float
    iterations: int
    converged: bool = field(default=True)


def kkt_residual(grad: np.ndarray, alpha: np.ndarray) -> float:
    """Largest gradient gap between a support coordinate and the best coordinate."""
    support = alpha > 0
    if not np.any(support):
        return np.inf
    return max(0.0, float(np.max(grad[support]) - np.min(grad)))


def _face_direction(H: np.ndarray, g: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Newton direction on the face {alpha_i = 0 for i not in S, sum fixed}.

    A tiny ridge keeps the bordered system solvable when H is singular on
    the face; along such directions the step then runs to the boundary.
    """
    k = len(S)
    H_SS = H[np.ix_(S, S)]
    ridge = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H_SS)))))
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = H_SS + ridge * np.eye(k)
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate((-g[S], [0.0]))
    p = np.zeros_like(g)
    p[S] = np.linalg.solve(K, rhs)[:k]
    p[S] -= p[S].mean()  # stay exactly on the sum constraint
    return p


def _line_step(H, g, alpha, p):
    """Exact minimizing step along p, cut at the nonnegativity boundary."""
    slope = float(g @ p)
    curv = float(p @ H @ p)
    t = -slope / curv if curv > 0 else np.inf
    neg = p < 0
    blocking = None
    if np.any(neg):
        ratios = alpha[neg] / -p[neg]
        b = int(np.argmin(ratios))
        if ratios[b] <= t:
            t = float(ratios[b])
            blocking = int(np.flatnonzero(neg)[b])
    return t, blocking


def solve_simplex_qp(
    sub: ViewSubproblem,
    C1: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    alpha0: np.ndarray | None = None,
) -> QPResult:
    """Maximize the view dual over {alpha >= 0, sum alpha = C1}.

    Primal active-set method: Newton steps on the current face with an
    exact line search and ratio test, growing the face by the coordinate
    with the smallest gradient once the face is optimal. Falls back to a
    pairwise exchange step when the Newton direction stalls. Exits once the
    KKT residual is below ``tol``; raises SolverError with the best iterate
    otherwise.
    """
    if C1 <= 0:
        raise ValueError("C1 must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    K = sub.size
    if K == 1:
        return QPResult(np.array([float(C1)]), 0.0, 0)

    H, c = sub.gram, sub.linear
    if alpha0 is not None and len(alpha0) == K and np.sum(np.clip(alpha0, 0, None)) > 0:
        alpha = np.clip(np.asarray(alpha0, dtype=np.float64), 0.0, None)
        alpha *= C1 / alpha.sum()
    else:
        alpha = np.zeros(K)
        alpha[int(np.argmin(c))] = C1

    best_alpha, best_res = alpha.copy(), np.inf
    it = 0
    while it < max_iter:
        g = H @ alpha + c
        res = kkt_residual(g, alpha)
        if res < best_res:
            best_alpha, best_res = alpha.copy(), res
        if res <= tol:
            break
        it += 1

        S = alpha > 0
        if float(np.max(g[S]) - np.min(g[S])) <= 0.5 * tol:
            S[int(np.argmin(g))] = True
        p = _face_direction(H, g, np.flatnonzero(S))
        t, blocking = _line_step(H, g, alpha, p)
        if not (g @ p < 0 and t > 0):
            # pairwise exchange between the worst support and the best coordinate
            i = int(np.argmin(g))
            support = np.flatnonzero(alpha > 0)
            j = int(support[np.argmax(g[support])])
            p = np.zeros(K)
            p[i], p[j] = 1.0, -1.0
            t, blocking = _line_step(H, g, alpha, p)
        if not np.isfinite(t):
            raise SolverError("simplex QP step is unbounded", alpha=alpha, residual=res)
        alpha = alpha + t * p
        if blocking is not None:
            alpha[blocking] = 0.0
        alpha[alpha < 0] = 0.0
        alpha *= C1 / alpha.sum()

    g = H @ alpha + c
    res = kkt_residual(g, alpha)
    if res > best_res:
        alpha, res = best_alpha, best_res
    if res > tol:
        raise SolverError(
            f"simplex QP did not reach KKT residual {tol:g} in {max_iter} iterations (residual {res:.3g})",
            alpha=alpha,
            residual=res,
        )
    return QPResult(alpha, res, it)


def recover_weights(sub: ViewSubproblem, alpha: np.ndarray) -> np.ndarray:
    """w_j = Omega^-1 (beta + G alpha)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (sub.size,):
        raise DimensionMismatch(f"alpha has shape {alpha.shape}, expected ({sub.size},)")
    return sub.omega_inv_beta + sub.omega_inv_gammas @ alpha


def stationarity_residual(sub: ViewSubproblem, w: np.ndarray, alpha: np.ndarray) -> float:
    """|| Omega w - beta - G alpha ||."""
    return float(np.linalg.norm(sub.omega.matrix @ w - sub.beta - sub.gammas @ alpha))


def duality_gap(sub: ViewSubproblem, alpha: np.ndarray, C1: float) -> tuple[float, float, float]:
    """(primal, dual, relative gap) at the weights recovered from ``alpha``."""
    w = recover_weights(sub, alpha)
    primal = sub.primal_objective(w, C1)
    dual = sub.dual_objective(alpha)
    return primal, dual, (primal - dual) / max(1.0, abs(primal))
