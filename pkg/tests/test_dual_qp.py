import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvperf import measures as M
from mvperf.data import from_arrays
from mvperf.dual_qp import (
    OmegaFactor,
    ViewSubproblem,
    WorkingSet,
    build_omega,
    build_subproblem,
    duality_gap,
    kkt_residual,
    make_constraint,
    recover_weights,
    solve_simplex_qp,
    stationarity_residual,
)
from mvperf.errors import DimensionMismatch
from mvperf.oracles import grid_maximize, random_subproblem
from mvperf.synthetic import random_instance


def _ws(ds, tuples, measure=M.ERROR_RATE):
    ws = WorkingSet()
    for y in tuples:
        ws.add(make_constraint(ds, y, M.tuple_loss(measure, y, ds.labels)))
    return ws


def test_omega_examples(rng):
    ds, _ = random_instance(rng, 6, 2)
    np.testing.assert_array_equal(build_omega(ds, 0, 0.0).matrix, np.eye(ds.dims[0]))
    one = from_arrays([rng.normal(size=(6, 3))], ds.labels)
    np.testing.assert_array_equal(build_omega(one, 0, 5.0).matrix, np.eye(3))
    point = from_arrays([[[1.0, 0.0]], [[0.3]]], [1])
    np.testing.assert_array_equal(build_omega(point, 0, 1.0).matrix, [[2.0, 0.0], [0.0, 1.0]])


def test_single_view_has_no_coupling(rng):
    ds = from_arrays([rng.normal(size=(5, 2))], [1, -1, 1, -1, -1])
    ws = _ws(ds, [[-1, 1, -1, 1, 1], [1, 1, 1, 1, 1]])
    sub = build_subproblem(ds, 0, [rng.normal(size=2)], ws, C2=3.0)
    np.testing.assert_array_equal(sub.beta, 0.0)
    np.testing.assert_array_equal(sub.deltas, ws.losses)


def test_zero_other_weights(rng):
    ds, _ = random_instance(rng, 5, 2)
    ws = _ws(ds, [-ds.labels])
    sub = build_subproblem(ds, 0, [rng.normal(size=ds.dims[0]), np.zeros(ds.dims[1])], ws, C2=1.0)
    np.testing.assert_array_equal(sub.beta, 0.0)
    np.testing.assert_array_equal(sub.deltas, ws.losses)


def test_hand_computed_gram():
    # view 0 is the identity, view 1 is [[1, 1], [0, 2]], w_1 = (1, 0), C2 = 1
    # Omega_0 = 2I, beta = X_0' X_1 w_1 = (1, 0)
    # y' = (-1, +1): gamma = (2, -2), delta = 1 - 2 = -1
    # y' = (-1, -1): gamma = (2, 0), delta = 1/2 - 2 = -3/2
    ds = from_arrays([np.eye(2), [[1.0, 1.0], [0.0, 2.0]]], [1, -1])
    ws = _ws(ds, [[-1, 1], [-1, -1]])
    sub = build_subproblem(ds, 0, [np.zeros(2), np.array([1.0, 0.0])], ws, C2=1.0)
    np.testing.assert_allclose(sub.omega.matrix, 2 * np.eye(2))
    np.testing.assert_allclose(sub.beta, [1.0, 0.0])
    np.testing.assert_allclose(sub.gammas, [[2.0, 2.0], [-2.0, 0.0]])
    np.testing.assert_allclose(sub.deltas, [-1.0, -1.5])
    np.testing.assert_allclose(sub.gram, [[4.0, 2.0], [2.0, 2.0]], atol=1e-15)
    np.testing.assert_allclose(sub.linear, [2.0, 2.5], atol=1e-15)


def test_slack_column_is_zero_constraint(rng):
    ds, W = random_instance(rng, 6, 2)
    ws = _ws(ds, [-ds.labels])
    plain = build_subproblem(ds, 1, W, ws, C2=0.5)
    padded = build_subproblem(ds, 1, W, ws, C2=0.5, slack_column=True)
    assert padded.size == plain.size + 1
    np.testing.assert_array_equal(padded.gammas[:, 0], 0.0)
    assert padded.deltas[0] == 0.0
    np.testing.assert_allclose(padded.gram[1:, 1:], plain.gram)


def test_one_constraint_is_forced():
    ds = from_arrays([np.eye(2), [[1.0, 1.0], [0.0, 2.0]]], [1, -1])
    sub = build_subproblem(ds, 0, [np.zeros(2), np.ones(2)], _ws(ds, [[-1, 1]]), C2=1.0)
    res = solve_simplex_qp(sub, 2.5)
    assert res.alpha.tolist() == [2.5] and res.converged


def test_duplicate_columns_match_single(rng):
    sub, _ = random_subproblem(rng, 1)
    twin = dataclasses.replace(
        sub,
        gammas=np.repeat(sub.gammas, 2, axis=1),
        deltas=np.repeat(sub.deltas, 2),
        gram=np.repeat(np.repeat(sub.gram, 2, axis=0), 2, axis=1),
        linear=np.repeat(sub.linear, 2),
        omega_inv_gammas=np.repeat(sub.omega_inv_gammas, 2, axis=1),
    )
    a1 = solve_simplex_qp(sub, 1.5).alpha
    a2 = solve_simplex_qp(twin, 1.5).alpha
    assert twin.dual_objective(a2) == pytest.approx(sub.dual_objective(a1), abs=1e-12)
    assert a2.sum() == pytest.approx(1.5, abs=1e-14)


def test_recover_identity_case():
    sub = ViewSubproblem(
        omega=OmegaFactor(np.eye(2)),
        beta=np.zeros(2),
        gammas=np.array([[1.0], [0.0]]),
        deltas=np.array([1.0]),
        gram=np.array([[1.0]]),
        linear=np.array([-1.0]),
        omega_inv_beta=np.zeros(2),
        omega_inv_gammas=np.array([[1.0], [0.0]]),
    )
    np.testing.assert_array_equal(recover_weights(sub, np.array([2.0])), [2.0, 0.0])
    with pytest.raises(DimensionMismatch):
        recover_weights(sub, np.array([1.0, 1.0]))


def test_weights_linear_in_alpha(rng):
    sub, _ = random_subproblem(rng, 4)
    sub = dataclasses.replace(sub, beta=np.zeros_like(sub.beta), omega_inv_beta=np.zeros_like(sub.beta))
    a = rng.random(sub.size)
    for scale in (1.0, 1e-3, 1e-9):
        np.testing.assert_allclose(recover_weights(sub, scale * a), scale * recover_weights(sub, a), rtol=1e-12)


def test_kkt_residual_definition():
    g = np.array([1.0, 3.0, 0.5])
    assert kkt_residual(g, np.array([1.0, 0.0, 1.0])) == pytest.approx(0.5)
    assert kkt_residual(g, np.array([0.0, 0.0, 2.0])) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10), st.floats(0.05, 50.0))
def test_certificate(seed, size, C1):
    sub, _ = random_subproblem(np.random.default_rng(seed), size)
    res = solve_simplex_qp(sub, C1, tol=1e-9)
    assert res.alpha.min() >= 0.0
    assert abs(res.alpha.sum() - C1) <= 1e-8 * C1
    assert kkt_residual(sub.gradient(res.alpha), res.alpha) <= 1e-8
    w = recover_weights(sub, res.alpha)
    assert stationarity_residual(sub, w, res.alpha) <= 1e-9 * max(1.0, np.abs(w).max())
    _, _, gap = duality_gap(sub, res.alpha, C1)
    assert abs(gap) <= 1e-6


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_beats_grid(seed):
    sub, _ = random_subproblem(np.random.default_rng(seed), 5)
    res = solve_simplex_qp(sub, 1.0)
    best = grid_maximize(sub, 1.0)
    assert sub.dual_objective(res.alpha) >= best - 1e-9


def test_warm_start_same_answer(rng):
    sub, _ = random_subproblem(rng, 6)
    cold = solve_simplex_qp(sub, 2.0)
    warm = solve_simplex_qp(sub, 2.0, alpha0=np.full(sub.size, 2.0 / sub.size))
    assert sub.dual_objective(warm.alpha) == pytest.approx(sub.dual_objective(cold.alpha), abs=1e-10)


def test_rejects_bad_c1(rng):
    with pytest.raises(ValueError):
        solve_simplex_qp(random_subproblem(rng, 3)[0], 0.0)


def test_working_set_rejects_duplicates(tiny):
    ws = _ws(tiny, [[-1, -1, -1, -1]])
    assert not ws.add(make_constraint(tiny, [-1, -1, -1, -1], 0.5))
    assert len(ws) == 1 and [-1, -1, -1, -1] in ws


def test_qp_grid_suite():
    from mvperf.oracles import run_suite

    rep = run_suite("qp-grid")
    assert rep.ok, rep.failures
