import numpy as np
import pytest

from radcom import ScenarioConfig, build_operators, sample_channel
from radcom.convex_core import (GAP_TARGET, PsdVariable, SolverOptions,
                                logdet_gradient, psd_project,
                                solve_min_trace_logdet, solve_overlap_inner)
from radcom.errors import InfeasibleProblem
from radcom.nonoverlap import bisect_lambda, g_lambda, update_y, waterfill_qc
from radcom.overlap import aux_update
from radcom.scenario import build_c_of_q
from radcom.secrecy import LN2, SecrecyConstraintParams

from conftest import random_complex, random_psd
from oracles import lagrangian_value, pgd_minimize_lagrangian


@pytest.fixture
def instance():
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 3)
    q0 = (cfg.p_total / 8.0) * np.eye(4, dtype=complex)
    y = update_y(chan.h_d, q0, cfg.sigma2_r)
    return cfg, chan, y


def test_zero_feasible_returns_zero_trace(instance):
    # the secrecy value of the zero covariance is zero, so a zero threshold
    # is the case where zero is the unconstrained trace minimizer
    cfg, chan, y = instance
    params = SecrecyConstraintParams.create(0.0, 1, 1, 4, 4)
    res = solve_min_trace_logdet(chan.h_c, chan.h_d,
                                 np.eye(4, dtype=complex), params, 1.0, 1.0,
                                 p_total=cfg.p_total)
    assert float(np.trace(res.q_c.value).real) < 1e-6
    assert res.lambda_secrecy == 0.0


def test_min_trace_matches_waterfill_oracle(instance):
    cfg, chan, y = instance
    params = SecrecyConstraintParams.create(2.0, 1, 1, 4, 4)
    lam, _ = bisect_lambda(y, chan.h_c, chan.h_d, params, 1.0, 1.0)
    tr_wf = float(np.trace(waterfill_qc(lam, y, chan.h_c, chan.h_d,
                                        1.0).q_c).real)
    res = solve_min_trace_logdet(chan.h_c, chan.h_d, y, params, 1.0, 1.0,
                                 p_total=cfg.p_total)
    assert abs(float(np.trace(res.q_c.value).real) - tr_wf) < 1e-4


def test_min_trace_duality_certificate(instance):
    # primal value minus the closed-form dual value at the returned
    # multiplier bounds the true optimality gap
    cfg, chan, y = instance
    for r_m in (1.0, 2.0, 4.0):
        params = SecrecyConstraintParams.create(r_m, 1, 1, 4, 4)
        res = solve_min_trace_logdet(chan.h_c, chan.h_d, y, params, 1.0, 1.0,
                                     p_total=cfg.p_total)
        lam_hat = res.lambda_secrecy
        q_dual = waterfill_qc(lam_hat, y, chan.h_c, chan.h_d, 1.0).q_c
        dual = (float(np.trace(q_dual).real)
                + lam_hat * g_lambda(lam_hat, y, chan.h_c, chan.h_d, params,
                                     1.0, 1.0))
        primal = float(np.trace(res.q_c.value).real)
        assert primal - dual <= 1e-4
        assert primal - dual >= -1e-9  # weak duality


def test_min_trace_matches_projected_gradient(instance):
    cfg, chan, y = instance
    params = SecrecyConstraintParams.create(2.0, 1, 1, 4, 4)
    res = solve_min_trace_logdet(chan.h_c, chan.h_d, y, params, 1.0, 1.0,
                                 p_total=cfg.p_total)
    # exact-penalty view: minimizing the Lagrangian at the optimal
    # multiplier reproduces the constrained optimum
    lam = res.lambda_secrecy
    q = pgd_minimize_lagrangian([lam], y[None], chan.h_c[None],
                                chan.h_d[None], 1.0, steps=20_000)[0]
    l_pgd = lagrangian_value(q, lam, y, chan.h_c, chan.h_d, 1.0, 1.0, params)
    primal = float(np.trace(res.q_c.value).real)
    assert abs(primal - l_pgd) < 1e-3


def test_min_trace_infeasible_detection():
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 3)
    # eavesdropper channel equals the legitimate one scaled up: no PSD
    # covariance can reach the threshold
    params = SecrecyConstraintParams.create(2.0, 1, 1, 4, 4)
    y = np.eye(4, dtype=complex)
    with pytest.raises(InfeasibleProblem):
        solve_min_trace_logdet(chan.h_c, 10.0 * chan.h_c, y, params, 1.0, 1.0)


def test_barrier_value_non_increasing_within_stage(instance):
    cfg, chan, y = instance
    params = SecrecyConstraintParams.create(2.0, 1, 1, 4, 4)
    records = []
    solve_min_trace_logdet(chan.h_c, chan.h_d, y, params, 1.0, 1.0,
                           p_total=cfg.p_total, trace=records.append)
    assert records
    by_stage = {}
    for rec in records:
        by_stage.setdefault((rec.get("phase"), rec["stage"]), []).append(
            rec["phi"])
    for phis in by_stage.values():
        for a, b in zip(phis, phis[1:]):
            assert b <= a + 1e-9 * max(1.0, abs(a))


def test_returned_covariance_is_psd(instance):
    cfg, chan, y = instance
    params = SecrecyConstraintParams.create(3.0, 1, 1, 4, 4)
    res = solve_min_trace_logdet(chan.h_c, chan.h_d, y, params, 1.0, 1.0,
                                 p_total=cfg.p_total)
    PsdVariable.wrap(res.q_c.value)  # raises if the invariants fail


# ---------------------------------------------------------------------------
# overlap inner step
# ---------------------------------------------------------------------------

@pytest.fixture
def overlap_instance(small_cfg):
    chan = sample_channel(small_cfg, 5)
    ops = build_operators(small_cfg)
    lnt = small_cfg.block_len * small_cfg.n_tx
    s_bar = (small_cfg.p_total / 2 / lnt) * np.eye(lnt, dtype=complex)
    q_c = (small_cfg.p_total / 2 / small_cfg.n_tx) * np.eye(
        small_cfg.n_tx, dtype=complex)
    x, ybar, z = aux_update(s_bar, q_c, ops, chan.h_c, chan.h_d, 1.0, 1.0)
    return small_cfg, chan, ops, s_bar, q_c, x, ybar, z


def test_overlap_inner_zero_threshold_concentrates_in_radar(small_cfg):
    # anchors consistent with the tiny budget, so the linearized term does
    # not reward information power
    cfg = small_cfg
    chan = sample_channel(cfg, 5)
    ops = build_operators(cfg)
    p_small = 1.0
    lnt = cfg.block_len * cfg.n_tx
    s0 = (p_small / 2 / lnt) * np.eye(lnt, dtype=complex)
    q0 = (p_small / 2 / cfg.n_tx) * np.eye(cfg.n_tx, dtype=complex)
    x, ybar, z = aux_update(s0, q0, ops, chan.h_c, chan.h_d, 1.0, 1.0)
    res = solve_overlap_inner(ops, chan.h_c, chan.h_d, x, ybar, z, 0.0,
                              p_small, 1.0, 1.0)
    tr_s = float(np.trace(res.s_bar.value).real)
    tr_q = float(np.trace(res.q_c.value).real)
    assert tr_s + tr_q <= p_small + 1e-6
    assert tr_q / p_small < 0.05

    # the solver's objective must beat random feasible allocations
    rng = np.random.default_rng(0)

    def objective(s_m, q_m):
        c_q = build_c_of_q(ops, q_m, 1.0)
        inner = c_q + ops.d_mat.conj().T @ s_m @ ops.d_mat
        return (np.linalg.slogdet(inner)[1]
                - float(np.trace(x @ c_q).real))

    best_rand = -np.inf
    for _ in range(1000):
        ws = rng.uniform(0, 1)
        s_m = random_psd(rng, lnt)
        s_m *= ws * p_small / max(np.trace(s_m).real, 1e-12)
        q_m = random_psd(rng, cfg.n_tx)
        q_m *= (1 - ws) * p_small / max(np.trace(q_m).real, 1e-12)
        best_rand = max(best_rand, objective(s_m, q_m))
    assert res.objective >= best_rand - 1e-6


def test_overlap_inner_complementary_slackness(overlap_instance):
    cfg, chan, ops, s_bar, q_c, x, ybar, z = overlap_instance
    # the slack-multiplier product vanishes at any KKT point; the designs
    # here always activate the secrecy constraint for positive thresholds,
    # so the implication "slack large => multiplier small" is checked in
    # product form
    for r_hat in (1e-3, 2.0 * LN2):
        res = solve_overlap_inner(ops, chan.h_c, chan.h_d, x, ybar, z, r_hat,
                                  cfg.p_total, 1.0, 1.0)
        assert res.secrecy_slack * res.lambda_secrecy <= 1e-5 * (1 + r_hat)
        if res.secrecy_slack > 0.1:
            assert res.lambda_secrecy < 1e-5


def test_overlap_inner_kkt_residual(overlap_instance):
    cfg, chan, ops, s_bar, q_c, x, ybar, z = overlap_instance
    res = solve_overlap_inner(ops, chan.h_c, chan.h_d, x, ybar, z,
                              3.0 * LN2, cfg.p_total, 1.0, 1.0)
    assert res.kkt_residual < 1e-5


def test_overlap_inner_improves_on_warm_start(overlap_instance):
    cfg, chan, ops, s_bar, q_c, x, ybar, z = overlap_instance

    def objective(s_m, q_m):
        c_q = build_c_of_q(ops, q_m, 1.0)
        inner = c_q + ops.d_mat.conj().T @ s_m @ ops.d_mat
        return (np.linalg.slogdet(inner)[1]
                - float(np.trace(x @ c_q).real))

    res = solve_overlap_inner(ops, chan.h_c, chan.h_d, x, ybar, z,
                              2.0 * LN2, cfg.p_total, 1.0, 1.0,
                              warm=(s_bar, q_c))
    # the warm-start point is feasible for this instance, so the solution
    # must score at least as well
    assert res.objective >= objective(s_bar, q_c) - 1e-6


# ---------------------------------------------------------------------------
# numeric utilities
# ---------------------------------------------------------------------------

def test_logdet_gradient_identity_case():
    grad = logdet_gradient(np.eye(3, dtype=complex), np.zeros((3, 3)), 1.0)
    assert np.allclose(grad, np.eye(3), atol=1e-12)


def test_logdet_gradient_finite_differences():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h = random_complex(rng, m, n)
        q = random_psd(rng, n)
        sigma2 = float(rng.uniform(0.5, 2.0))
        grad = logdet_gradient(h, q, sigma2)
        delta = random_complex(rng, n, n)
        delta = 0.5 * (delta + delta.conj().T)

        def f(qq):
            return float(np.linalg.slogdet(
                h @ qq @ h.conj().T + sigma2 * np.eye(m))[1])

        eps = 1e-6
        fd = (f(q + eps * delta) - f(q - eps * delta)) / (2 * eps)
        an = float(np.trace(grad @ delta).real)
        assert abs(fd - an) <= 1e-5 * max(1.0, abs(an))


def test_logdet_gradient_noise_scaling():
    rng = np.random.default_rng(2)
    h = random_complex(rng, 3, 3)
    q = random_psd(rng, 3)
    sigma2 = 1.7
    direct = logdet_gradient(h, q, sigma2)
    rescaled = logdet_gradient(h, q / sigma2, 1.0) / sigma2
    assert np.allclose(direct, rescaled, atol=1e-10)


def test_psd_project_clips_diagonal():
    out = psd_project(np.diag([1.0, -2.0]).astype(complex)).value
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_psd_project_idempotent_on_psd():
    rng = np.random.default_rng(3)
    q = random_psd(rng, 4)
    assert np.linalg.norm(psd_project(q).value - q) < 1e-12


def test_psd_project_matches_eigen_clip_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m = random_complex(rng, 4, 4)
        m = 0.5 * (m + m.conj().T)
        out = psd_project(m).value
        w, v = np.linalg.eigh(m)
        oracle = (v * np.clip(w, 0, None)) @ v.conj().T
        assert np.linalg.norm(out - oracle) < 1e-10
        # Frobenius-nearest: no Hermitian PSD point is closer
        for _ in range(20):
            cand = psd_project(oracle + 0.1 * random_psd(rng, 4)).value
            assert (np.linalg.norm(m - out)
                    <= np.linalg.norm(m - cand) + 1e-12)


def test_psd_variable_validation():
    with pytest.raises(ValueError):
        PsdVariable.wrap(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        PsdVariable.wrap(np.diag([1.0, -1e-3]))
    v = PsdVariable.wrap(np.eye(3))
    assert v.dim == 3


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol=-1.0)
    with pytest.raises(ValueError):
        SolverOptions(max_outer_iters=0)
    assert SolverOptions().tol == 0.01
    assert SolverOptions().max_outer_iters == 100
