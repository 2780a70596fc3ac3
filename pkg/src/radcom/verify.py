"""Fast self-check suite behind the ``verify`` CLI subcommand.

Each check prints one PASS/FAIL line; the suite exits nonzero when any
check fails.  These are smoke-level duplicates of the full test suite,
meant to validate an installation in seconds.
"""

from __future__ import annotations

import math
import tempfile

import numpy as np

from .convex_core import SolverOptions, logdet_gradient, psd_project
from .nonoverlap import (algorithm2, bisect_lambda, g_lambda, update_y,
                         variational_bracket, waterfill_qc)
from .overlap import aux_update, surrogate_secrecy_value
from .radar_rx import optimal_waveform, optimal_weight, sinr_nonoverlap
from .scenario import (ScenarioConfig, build_c_of_q, build_operators,
                       sample_channel, steering_vector)
from .secrecy import LN2, SecrecyConstraintParams, block_capacities_gram

_checks = []


def _check(name):
    def deco(fn):
        _checks.append((name, fn))
        return fn
    return deco


@_check("steering vector phase law and norm")
def _steering():
    v = steering_vector(30.0, 2)
    assert abs(v[0] - 1) < 1e-12 and abs(v[1] - 1j) < 1e-12
    assert abs(np.linalg.norm(steering_vector(40.0, 8)) ** 2 - 8) < 1e-9


@_check("operator dimensions and PSD structure")
def _operators():
    cfg = ScenarioConfig(n_tx=5, n_rr=4, n_cr=4, block_len=10)
    ops = build_operators(cfg)
    assert ops.c_mat.shape == (40, 40) and ops.d_mat.shape == (50, 40)
    assert np.linalg.eigvalsh(ops.c_mat)[0] >= 1 - 1e-9
    assert np.allclose(ops.a_mat.conj().T @ ops.a_mat, ops.ad_mat, atol=1e-8)


@_check("matched-filter channel determinism")
def _channel():
    cfg = ScenarioConfig()
    a = sample_channel(cfg, 123).h_c
    b = sample_channel(cfg, 123).h_c
    assert np.array_equal(a, b)


@_check("determinant identity for the shared-resource SINR")
def _det_identity():
    cfg = ScenarioConfig(n_tx=2, n_rr=2, n_cr=2, block_len=2)
    ops = build_operators(cfg)
    rng = np.random.default_rng(0)
    n_t, l = cfg.n_tx, cfg.block_len
    a = rng.standard_normal((n_t, n_t)) + 1j * rng.standard_normal((n_t, n_t))
    q = a @ a.conj().T
    s = rng.standard_normal(l * n_t) + 1j * rng.standard_normal(l * n_t)
    c_q = build_c_of_q(ops, q, cfg.sigma2_r)
    lhs = 1 + float((s.conj() @ ops.d_mat @ np.linalg.solve(c_q, ops.d_mat.conj().T @ s)).real)
    big = np.eye(c_q.shape[0]) + np.outer(ops.d_mat.conj().T @ s, (s.conj() @ ops.d_mat)) @ np.linalg.inv(c_q)
    rhs = float(np.linalg.det(big).real)
    assert abs(lhs - rhs) < 1e-8 * abs(lhs)


@_check("closed-form weight beats random weights")
def _weight():
    cfg = ScenarioConfig(n_tx=3, n_rr=3, block_len=2)
    ops = build_operators(cfg)
    rng = np.random.default_rng(1)
    s = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    w = optimal_weight(ops.c_mat, ops.d_mat, s).w
    num = abs(np.vdot(s, ops.d_mat @ w)) ** 2
    best = num / np.vdot(w, ops.c_mat @ w).real
    for _ in range(200):
        u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        quot = abs(np.vdot(s, ops.d_mat @ u)) ** 2 / np.vdot(u, ops.c_mat @ u).real
        assert quot <= best * (1 + 1e-9)


@_check("variational lower bound attained at the exact inverse")
def _variational():
    rng = np.random.default_rng(2)
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 9)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q = a @ a.conj().T
    y = update_y(chan.h_d, q, 1.0)
    target = float(np.linalg.slogdet(y)[1])
    val = variational_bracket(y, chan.h_d, q, 1.0)
    assert abs(val - target) < 1e-9
    for _ in range(20):
        p = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        y_pert = y + 0.01 * (p @ p.conj().T)
        assert variational_bracket(y_pert, chan.h_d, q, 1.0) <= val + 1e-9


@_check("water-filling solves the scalar case by hand")
def _waterfill_scalar():
    h_c = np.array([[2.0 + 0j]])
    h_d = np.array([[0.5 + 0j]])
    y = np.array([[0.8 + 0j]])
    lam = 1.7
    sol = waterfill_qc(lam, y, h_c, h_d, 1.0)
    p = 1 + lam * 0.25 * 0.8
    expected = max(0.0, lam - p / 4.0) / p
    assert abs(sol.q_c[0, 0].real - expected) < 1e-12


@_check("bisection drives the constraint residual to zero")
def _bisect():
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 4)
    params = SecrecyConstraintParams.create(2.0, 1.0, 1.0, 4, 4)
    q0 = 3.75 * np.eye(4, dtype=complex)
    y = update_y(chan.h_d, q0, 1.0)
    lam, _ = bisect_lambda(y, chan.h_c, chan.h_d, params, 1.0, 1.0)
    assert lam > 0
    assert abs(g_lambda(lam, y, chan.h_c, chan.h_d, params, 1.0, 1.0)) <= 1e-6


@_check("zero threshold sends all power to the radar waveform")
def _zero_threshold():
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 11)
    params = SecrecyConstraintParams.create(0.0, 1.0, 1.0, 4, 4)
    res = algorithm2(cfg, chan, params)
    ops = build_operators(cfg)
    lam_max = np.linalg.eigvalsh(
        ops.d_mat @ np.linalg.solve(ops.c_mat, ops.d_mat.conj().T))[-1]
    expected = cfg.p_total * lam_max / cfg.sigma2_r
    assert res.feasible and abs(res.sinr - expected) < 1e-8 * expected


@_check("achieved secrecy meets the threshold on a feasible instance")
def _threshold_met():
    cfg = ScenarioConfig()
    chan = sample_channel(cfg, 3)
    params = SecrecyConstraintParams.create(2.0, 1.0, 1.0, 4, 4)
    res = algorithm2(cfg, chan, params)
    assert res.feasible and abs(res.achieved_secrecy - 2.0) <= 1e-3


@_check("log-det gradient matches finite differences")
def _gradient():
    rng = np.random.default_rng(5)
    h = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q = a @ a.conj().T
    grad = logdet_gradient(h, q, 1.3)
    d = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    d = 0.5 * (d + d.conj().T)
    eps = 1e-6

    def f(qq):
        m = h @ qq @ h.conj().T + 1.3 * np.eye(3)
        return float(np.linalg.slogdet(m)[1])

    fd = (f(q + eps * d) - f(q - eps * d)) / (2 * eps)
    an = float(np.trace(grad @ d).real)
    assert abs(fd - an) < 1e-5 * max(1.0, abs(an))


@_check("PSD projection clips negative eigenvalues")
def _projection():
    m = np.diag([1.0, -2.0]).astype(complex)
    out = psd_project(m).value
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


@_check("surrogate secrecy is tight at the anchor")
def _tightness():
    cfg = ScenarioConfig(n_tx=2, n_rr=3, n_cr=3, block_len=3)
    chan = sample_channel(cfg, 5)
    ops = build_operators(cfg)
    lnt = cfg.block_len * cfg.n_tx
    s_bar = 2.5 * np.eye(lnt, dtype=complex)
    q_c = 7.5 * np.eye(cfg.n_tx, dtype=complex)
    _, ybar, z = aux_update(s_bar, q_c, ops, chan.h_c, chan.h_d, 1.0, 1.0)
    surr = surrogate_secrecy_value(s_bar, q_c, ybar, z, chan.h_c, chan.h_d,
                                   1.0, 1.0)
    cc_, cd_ = block_capacities_gram(chan.h_c, chan.h_d, s_bar, q_c, 1.0, 1.0,
                                     cfg.block_len)
    assert abs(surr - LN2 * (cc_ - cd_)) < 1e-7


def run_verification(verbose: bool = True) -> int:
    failures = 0
    for name, fn in _checks:
        try:
            fn()
        except Exception as exc:
            failures += 1
            print(f"FAIL  {name}: {exc}")
            continue
        if verbose:
            print(f"PASS  {name}")
    total = len(_checks)
    print(f"{total - failures}/{total} checks passed")
    return 0 if failures == 0 else 1
