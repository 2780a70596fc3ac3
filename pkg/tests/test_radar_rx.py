import math

import numpy as np
import pytest
import scipy.linalg

from radcom import ScenarioConfig, build_operators, build_c_of_q
from radcom.errors import NotPositiveDefinite
from radcom.radar_rx import (optimal_waveform, optimal_weight,
                             sinr_nonoverlap, sinr_nonoverlap_at_weight,
                             sinr_overlap, sinr_overlap_at_weight)

from conftest import random_cfg, random_complex, random_psd


@pytest.fixture
def ops(default_cfg):
    return build_operators(default_cfg)


def test_identity_whitening_gives_matched_filter(ops):
    rng = np.random.default_rng(0)
    s = random_complex(rng, ops.d_mat.shape[0])
    w = optimal_weight(np.eye(ops.c_mat.shape[0]), ops.d_mat, s).w
    mf = ops.d_mat.conj().T @ s
    mf = mf / np.vdot(mf, mf).real
    assert np.allclose(w, mf, atol=1e-10)
    assert abs(np.vdot(s, ops.d_mat @ w) - 1.0) < 1e-9


def test_weight_constraint_and_quotient_optimality(ops):
    rng = np.random.default_rng(1)
    s = random_complex(rng, ops.d_mat.shape[0])
    w = optimal_weight(ops.c_mat, ops.d_mat, s).w
    assert abs(np.vdot(s, ops.d_mat @ w) - 1.0) < 1e-9
    best = abs(np.vdot(s, ops.d_mat @ w)) ** 2 / np.vdot(w, ops.c_mat @ w).real
    for _ in range(1000):
        u = random_complex(rng, w.size)
        quot = (abs(np.vdot(s, ops.d_mat @ u)) ** 2
                / np.vdot(u, ops.c_mat @ u).real)
        assert quot <= best * (1 + 1e-9)


def test_weight_matches_generalized_eigenvector(ops):
    rng = np.random.default_rng(2)
    s = random_complex(rng, ops.d_mat.shape[0])
    w = optimal_weight(ops.c_mat, ops.d_mat, s).w
    rhs = ops.d_mat.conj().T @ s
    _, vecs = scipy.linalg.eigh(np.outer(rhs, rhs.conj()), ops.c_mat)
    lead = vecs[:, -1]
    cos_dist = 1 - abs(np.vdot(lead, w)) / (np.linalg.norm(lead)
                                            * np.linalg.norm(w))
    assert cos_dist < 1e-8


def test_weight_rejects_singular_operator(ops):
    s = np.ones(ops.d_mat.shape[0], dtype=complex)
    singular = np.zeros_like(ops.c_mat)
    with pytest.raises(NotPositiveDefinite, match="not positive definite"):
        optimal_weight(singular, ops.d_mat, s)


def test_sinr_zero_waveform(ops, default_cfg):
    assert sinr_nonoverlap(ops, np.zeros(ops.d_mat.shape[0], dtype=complex),
                           default_cfg.sigma2_r) == 0.0


def test_sinr_quadratic_scaling(ops, default_cfg):
    rng = np.random.default_rng(3)
    s = random_complex(rng, ops.d_mat.shape[0])
    base = sinr_nonoverlap(ops, s, default_cfg.sigma2_r)
    scaled = sinr_nonoverlap(ops, (1.7 - 0.3j) * s, default_cfg.sigma2_r)
    assert abs(scaled - abs(1.7 - 0.3j) ** 2 * base) < 1e-9 * scaled


def test_sinr_closed_form_agrees_with_weight_evaluation():
    rng = np.random.default_rng(4)
    for _ in range(10):
        cfg = random_cfg(rng)
        ops = build_operators(cfg)
        s = random_complex(rng, ops.d_mat.shape[0])
        closed = sinr_nonoverlap(ops, s, cfg.sigma2_r)
        w = optimal_weight(ops.c_mat, ops.d_mat, s).w
        direct = sinr_nonoverlap_at_weight(ops, w, s, cfg.sigma2_r)
        assert abs(closed - direct) <= 1e-8 * max(closed, 1e-30)


def test_weight_scale_invariance(ops, default_cfg):
    rng = np.random.default_rng(5)
    s = random_complex(rng, ops.d_mat.shape[0])
    w = optimal_weight(ops.c_mat, ops.d_mat, s).w
    v0 = sinr_nonoverlap_at_weight(ops, w, s, default_cfg.sigma2_r)
    for alpha in (2.0, -0.3 + 1.1j, 1e3):
        v = sinr_nonoverlap_at_weight(ops, alpha * w, s, default_cfg.sigma2_r)
        assert abs(v - v0) < 1e-10 * v0


def test_optimal_waveform_zero_power(ops):
    design = optimal_waveform(ops, 0.0)
    assert np.allclose(design.s_r, 0.0)
    assert sinr_nonoverlap(ops, design.s_r, 1.0) == 0.0


def test_optimal_waveform_norm_and_linearity(ops, default_cfg):
    d1 = optimal_waveform(ops, 12.0)
    assert abs(np.linalg.norm(d1.s_r) ** 2 - 12.0) < 1e-9 * 12.0
    s1 = sinr_nonoverlap(ops, d1.s_r, default_cfg.sigma2_r)
    s2 = sinr_nonoverlap(ops, optimal_waveform(ops, 24.0).s_r,
                         default_cfg.sigma2_r)
    assert abs(s2 - 2 * s1) < 1e-9 * s2


def test_optimal_waveform_beats_random_directions(ops, default_cfg):
    rng = np.random.default_rng(6)
    p_r = 5.0
    best = sinr_nonoverlap(ops, optimal_waveform(ops, p_r).s_r,
                           default_cfg.sigma2_r)
    for _ in range(1000):
        u = random_complex(rng, ops.d_mat.shape[0])
        u *= np.sqrt(p_r) / np.linalg.norm(u)
        assert sinr_nonoverlap(ops, u, default_cfg.sigma2_r) <= best * (1 + 1e-9)


def test_overlap_sinr_reduces_to_nonoverlap_at_zero_covariance():
    cfg = ScenarioConfig(sigma2_r=1.0)
    ops = build_operators(cfg)
    rng = np.random.default_rng(7)
    s = random_complex(rng, ops.d_mat.shape[0])
    q0 = np.zeros((cfg.n_tx, cfg.n_tx), dtype=complex)
    assert abs(sinr_overlap(ops, s, q0, 1.0)
               - sinr_nonoverlap(ops, s, 1.0)) < 1e-9


def test_overlap_sinr_psd_ordering():
    rng = np.random.default_rng(8)
    for _ in range(10):
        cfg = random_cfg(rng)
        ops = build_operators(cfg)
        s = random_complex(rng, ops.d_mat.shape[0])
        q1 = random_psd(rng, cfg.n_tx)
        q2 = q1 + random_psd(rng, cfg.n_tx)  # q2 >= q1 in the PSD order
        v1 = sinr_overlap(ops, s, q1, cfg.sigma2_r)
        v2 = sinr_overlap(ops, s, q2, cfg.sigma2_r)
        assert v2 <= v1 * (1 + 1e-9) + 1e-12


def _moderate_cfg(rng):
    """Random scenario with gains kept small enough that both sides of a
    determinant identity are evaluable to well below 1e-8 relative."""
    cfg = random_cfg(rng)
    return ScenarioConfig(
        n_tx=cfg.n_tx, n_rr=cfg.n_rr, n_cr=cfg.n_cr, block_len=cfg.block_len,
        theta_t=cfg.theta_t, theta_r=cfg.theta_r, theta_t0=cfg.theta_t0,
        theta_r0=cfg.theta_r0, snr_direct_db=float(rng.uniform(0, 10)),
        snr_surv_db=float(rng.uniform(0, 5)), snr_comm_db=cfg.snr_comm_db)


def test_overlap_determinant_identity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        cfg = _moderate_cfg(rng)
        ops = build_operators(cfg)
        s = random_complex(rng, ops.d_mat.shape[0])
        q = random_psd(rng, cfg.n_tx)
        c_q = build_c_of_q(ops, q, cfg.sigma2_r)
        sinr = sinr_overlap(ops, s, q, cfg.sigma2_r)
        rank1 = np.outer(ops.d_mat.conj().T @ s, (ops.d_mat.conj().T @ s).conj())
        # det(I + R C^-1) evaluated as the stable ratio det(C + R) / det(C)
        rhs = math.exp(np.linalg.slogdet(c_q + rank1)[1]
                       - np.linalg.slogdet(c_q)[1])
        assert abs(1 + sinr - rhs) < 1e-8 * abs(1 + sinr)


def test_overlap_logdet_split_identity():
    rng = np.random.default_rng(10)
    for _ in range(10):
        cfg = random_cfg(rng)
        ops = build_operators(cfg)
        s = random_complex(rng, ops.d_mat.shape[0])
        q = random_psd(rng, cfg.n_tx)
        c_q = build_c_of_q(ops, q, cfg.sigma2_r)
        ln = c_q.shape[0]
        rank1 = np.outer(ops.d_mat.conj().T @ s, (ops.d_mat.conj().T @ s).conj())
        lhs = np.linalg.slogdet(np.eye(ln) + rank1 @ np.linalg.inv(c_q))[1]
        rhs = (np.linalg.slogdet(np.linalg.inv(c_q))[1]
               + np.linalg.slogdet(c_q + rank1)[1])
        assert abs(lhs - rhs) < 1e-8


def test_overlap_sinr_agrees_with_weight_form():
    rng = np.random.default_rng(11)
    for _ in range(10):
        cfg = random_cfg(rng)
        ops = build_operators(cfg)
        s = random_complex(rng, ops.d_mat.shape[0])
        q = random_psd(rng, cfg.n_tx)
        c_q = build_c_of_q(ops, q, cfg.sigma2_r)
        w = optimal_weight(c_q, ops.d_mat, s, mode="overlap").w
        closed = sinr_overlap(ops, s, q, cfg.sigma2_r)
        direct = sinr_overlap_at_weight(ops, w, s, q, cfg.sigma2_r)
        assert abs(closed - direct) <= 1e-8 * max(closed, 1e-30)
