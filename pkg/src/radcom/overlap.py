"""SDR-based alternating optimization for the shared-resource case.

The radar Gram matrix and the information covariance are optimized jointly:
auxiliary matrices make both the objective and the secrecy constraint
concave surrogates that are tight at the current iterate, the relaxed inner
problem is solved by the interior-point engine, and a rank-one waveform is
extracted at the end (directly when the Gram matrix is essentially rank
one, by Gaussian randomization otherwise).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblem, NotConverged
from . import convex_core
from .convex_core import SolverOptions
from .nonoverlap import SolveResult
from .radar_rx import leading_eigvec, optimal_waveform, sinr_nonoverlap, sinr_overlap
from .scenario import (ChannelRealization, RadarOperators, ScenarioConfig,
                       build_c_of_q, build_operators)
from .secrecy import LN2, block_capacities_gram, block_secrecy_rate

__all__ = [
    "OverlapIterate",
    "aux_update",
    "ao_overlap",
    "rank_one_extract",
    "surrogate_secrecy_value",
]

RANK_ONE_RATIO = 1e-6
N_RANDOMIZATIONS = 100
SECRECY_MARGIN_BITS = 1e-3


@dataclass(frozen=True)
class OverlapIterate:
    """One AO round: decision matrices, auxiliary matrices, objective value."""

    s_bar: np.ndarray
    q_c: np.ndarray
    x_mat: np.ndarray
    ybar_mat: np.ndarray
    z_mat: np.ndarray
    objective: float


def _kron_channel(h: np.ndarray, l: int) -> np.ndarray:
    return np.kron(np.eye(l), np.asarray(h, dtype=complex))


def aux_update(s_bar: np.ndarray, q_c: np.ndarray, ops: RadarOperators,
               h_c: np.ndarray, h_d: np.ndarray, sigma2_c: float,
               sigma2_r: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form auxiliary matrices anchored at the current iterate."""
    n_t = h_c.shape[1]
    l = s_bar.shape[0] // n_t
    hc_bar = _kron_channel(h_c, l)
    hd_bar = _kron_channel(h_d, l)
    q_bar = np.kron(np.eye(l), q_c)

    x = np.linalg.inv(build_c_of_q(ops, q_c, sigma2_r))
    inner_y = (hd_bar @ (s_bar + q_bar) @ hd_bar.conj().T
               + sigma2_r * np.eye(hd_bar.shape[0]))
    ybar = np.linalg.inv(0.5 * (inner_y + inner_y.conj().T))
    inner_z = (hc_bar @ s_bar @ hc_bar.conj().T
               + sigma2_c * np.eye(hc_bar.shape[0]))
    z = np.linalg.inv(0.5 * (inner_z + inner_z.conj().T))
    sym = lambda m: 0.5 * (m + m.conj().T)
    return sym(x), sym(ybar), sym(z)


def surrogate_secrecy_value(s_bar: np.ndarray, q_c: np.ndarray,
                            ybar_mat: np.ndarray, z_mat: np.ndarray,
                            h_c: np.ndarray, h_d: np.ndarray,
                            sigma2_c: float, sigma2_r: float) -> float:
    """Surrogate secrecy expression (nats/block) at given auxiliaries."""
    n_t = h_c.shape[1]
    l = s_bar.shape[0] // n_t
    hc_bar = _kron_channel(h_c, l)
    hd_bar = _kron_channel(h_d, l)
    q_bar = np.kron(np.eye(l), q_c)
    lm, ln = hc_bar.shape[0], hd_bar.shape[0]

    def logdet(m):
        return float(np.linalg.slogdet(0.5 * (m + m.conj().T))[1])

    total = logdet(hc_bar @ (s_bar + q_bar) @ hc_bar.conj().T
                   + sigma2_c * np.eye(lm))
    total += logdet(ybar_mat) + ln
    total -= float(np.trace(ybar_mat @ (
        hd_bar @ (s_bar + q_bar) @ hd_bar.conj().T
        + sigma2_r * np.eye(ln))).real)
    total += logdet(hd_bar @ s_bar @ hd_bar.conj().T + sigma2_r * np.eye(ln))
    total += logdet(z_mat) + lm
    total -= float(np.trace(z_mat @ (
        hc_bar @ s_bar @ hc_bar.conj().T + sigma2_c * np.eye(lm))).real)
    return total


def rank_one_extract(s_bar: np.ndarray, ops: RadarOperators, h_c: np.ndarray,
                     h_d: np.ndarray, q_c: np.ndarray, sigma2_c: float,
                     sigma2_r: float, r_tilde: float,
                     rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Waveform recovery from the relaxed Gram matrix.

    Returns ``(s_r, ok)``.  When the Gram matrix is essentially rank one its
    scaled principal eigenvector is returned directly; otherwise Gaussian
    candidates drawn with covariance ``s_bar`` are rescaled to the full
    allocated power and the best one meeting the secrecy threshold wins.
    ``ok`` is False when every candidate violates the threshold, in which
    case the principal eigenvector is returned as the fallback.
    """
    vals, vecs = np.linalg.eigh(0.5 * (s_bar + s_bar.conj().T))
    power = float(np.trace(s_bar).real)
    lam1, v1 = leading_eigvec(s_bar)
    principal = np.sqrt(power) * v1
    if vals.size == 1 or max(vals[-2], 0.0) < RANK_ONE_RATIO * max(lam1, 1e-300):
        return np.sqrt(max(lam1, 0.0)) * v1, True

    l = s_bar.shape[0] // h_c.shape[1]
    scale_vecs = vecs * np.sqrt(np.clip(vals, 0.0, None))
    best = None
    best_sinr = -np.inf
    n = s_bar.shape[0]
    for _ in range(N_RANDOMIZATIONS):
        g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        cand = scale_vecs @ g
        norm = np.linalg.norm(cand)
        if norm < 1e-12:
            continue
        cand *= np.sqrt(power) / norm
        rate = block_secrecy_rate(h_c, h_d, cand, q_c, sigma2_c, sigma2_r, l)
        if rate < r_tilde - SECRECY_MARGIN_BITS:
            continue
        cand_sinr = sinr_overlap(ops, cand, q_c, sigma2_r)
        if cand_sinr > best_sinr:
            best_sinr = cand_sinr
            best = cand
    if best is None:
        return principal, False
    return best, True


def ao_overlap(cfg: ScenarioConfig, chan: ChannelRealization, r_tilde: float,
               opts: SolverOptions | None = None,
               ops: RadarOperators | None = None,
               rng: np.random.Generator | None = None,
               trace_sink=None) -> SolveResult:
    """Alternating SDR optimization of the shared-resource transmit design.

    ``r_tilde`` is the per-block secrecy threshold in bits.  The returned
    result carries the extracted waveform, its SINR and the block secrecy
    rate it achieves; ``trace_qc`` holds the inner objective sequence.
    """
    opts = opts or SolverOptions()
    ops = ops or build_operators(cfg)
    rng = rng or np.random.default_rng(0)
    if r_tilde < 0:
        raise ValueError(f"secrecy threshold must be >= 0, got {r_tilde}")

    n_t, l = cfg.n_tx, cfg.block_len
    lnt = l * n_t
    if r_tilde == 0:
        # zero threshold: interference from the information signal can only
        # reduce the SINR, so the exact optimum is the full-power radar design
        design = optimal_waveform(ops, cfg.p_total)
        return SolveResult(q_c=np.zeros((n_t, n_t), dtype=complex),
                           p_r=cfg.p_total, s_r=design.s_r,
                           sinr=sinr_nonoverlap(ops, design.s_r, cfg.sigma2_r),
                           achieved_secrecy=0.0, feasible=True, outer_iters=0,
                           inner_iters_total=0, status="converged",
                           trace_qc=[], solver="overlap")
    r_hat = r_tilde * LN2
    s_bar = (cfg.p_total / 2.0) / lnt * np.eye(lnt, dtype=complex)
    q_c = (cfg.p_total / 2.0) / n_t * np.eye(n_t, dtype=complex)

    objectives: list[float] = []
    inner_total = 0
    outer = 0
    status = "max_iters"
    prev_obj = None
    surrogate_gap = 0.0
    for outer in range(1, opts.max_outer_iters + 1):
        x_mat, ybar, z_mat = aux_update(s_bar, q_c, ops, chan.h_c, chan.h_d,
                                        cfg.sigma2_c, cfg.sigma2_r)
        c_c, c_d = block_capacities_gram(chan.h_c, chan.h_d, s_bar, q_c,
                                         cfg.sigma2_c, cfg.sigma2_r, l)
        anchored = surrogate_secrecy_value(s_bar, q_c, ybar, z_mat, chan.h_c,
                                           chan.h_d, cfg.sigma2_c,
                                           cfg.sigma2_r)
        surrogate_gap = max(surrogate_gap,
                            abs(anchored - LN2 * (c_c - c_d)))
        try:
            res = convex_core.solve_overlap_inner(
                ops, chan.h_c, chan.h_d, x_mat, ybar, z_mat, r_hat,
                cfg.p_total, cfg.sigma2_c, cfg.sigma2_r, opts=opts,
                warm=(s_bar, q_c))
        except InfeasibleProblem:
            return _finalize_infeasible(cfg, chan, ops, "infeasible", outer,
                                        inner_total, objectives)
        except NotConverged:
            return _finalize_infeasible(cfg, chan, ops, "not_converged",
                                        outer, inner_total, objectives)
        inner_total += res.newton_iters
        s_bar, q_c = res.s_bar.value, res.q_c.value
        # the raw inner objective drops ln det(X) + LN, which changes with
        # the anchor; re-add it so values are comparable across rounds (the
        # anchored surrogate equals the true objective at the anchor point)
        shift = float(np.linalg.slogdet(x_mat)[1]) + x_mat.shape[0]
        obj = res.objective + shift
        objectives.append(obj)
        if trace_sink is not None:
            cc_new, cd_new = block_capacities_gram(
                chan.h_c, chan.h_d, s_bar, q_c, cfg.sigma2_c, cfg.sigma2_r, l)
            gram = ops.d_mat @ np.linalg.solve(
                build_c_of_q(ops, q_c, cfg.sigma2_r), ops.d_mat.conj().T)
            trace_sink.write(json.dumps(
                {"iteration": outer, "objective": obj,
                 "secrecy": max(0.0, cc_new - cd_new),
                 "sinr": float(np.trace(s_bar @ gram).real),
                 "slack": res.secrecy_slack, "solver": "overlap"}) + "\n")
        if prev_obj is not None and abs(obj - prev_obj) <= opts.tol:
            status = "converged"
            break
        prev_obj = obj

    s_r, extract_ok = rank_one_extract(s_bar, ops, chan.h_c, chan.h_d, q_c,
                                       cfg.sigma2_c, cfg.sigma2_r, r_tilde,
                                       rng)
    sinr = sinr_overlap(ops, s_r, q_c, cfg.sigma2_r)
    achieved = block_secrecy_rate(chan.h_c, chan.h_d, s_r, q_c, cfg.sigma2_c,
                                  cfg.sigma2_r, l)
    feasible = extract_ok and achieved >= r_tilde - SECRECY_MARGIN_BITS
    return SolveResult(q_c=q_c, p_r=float(np.linalg.norm(s_r) ** 2), s_r=s_r,
                       sinr=sinr, achieved_secrecy=achieved,
                       feasible=feasible, outer_iters=outer,
                       inner_iters_total=inner_total,
                       status=status if feasible else "extraction_failed",
                       trace_qc=objectives, solver="overlap",
                       surrogate_gap_max=surrogate_gap)


def _finalize_infeasible(cfg, chan, ops, status, outer, inner_total,
                         objectives) -> SolveResult:
    """Infeasible-run accounting: all power to radar, zero secrecy."""
    design = optimal_waveform(ops, cfg.p_total)
    sinr = sinr_nonoverlap(ops, design.s_r, cfg.sigma2_r)
    n_t = cfg.n_tx
    return SolveResult(q_c=np.zeros((n_t, n_t), dtype=complex),
                       p_r=cfg.p_total, s_r=design.s_r, sinr=sinr,
                       achieved_secrecy=0.0, feasible=False,
                       outer_iters=outer, inner_iters_total=inner_total,
                       status=status, trace_qc=objectives, solver="overlap")
