"""Radar receive processing: optimal weight, optimal waveform, SINR.

The receiver applies a linear spatio-temporal weight ``w`` to the
surveillance snapshot; the closed-form optimum whitens with the
interference-plus-noise operator and matched-filters the coupled waveform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import NotPositiveDefinite
from .scenario import RadarOperators, build_c_of_q

__all__ = [
    "ReceiverWeight",
    "WaveformDesign",
    "optimal_weight",
    "optimal_waveform",
    "sinr_nonoverlap",
    "sinr_overlap",
    "sinr_nonoverlap_at_weight",
    "sinr_overlap_at_weight",
    "leading_eigvec",
]


@dataclass(frozen=True)
class ReceiverWeight:
    w: np.ndarray
    mode: str  # "non_overlap" | "overlap"


@dataclass(frozen=True)
class WaveformDesign:
    s_r: np.ndarray
    p_r: float


def _chol_solve(c_like: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``c_like @ x = rhs`` via Cholesky; reject indefinite operators."""
    try:
        factor = cho_factor(c_like, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotPositiveDefinite("operator not positive definite") from exc
    return cho_solve(factor, rhs, check_finite=False)


def leading_eigvec(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenpair of a Hermitian matrix with a deterministic phase.

    The eigenvector is rotated so its first component of significant
    magnitude is real and positive, which pins the output when the LAPACK
    phase is arbitrary.  Degenerate top eigenvalues keep LAPACK's ordering;
    any vector in the eigenspace attains the same quadratic form.
    """
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    v = vecs[:, -1]
    mags = np.abs(v)
    k = int(np.argmax(mags > 1e-8 * mags.max()))
    phase = v[k] / abs(v[k])
    return float(vals[-1]), v * phase.conj()


def optimal_weight(c_like: np.ndarray, d_mat: np.ndarray, s_r: np.ndarray,
                   mode: str = "non_overlap") -> ReceiverWeight:
    """Closed-form optimum weight for the unit-response beamforming problem.

    ``w = C^{-1} D^H s_r / (s_r^H D C^{-1} D^H s_r)``; it maximizes the
    generalized Rayleigh quotient and satisfies ``s_r^H D w = 1``.
    """
    rhs = d_mat.conj().T @ s_r
    x = _chol_solve(c_like, rhs)
    denom = np.vdot(rhs, x).real
    if denom <= 0:
        raise NotPositiveDefinite("operator not positive definite")
    return ReceiverWeight(w=x / denom, mode=mode)


def sinr_nonoverlap(ops: RadarOperators, s_r: np.ndarray, sigma2_r: float) -> float:
    """Output SINR for disjoint-resource operation at the optimum weight."""
    rhs = ops.d_mat.conj().T @ s_r
    x = _chol_solve(ops.c_mat, rhs)
    return float(np.vdot(rhs, x).real / sigma2_r)


def optimal_waveform(ops: RadarOperators, p_r: float) -> WaveformDesign:
    """Power-scaled leading eigenvector of ``D C^{-1} D^H``."""
    if p_r < 0:
        raise ValueError(f"radar power must be >= 0, got {p_r}")
    gram = ops.d_mat @ _chol_solve(ops.c_mat, ops.d_mat.conj().T)
    _, v = leading_eigvec(gram)
    return WaveformDesign(s_r=np.sqrt(p_r) * v, p_r=float(p_r))


def sinr_overlap(ops: RadarOperators, s_r: np.ndarray, q_c: np.ndarray,
                 sigma2_r: float) -> float:
    """Output SINR when radar and information signals share resources."""
    c_q = build_c_of_q(ops, q_c, sigma2_r)
    rhs = ops.d_mat.conj().T @ s_r
    x = _chol_solve(c_q, rhs)
    return float(np.vdot(rhs, x).real)


def sinr_nonoverlap_at_weight(ops: RadarOperators, w: np.ndarray,
                              s_r: np.ndarray, sigma2_r: float) -> float:
    """SINR of an arbitrary weight, from the signal/interference/noise terms.

    Used as the independent cross-check of the closed-form expression.
    """
    sig = abs(np.vdot(w, ops.as_mat @ (ops.ad_mat @ s_r))) ** 2
    interf = np.linalg.norm(w.conj() @ ops.as_mat @ ops.a_mat.conj().T) ** 2
    noise = np.vdot(w, w).real
    return float(sig / (interf + noise) / sigma2_r)


def sinr_overlap_at_weight(ops: RadarOperators, w: np.ndarray, s_r: np.ndarray,
                           q_c: np.ndarray, sigma2_r: float) -> float:
    """Rayleigh-quotient SINR of an arbitrary weight in the shared-resource mode."""
    c_q = build_c_of_q(ops, q_c, sigma2_r)
    sig = abs(np.vdot(w, ops.as_mat @ (ops.ad_mat @ s_r))) ** 2
    return float(sig / np.vdot(w, c_q @ w).real)
