"""Information-theoretic metrics for the legitimate and eavesdropping links.

Per-use quantities apply to the disjoint-resource mode; block quantities
(``L`` uses jointly, radar waveform acting as structured interference)
apply to the shared-resource mode.  All optimization-facing values are kept
in nats internally; everything reported here is in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import check_hermitian

__all__ = [
    "SecrecyConstraintParams",
    "capacity_cr",
    "capacity_rr",
    "secrecy_capacity",
    "block_capacities",
    "block_secrecy_rate",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SecrecyConstraintParams:
    """Threshold and constants entering the secrecy constraint.

    ``c_a`` is the noise-ratio constant in bits; ``n_bar`` is the additive
    constant of the variational (nat-domain) form of the constraint, so it
    equals ``n_rr + c_a*ln(2)``; ``r_bar`` is the threshold in nats.  With
    unit noise variances ``c_a = 0`` and ``n_bar = n_rr``.
    """

    r_m: float
    c_a: float
    n_bar: float
    r_bar: float

    @classmethod
    def create(cls, r_m: float, sigma2_r: float, sigma2_c: float,
               n_rr: int, n_cr: int) -> "SecrecyConstraintParams":
        if r_m < 0:
            raise ValueError(f"secrecy threshold must be >= 0, got {r_m}")
        c_a = n_rr * math.log2(sigma2_r) - n_cr * math.log2(sigma2_c)
        return cls(r_m=float(r_m), c_a=c_a, n_bar=n_rr + c_a * LN2,
                   r_bar=float(r_m) * LN2)


def _logdet_psd(m: np.ndarray) -> float:
    """log-determinant (nats) of a Hermitian PSD matrix plus implicit identity shift."""
    sign, val = np.linalg.slogdet(m)
    if sign.real <= 0:
        raise ValueError("matrix has non-positive determinant")
    return float(val)


def _check_psd(q: np.ndarray, name: str = "q_c") -> np.ndarray:
    q = check_hermitian(np.asarray(q, dtype=complex), name)
    ev = np.linalg.eigvalsh(q)
    floor = -1e-9 * max(ev[-1], 1e-30) - 1e-12
    if ev[0] < floor:
        raise ValueError(f"{name} is not positive semidefinite (min eig {ev[0]:.3e})")
    return q


def capacity_cr(h_c: np.ndarray, q_c: np.ndarray, sigma2_c: float) -> float:
    """Transmitter-CR channel capacity in bits per channel use."""
    q_c = _check_psd(q_c)
    m = h_c.shape[0]
    inner = h_c @ q_c @ h_c.conj().T / sigma2_c + np.eye(m)
    return _logdet_psd(inner) / LN2


def capacity_rr(h_d: np.ndarray, q_c: np.ndarray, sigma2_r: float) -> float:
    """Capacity of the information leak to the radar receiver (bits/use)."""
    q_c = _check_psd(q_c)
    n = h_d.shape[0]
    inner = h_d @ q_c @ h_d.conj().T / sigma2_r + np.eye(n)
    return _logdet_psd(inner) / LN2


def secrecy_capacity(h_c: np.ndarray, h_d: np.ndarray, q_c: np.ndarray,
                     sigma2_c: float, sigma2_r: float) -> float:
    """``max(0, C_c - C_r)`` in bits per channel use."""
    return max(0.0, capacity_cr(h_c, q_c, sigma2_c)
               - capacity_rr(h_d, q_c, sigma2_r))


def _block_channel(h: np.ndarray, l: int) -> np.ndarray:
    return np.kron(np.eye(l), h)


def block_capacities(h_c: np.ndarray, h_d: np.ndarray, s_r: np.ndarray,
                     q_c: np.ndarray, sigma2_c: float, sigma2_r: float,
                     l: int) -> tuple[float, float]:
    """Per-block capacities of both links under shared resources (bits/block).

    The radar waveform contributes ``s_r s_r^H`` as interference covariance
    at both receivers; the RR noise variance is used for the direct-path
    block as well.
    """
    s_bar = np.outer(s_r, s_r.conj())
    return block_capacities_gram(h_c, h_d, s_bar, q_c, sigma2_c, sigma2_r, l)


def block_capacities_gram(h_c: np.ndarray, h_d: np.ndarray, s_bar: np.ndarray,
                          q_c: np.ndarray, sigma2_c: float, sigma2_r: float,
                          l: int) -> tuple[float, float]:
    """Block capacities with the radar signal given by its Gram matrix."""
    q_c = _check_psd(q_c)
    hc_bar = _block_channel(h_c, l)
    hd_bar = _block_channel(h_d, l)
    lm, ln = hc_bar.shape[0], hd_bar.shape[0]
    q_bar = np.kron(np.eye(l), q_c)

    r_c = hc_bar @ s_bar @ hc_bar.conj().T + sigma2_c * np.eye(lm)
    r_d = hd_bar @ s_bar @ hd_bar.conj().T + sigma2_r * np.eye(ln)
    sig_c = hc_bar @ q_bar @ hc_bar.conj().T
    sig_d = hd_bar @ q_bar @ hd_bar.conj().T

    c_c = (_logdet_psd(r_c + sig_c) - _logdet_psd(r_c)) / LN2
    c_d = (_logdet_psd(r_d + sig_d) - _logdet_psd(r_d)) / LN2
    return max(0.0, c_c), max(0.0, c_d)


def block_secrecy_rate(h_c: np.ndarray, h_d: np.ndarray, s_r: np.ndarray,
                       q_c: np.ndarray, sigma2_c: float, sigma2_r: float,
                       l: int) -> float:
    """``max(0, C~_c - C~_d)`` in bits per block of ``l`` uses."""
    c_c, c_d = block_capacities(h_c, h_d, s_r, q_c, sigma2_c, sigma2_r, l)
    return max(0.0, c_c - c_d)


def block_secrecy_rate_gram(h_c: np.ndarray, h_d: np.ndarray, s_bar: np.ndarray,
                            q_c: np.ndarray, sigma2_c: float, sigma2_r: float,
                            l: int) -> float:
    """Block secrecy rate when the radar signal is given as a Gram matrix."""
    c_c, c_d = block_capacities_gram(h_c, h_d, s_bar, q_c, sigma2_c, sigma2_r, l)
    return max(0.0, c_c - c_d)
