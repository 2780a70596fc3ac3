"""Scenario construction: array geometry, channel operators, random channels.

One transmitter (``n_tx`` antennas) serves a communication receiver
(``n_cr`` antennas) while a passive radar receiver listens with ``n_rr``
antennas on each of its two channel groups (direct and surveillance).
This module builds the deterministic spatio-temporal operators used by the
radar receive chain and draws random transmitter-CR channels.

Conventions (documented also in the CLI help):

* uniform linear arrays with half-wavelength spacing, element 0 as phase
  reference, so the steering phase law is ``exp(1j*pi*k*sin(theta))``;
* noise variances default to 1 and path gains are set from the average
  per-element SNRs: ``|gamma_d|^2 = 10**(snr_direct_db/10) * sigma2_r``,
  ``|gamma_t|^2 = 10**(snr_surv_db/10) * sigma2_r`` and the transmitter-CR
  channel entries have variance ``10**(snr_comm_db/10) * sigma2_c``;
* gain phases default to zero (only magnitudes enter the averaged
  performance figures) but explicit complex gains are accepted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

__all__ = [
    "ScenarioConfig",
    "ChannelRealization",
    "RadarOperators",
    "steering_vector",
    "build_operators",
    "build_c_of_q",
    "sample_channel",
]

_CONFIG_FIELDS = (
    "n_tx", "n_rr", "n_cr", "block_len",
    "theta_t", "theta_r", "theta_t0", "theta_r0",
    "gamma_d", "gamma_t", "sigma2_r", "sigma2_c", "p_total",
    "snr_direct_db", "snr_surv_db", "snr_comm_db",
)


@dataclass
class ScenarioConfig:
    """All physical parameters of one experiment instance.

    ``gamma_d``/``gamma_t`` may be given explicitly; when left ``None``
    they are derived from the configured SNRs with zero phase.
    """

    n_tx: int = 4
    n_rr: int = 4
    n_cr: int = 4
    block_len: int = 10
    theta_t: float = 40.0
    theta_r: float = 42.0
    theta_t0: float = 30.0
    theta_r0: float = 32.0
    gamma_d: complex | None = None
    gamma_t: complex | None = None
    sigma2_r: float = 1.0
    sigma2_c: float = 1.0
    p_total: float = 30.0
    snr_direct_db: float = 20.0
    snr_surv_db: float = 10.0
    snr_comm_db: float = 0.0

    def __post_init__(self):
        for name in ("n_tx", "n_rr", "n_cr", "block_len"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        for name in ("sigma2_r", "sigma2_c", "p_total"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be > 0, got {v!r}")
            setattr(self, name, v)
        for name in ("theta_t", "theta_r", "theta_t0", "theta_r0"):
            v = float(getattr(self, name))
            if not -90.0 < v < 90.0:
                raise ValueError(f"{name} must lie in (-90, 90) degrees, got {v!r}")
            setattr(self, name, v)
        if self.gamma_d is None:
            self.gamma_d = complex(
                math.sqrt(10.0 ** (self.snr_direct_db / 10.0) * self.sigma2_r))
        else:
            self.gamma_d = complex(self.gamma_d)
        if self.gamma_t is None:
            self.gamma_t = complex(
                math.sqrt(10.0 ** (self.snr_surv_db / 10.0) * self.sigma2_r))
        else:
            self.gamma_t = complex(self.gamma_t)

    @property
    def comm_elem_var(self) -> float:
        """Per-element variance of the transmitter-CR channel entries."""
        return 10.0 ** (self.snr_comm_db / 10.0) * self.sigma2_c

    # -- JSON round trip ---------------------------------------------------

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("gamma_d", "gamma_t"):
            g = d[key]
            d[key] = [g.real, g.imag]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValueError("config document must be a JSON object")
        unknown = set(raw) - set(_CONFIG_FIELDS)
        if unknown:
            raise ValueError(f"unknown config field: {sorted(unknown)[0]}")
        kwargs = {}
        for key, value in raw.items():
            if key in ("gamma_d", "gamma_t"):
                if value is None:
                    continue
                if isinstance(value, (list, tuple)):
                    if len(value) != 2:
                        raise ValueError(f"{key} must be [re, im], got {value!r}")
                    value = complex(value[0], value[1])
                else:
                    value = complex(value)
            kwargs[key] = value
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ValueError(str(exc)) from exc


@dataclass(frozen=True)
class ChannelRealization:
    """One Monte Carlo draw: random CR channel, deterministic direct path."""

    h_c: np.ndarray  # (M, N_t) transmitter-CR channel
    h_d: np.ndarray  # (N, N_t) rank-one direct-path channel


@dataclass(frozen=True)
class RadarOperators:
    """Spatio-temporal operator matrices of the radar receive model."""

    a_mat: np.ndarray   # (LN, LN_t)   direct-path block operator
    ad_mat: np.ndarray  # (LN_t, LN_t) matched-filter Gram operator
    as_mat: np.ndarray  # (LN, LN_t)   surveillance block operator
    c_mat: np.ndarray   # (LN, LN)     interference-plus-noise shaping (unit noise)
    d_mat: np.ndarray   # (LN_t, LN)   waveform-to-receiver coupling


def steering_vector(theta_deg: float, n: int) -> np.ndarray:
    """ULA response for half-wavelength spacing, element 0 as reference."""
    if n < 1:
        raise ValueError(f"element count must be >= 1, got {n}")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * math.sin(math.radians(theta_deg)))


def _direct_channel(cfg: ScenarioConfig) -> np.ndarray:
    a_rx = steering_vector(cfg.theta_r, cfg.n_rr)
    a_tx = steering_vector(cfg.theta_t, cfg.n_tx)
    return cfg.gamma_d * np.outer(a_rx, a_tx.conj())


def build_operators(cfg: ScenarioConfig) -> RadarOperators:
    """Assemble the block operators for one scenario.

    All matrices are dense; the Kronecker structure is used only here, at
    construction time.
    """
    L, N, Nt = cfg.block_len, cfg.n_rr, cfg.n_tx
    eye_l = np.eye(L)

    h_d = _direct_channel(cfg)
    a_mat = np.kron(eye_l, h_d)

    a_tx = steering_vector(cfg.theta_t, Nt)
    ad_block = N * abs(cfg.gamma_d) ** 2 * np.outer(a_tx, a_tx.conj())
    ad_mat = np.kron(eye_l, ad_block)

    s_rx = steering_vector(cfg.theta_r0, N)
    s_tx = steering_vector(cfg.theta_t0, Nt)
    as_mat = np.kron(eye_l, cfg.gamma_t * np.outer(s_rx, s_tx.conj()))

    asad = as_mat @ ad_mat
    c_mat = asad @ as_mat.conj().T + np.eye(L * N)
    c_mat = 0.5 * (c_mat + c_mat.conj().T)
    d_mat = ad_mat.conj().T @ as_mat.conj().T

    return RadarOperators(a_mat=a_mat, ad_mat=ad_mat, as_mat=as_mat,
                          c_mat=c_mat, d_mat=d_mat)


def check_hermitian(m: np.ndarray, name: str = "matrix", tol: float = 1e-9) -> np.ndarray:
    """Validate Hermitian symmetry (relative tolerance) and symmetrize."""
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - m.conj().T) > tol * scale:
        raise ValueError(f"{name} is not Hermitian within tolerance {tol}")
    return 0.5 * (m + m.conj().T)


def build_c_of_q(ops: RadarOperators, q_c: np.ndarray, sigma2_r: float) -> np.ndarray:
    """Interference-plus-noise operator when information signals share resources.

    Returns ``T (I_L x Q_c) T^H + sigma2_r I + sigma2_r A_s A_d A_s^H`` with
    ``T = A_s A_d``; Hermitian with eigenvalues >= sigma2_r.
    """
    q_c = check_hermitian(np.asarray(q_c, dtype=complex), "q_c")
    ln = ops.c_mat.shape[0]
    t_op = ops.as_mat @ ops.ad_mat
    l = ops.d_mat.shape[0] // q_c.shape[0]  # block count L
    out = t_op @ np.kron(np.eye(l), q_c) @ t_op.conj().T
    out += sigma2_r * (ops.c_mat - np.eye(ln)) + sigma2_r * np.eye(ln)
    return 0.5 * (out + out.conj().T)


def sample_channel(cfg: ScenarioConfig, rng_seed: int) -> ChannelRealization:
    """Draw the random transmitter-CR channel; the direct path is deterministic.

    Entries of ``h_c`` are i.i.d. circularly symmetric complex Gaussian with
    per-element variance ``cfg.comm_elem_var``. Reproducible for a fixed seed.
    """
    rng = np.random.default_rng(rng_seed)
    scale = math.sqrt(cfg.comm_elem_var / 2.0)
    shape = (cfg.n_cr, cfg.n_tx)
    h_c = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelRealization(h_c=h_c, h_d=_direct_channel(cfg))
