import numpy as np
import pytest

from radcom import ScenarioConfig, build_operators, sample_channel


@pytest.fixture
def default_cfg():
    """Baseline simulation setup: 4 tx antennas, 4+4 RR antennas, 4 CR."""
    return ScenarioConfig()


@pytest.fixture
def small_cfg():
    return ScenarioConfig(n_tx=2, n_rr=3, n_cr=3, block_len=3)


def random_cfg(rng, l_max=3, n_max=4):
    return ScenarioConfig(
        n_tx=int(rng.integers(1, n_max + 1)),
        n_rr=int(rng.integers(1, n_max + 1)),
        n_cr=int(rng.integers(1, n_max + 1)),
        block_len=int(rng.integers(1, l_max + 1)),
        theta_t=float(rng.uniform(-80, 80)),
        theta_r=float(rng.uniform(-80, 80)),
        theta_t0=float(rng.uniform(-80, 80)),
        theta_r0=float(rng.uniform(-80, 80)),
        snr_direct_db=float(rng.uniform(0, 20)),
        snr_surv_db=float(rng.uniform(0, 15)),
        snr_comm_db=float(rng.uniform(-5, 5)),
    )


def random_psd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a @ a.conj().T) / n


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
