"""Shared reference configurations for the suite."""

from dataclasses import replace

import pytest

from irsec.channel import LinkConfig, pathloss


@pytest.fixture(scope="session")
def cfg_siso():
    """Reference single-antenna budget: 50 m hops, 10 dB gains, 1 mW."""
    return LinkConfig()


@pytest.fixture(scope="session")
def cfg_siso_16():
    """Same budget with a 16-element surface (low-SNR regime)."""
    return LinkConfig(n_elems=16)


@pytest.fixture(scope="session")
def cfg_miso():
    """Reference budget with the ten-antenna equal-power precoder."""
    return LinkConfig(n_tx=10)


def miso_cfg_for_kappa(kappa: float, n_tx: int = 10) -> LinkConfig:
    """Scale p_t so the sampled exponential SNR has rate ~kappa.

    The sampled law's true rate is sigma2/(2 N p_t zeta |f|^2); the
    fitted rate lands within the fit's ~0.4% of that.
    """
    base = LinkConfig(n_tx=n_tx)
    p_t = base.sigma2 / (2.0 * base.n_elems * pathloss(base)
                         * base.precoder_power * kappa)
    return replace(base, p_t=p_t)
