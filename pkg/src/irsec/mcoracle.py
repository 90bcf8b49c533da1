"""Monte Carlo ground truth for the analytical results.

Everything here deliberately avoids the closed forms: service samples
come straight from the physical channel samplers, the EC estimator
realizes the defining log-MGF limit on finite blocks, and the
distribution check is a plain empirical-CDF sup distance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import erfc

from irsec.channel import (
    Exponential,
    LinkConfig,
    SampleBatch,
    ScaledNoncentralChiSq,
    SnrDistribution,
    sample_miso_snr,
    sample_siso_snr,
    stream_rng,
)
from irsec.eccore import LN2, SCENARIOS, QosExponent, alpha_value

__all__ = [
    "EcEstimate",
    "empirical_ec",
    "simulate_service",
    "empirical_moments",
    "ks_distance",
    "BLOCK_LENGTH",
    "BOOTSTRAP_RESAMPLES",
]

# Block length trades MGF underflow (long blocks) against block count
# (short blocks); with iid slots any choice is unbiased in the limit.
BLOCK_LENGTH = 100

BOOTSTRAP_RESAMPLES = 200

# Exponents below this are where exp() dies in double precision.
_UNDERFLOW_LOG = math.log(1e-300)

_BOOTSTRAP_STREAM = "mcoracle.bootstrap"


@dataclass(frozen=True)
class EcEstimate:
    """Monte Carlo EC with its bootstrap uncertainty."""

    value: float
    stderr: float
    slots: int
    blocks: int

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise ValueError("stderr must be nonnegative")
        if self.blocks < 1 or self.slots % self.blocks != 0:
            raise ValueError("slots must be a positive multiple of blocks")


def _log_mean_exp(x: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.mean(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else float(np.squeeze(out))


def empirical_ec(
    service: SampleBatch,
    alpha: Union[QosExponent, float],
    block_length: int = BLOCK_LENGTH,
) -> EcEstimate:
    """Estimate EC from service samples via the block log-MGF.

    Partitions the slots into blocks of block_length, forms the
    cumulative service S per block, and returns
    -(1/(alpha*block_length)) ln mean(exp(-alpha S)), stabilized by
    log-sum-exp. stderr is the spread of the estimate under a
    nonparametric bootstrap over blocks.
    """
    if service.kind != "service_bits":
        raise ValueError("empirical_ec needs a service_bits batch")
    if block_length < 1:
        raise ValueError("block_length must be >= 1")
    n = service.values.size
    if n % block_length != 0:
        raise ValueError(
            f"sample count {n} is not a multiple of block_length {block_length}")
    a = alpha_value(alpha)
    blocks = n // block_length
    block_sums = service.values.reshape(blocks, block_length).sum(axis=1)
    x = -a * block_sums
    if np.max(x) < _UNDERFLOW_LOG:
        warnings.warn(
            "every exp(-alpha S) term underflows double precision; "
            "the estimate is dominated by the single largest block",
            UserWarning, stacklevel=2)
    scale = -1.0 / (a * block_length)
    value = scale * _log_mean_exp(x)

    rng = stream_rng(service.seed, _BOOTSTRAP_STREAM)
    idx = rng.integers(0, blocks, size=(BOOTSTRAP_RESAMPLES, blocks))
    resampled = scale * _log_mean_exp(x[idx], axis=1)
    stderr = float(np.std(resampled, ddof=1))
    return EcEstimate(value=float(value), stderr=stderr,
                      slots=n, blocks=blocks)


def simulate_service(
    cfg: LinkConfig,
    scenario: str,
    rate: float | None,
    seed: int,
    slots: int,
) -> SampleBatch:
    """Draw per-slot service bits from the physical channel samplers.

    CSI scenarios log the adaptive rate slot*B*log2(1+SNR); no-CSI
    scenarios deliver rate*slot bits exactly when the channel supports
    the rate and nothing otherwise.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    nocsi = scenario.endswith("_nocsi")
    if nocsi and rate is None:
        raise ValueError(f"{scenario} requires a rate")
    if not nocsi and rate is not None:
        raise ValueError(f"{scenario} adapts its rate; rate must be None")
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if scenario.startswith("siso"):
        snr = sample_siso_snr(cfg, seed, slots).values
    else:
        snr = sample_miso_snr(cfg, seed, slots).values
    if nocsi:
        threshold = math.expm1(LN2 * rate / cfg.bandwidth)
        service = np.where(snr >= threshold, rate * cfg.slot, 0.0)
    else:
        service = cfg.slot * cfg.bandwidth * np.log1p(snr) / LN2
    return SampleBatch(values=service, seed=seed, kind="service_bits")


def empirical_moments(samples: SampleBatch) -> tuple[float, float, float]:
    """(mean, second moment, unbiased variance) of a batch."""
    v = samples.values
    mean = float(np.mean(v))
    second = float(np.mean(v * v))
    var = float(np.var(v, ddof=1)) if v.size > 1 else 0.0
    return mean, second, var


def _cdf_values(dist: SnrDistribution, x: np.ndarray) -> np.ndarray:
    if isinstance(dist, ScaledNoncentralChiSq):
        b = np.sqrt(x / dist.beta)
        a = math.sqrt(dist.lam)
        tail = 0.5 * (erfc((b - a) / math.sqrt(2.0)) + erfc((b + a) / math.sqrt(2.0)))
        return 1.0 - np.clip(tail, 0.0, 1.0)
    if isinstance(dist, Exponential):
        return -np.expm1(-dist.kappa * x)
    raise TypeError(f"unsupported distribution {type(dist).__name__}")


def ks_distance(samples: SampleBatch, dist: SnrDistribution) -> float:
    """Sup distance between the empirical CDF and the analytical law."""
    if samples.kind != "snr":
        raise ValueError("ks_distance needs an snr batch")
    v = np.sort(samples.values)
    n = v.size
    f = _cdf_values(dist, v)
    i = np.arange(1, n + 1, dtype=float)
    upper = np.max(i / n - f)
    lower = np.max(f - (i - 1.0) / n)
    return float(max(upper, lower))
