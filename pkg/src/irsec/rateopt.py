"""Optimal fixed-rate search for the no-CSI scenarios.

Maximizing EC(r) is the same as minimizing the one-slot service MGF
rho(r) = p_off(r) + p_on(r) exp(-alpha r slot), so the single-antenna
optimizer runs fixed-step gradient descent on rho. The beamformed link
admits a transcendental stationarity equation with a unique root (both
sides monotone) plus an interpretable closed-form approximation of it;
a grid search over EC backs both up as an independent oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from irsec import specfun
from irsec.channel import LinkConfig, miso_snr_dist, siso_snr_dist
from irsec.eccore import (
    LN2,
    OnOffChannel,
    QosExponent,
    alpha_value,
    ec_miso_nocsi,
    ec_on_off,
    ec_siso_nocsi,
    on_off_probs,
)

__all__ = [
    "DescentSettings",
    "RateSolution",
    "NonConvergenceError",
    "siso_ec_gradient",
    "optimize_rate_siso",
    "optimize_rate_miso_closed",
    "solve_rate_miso_exact",
    "grid_argmax_rate",
]

_METHODS = ("gradient_descent", "closed_form", "root_find", "grid")

# Beyond this rate/bandwidth ratio every gradient factor has underflowed
# to zero; returning 0 early avoids overflowing 2^(r/B).
_RATE_TAIL = 690.0

# Closed-form validity: the approximation drops the -1 in e^(alpha r T)-1,
# defensible once the exponential dominates by an order of magnitude.
_CLOSED_FORM_MIN_GROWTH = 10.0

_ROOT_RESIDUAL = 1e-10


@dataclass(frozen=True)
class DescentSettings:
    """Fixed-step descent controls; None fields scale off the bandwidth.

    Resolved defaults: r0 = B, step = 0.05 B, conv_tol = 1e-8 B.
    """

    r0: float | None = None
    step: float | None = None
    conv_tol: float | None = None
    max_iters: int = 100_000

    def __post_init__(self) -> None:
        for name in ("r0", "step", "conv_tol"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def resolved(self, bandwidth: float) -> tuple[float, float, float]:
        r0 = bandwidth if self.r0 is None else self.r0
        step = 0.05 * bandwidth if self.step is None else self.step
        tol = 1e-8 * bandwidth if self.conv_tol is None else self.conv_tol
        return r0, step, tol


@dataclass(frozen=True)
class RateSolution:
    """A located optimal rate and the EC it achieves."""

    r_star: float
    ec_at_r_star: float
    iterations: int
    method: str
    closed_form_valid: bool = True

    def __post_init__(self) -> None:
        if self.r_star < 0.0:
            raise ValueError("r_star must be nonnegative")
        if self.ec_at_r_star < 0.0:
            raise ValueError("ec_at_r_star must be nonnegative")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")


class NonConvergenceError(RuntimeError):
    """Descent hit max_iters; carries the last iterate for diagnosis."""

    def __init__(self, message: str, last_rate: float):
        super().__init__(message)
        self.last_rate = last_rate


def siso_ec_gradient(
    cfg: LinkConfig,
    alpha: Union[QosExponent, float],
    rate: float,
) -> float:
    """d rho / d rate for the single-antenna on/off service MGF.

    Three addends: the on-probability derivative weighted by the on-state
    decay, the decay's own derivative, and the off-state compensation.
    Singular at rate = 0 where the threshold derivative divides by zero.
    """
    if not rate > 0.0:
        raise ValueError("gradient is singular at rate = 0; require rate > 0")
    a = alpha_value(alpha)
    dist = siso_snr_dist(cfg)
    b = cfg.bandwidth
    if LN2 * rate / b > _RATE_TAIL:
        return 0.0
    growth = math.exp(LN2 * rate / b)
    threshold = growth - 1.0
    xi = math.sqrt(threshold / dist.beta)
    root_lam = math.sqrt(dist.lam)
    dxi_drate = LN2 * growth / (2.0 * b * dist.beta * xi)
    dp_on = specfun.marcum_q_half_ddb(root_lam, xi) * dxi_drate
    p_on = specfun.marcum_q_half(root_lam, xi)
    decay = math.exp(-a * rate * cfg.slot)
    return dp_on * decay - a * cfg.slot * p_on * decay - dp_on


def optimize_rate_siso(
    cfg: LinkConfig,
    alpha: Union[QosExponent, float],
    settings: DescentSettings | None = None,
) -> RateSolution:
    """Fixed-step gradient descent on rho(r), the verbatim control law.

    r(m) = r(m-1) - step * drho/dr, stopping at |r(m) - r(m-1)| <= conv_tol.
    Nonpositive iterates are projected back to conv_tol. No line search;
    step quality is the caller's responsibility (grid_argmax_rate is the
    cross-check).
    """
    if settings is None:
        settings = DescentSettings()
    r0, step, tol = settings.resolved(cfg.bandwidth)
    r_prev = r0
    for m in range(1, settings.max_iters + 1):
        grad = siso_ec_gradient(cfg, alpha, r_prev)
        r_new = r_prev - step * grad
        if r_new <= 0.0:
            r_new = tol
        if abs(r_new - r_prev) <= tol:
            ec = ec_siso_nocsi(cfg, alpha, r_new).ec_bits_per_slot
            return RateSolution(r_star=r_new, ec_at_r_star=ec,
                                iterations=m, method="gradient_descent")
        r_prev = r_new
    raise NonConvergenceError(
        f"descent did not converge in {settings.max_iters} iterations "
        f"(last rate {r_prev!r})", last_rate=r_prev)


def _miso_rhs(kappa: float, a: float, bandwidth: float, slot: float) -> float:
    # log form of the stationarity constant; see solve_rate_miso_exact
    return math.log(bandwidth * a * slot / (kappa * LN2))


def optimize_rate_miso_closed(
    cfg: LinkConfig,
    alpha: Union[QosExponent, float],
    kappa_mode: str = "oracle",
) -> RateSolution:
    """Closed-form approximate optimal rate for the beamformed link.

    Linearizes the stationarity equation under e^(alpha r T) - 1
    ~ e^(alpha r T), giving r* = ln(B alpha T/(kappa ln2))/(ln2/B + alpha T),
    clamped at zero. closed_form_valid records whether the linearization
    assumption holds at the returned rate.
    """
    a = alpha_value(alpha)
    dist = miso_snr_dist(cfg, mode=kappa_mode)
    denom = LN2 / cfg.bandwidth + a * cfg.slot
    r_raw = _miso_rhs(dist.kappa, a, cfg.bandwidth, cfg.slot) / denom
    r = max(r_raw, 0.0)
    valid = r_raw > 0.0 and math.exp(a * r * cfg.slot) >= _CLOSED_FORM_MIN_GROWTH
    if not valid:
        warnings.warn(
            "closed-form rate is outside its validity regime "
            f"(r = {r!r}); prefer solve_rate_miso_exact here",
            UserWarning, stacklevel=2)
    ec = ec_miso_nocsi(cfg, alpha, r, kappa_mode=kappa_mode).ec_bits_per_slot
    return RateSolution(r_star=r, ec_at_r_star=ec, iterations=0,
                        method="closed_form", closed_form_valid=valid)


def solve_rate_miso_exact(
    cfg: LinkConfig,
    alpha: Union[QosExponent, float],
    kappa_mode: str = "oracle",
) -> RateSolution:
    """Bisection on the beamformed stationarity equation.

    (r/B) ln2 + ln(e^(alpha r T) - 1) = ln(B alpha T/(kappa ln2)).
    The left side is strictly increasing from -inf, so the root is
    unique; brackets grow/shrink geometrically until they straddle it.
    Terminates only below a 1e-10 residual.
    """
    a = alpha_value(alpha)
    dist = miso_snr_dist(cfg, mode=kappa_mode)
    b, t = cfg.bandwidth, cfg.slot
    rhs = _miso_rhs(dist.kappa, a, b, t)

    def lhs(r: float) -> float:
        x = a * r * t
        if x > _RATE_TAIL:
            return LN2 * r / b + x
        return LN2 * r / b + math.log(math.expm1(x))

    lo = 1e-6 * b
    for _ in range(2000):
        if lhs(lo) < rhs:
            break
        lo *= 0.5
    else:
        raise RuntimeError("could not bracket the rate root from below")
    hi = b
    for _ in range(300):
        if lhs(hi) > rhs:
            break
        hi *= 2.0
    else:
        raise RuntimeError("could not bracket the rate root from above")

    mid = lo
    for it in range(1, 501):
        mid = 0.5 * (lo + hi)
        residual = lhs(mid) - rhs
        if abs(residual) <= _ROOT_RESIDUAL:
            break
        if residual < 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise RuntimeError(
            f"bisection stalled with residual {residual!r} at rate {mid!r}")

    ec = ec_miso_nocsi(cfg, alpha, mid, kappa_mode=kappa_mode).ec_bits_per_slot
    return RateSolution(r_star=mid, ec_at_r_star=ec, iterations=it,
                        method="root_find")


def grid_argmax_rate(
    cfg: LinkConfig,
    alpha: Union[QosExponent, float],
    scenario: str,
    r_max: float,
    points: int = 1000,
) -> RateSolution:
    """Brute-force EC maximizer on a uniform rate grid.

    Independent oracle for the analytic optimizers: evaluates the exact
    no-CSI EC at `points` rates in (0, r_max] and parabolically refines
    the best interior point.
    """
    if points < 3:
        raise ValueError("points must be >= 3")
    if not r_max > 0.0:
        raise ValueError("r_max must be positive")
    a = alpha_value(alpha)
    if scenario == "siso_nocsi":
        dist = siso_snr_dist(cfg)
    elif scenario == "miso_nocsi":
        dist = miso_snr_dist(cfg)
    else:
        raise ValueError(f"grid search applies to no-CSI scenarios, not {scenario!r}")

    def ec_at(rate: float) -> float:
        p_on, p_off = on_off_probs(dist, rate, cfg.bandwidth)
        chain = OnOffChannel(p_on=p_on, p_off=p_off, rate=rate, slot=cfg.slot)
        return ec_on_off(chain, a).ec_bits_per_slot

    rates = np.linspace(r_max / points, r_max, points)
    values = np.array([ec_at(r) for r in rates])
    k = int(np.argmax(values))
    r_best, ec_best = float(rates[k]), float(values[k])
    if 0 < k < points - 1:
        y0, y1, y2 = (float(values[k - 1]), float(values[k]),
                      float(values[k + 1]))
        curvature = y0 - 2.0 * y1 + y2
        if curvature < 0.0:
            h = float(rates[1] - rates[0])
            offset = 0.5 * h * (y0 - y2) / curvature
            offset = min(max(offset, -h), h)
            r_ref = r_best + offset
            ec_ref = ec_at(r_ref)
            if ec_ref >= ec_best:
                r_best, ec_best = r_ref, ec_ref
    return RateSolution(r_star=r_best, ec_at_r_star=ec_best,
                        iterations=points, method="grid")
