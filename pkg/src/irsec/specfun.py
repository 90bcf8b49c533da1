"""Scalar special-function kernel for the capacity closed forms.

Everything here is a pure function of its float arguments, safe to call
from any thread. Infinite series honor a SeriesControl budget; the two
fixed branch thresholds are module constants with the rationale noted
next to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ConvergenceError",
    "SeriesControl",
    "DEFAULT_SERIES",
    "ln_gamma",
    "gaussian_tail",
    "marcum_q_half",
    "marcum_q_half_ddb",
    "bessel_i_minus_half",
    "ln_bessel_i_minus_half",
    "hyp0f1",
    "ln_hyp1f1",
    "hyp3f3_unit",
    "expint_e1_scaled",
]

LN2 = math.log(2.0)
EULER_GAMMA = 0.57721566490153286061

# 1F1 switches from the plain series to the large-x asymptotic here.
# Both branches were overlap-tested on x in [25, 35]; see the tests.
HYP1F1_ASYMPTOTIC_SWITCH = 30.0

# cosh(z) overflows float64 past z ~ 709; go through the log form early.
BESSEL_LOG_SWITCH = 700.0

_SQRT_2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class ConvergenceError(ArithmeticError):
    """A truncated series hit max_terms before reaching rel_tol."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation budget for the infinite series in this module."""

    max_terms: int = 10000
    rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")


DEFAULT_SERIES = SeriesControl()


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if x <= 0.0:
        raise ValueError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gaussian_tail(x: float) -> float:
    """P(Z > x) for a standard normal Z."""
    return 0.5 * math.erfc(x / _SQRT_2)


def marcum_q_half(a: float, b: float) -> float:
    """Marcum Q of order 1/2: the tail of a noncentral chi distribution.

    Uses the exact two-tail identity Q_{1/2}(a, b) =
    P(Z > b - a) + P(Z > b + a); the result is clamped to [0, 1].
    """
    if a < 0.0 or b < 0.0:
        raise ValueError("marcum_q_half requires a >= 0 and b >= 0")
    q = gaussian_tail(b - a) + gaussian_tail(b + a)
    return min(1.0, max(0.0, q))


def _ln_cosh(z: float) -> float:
    z = abs(z)
    return z + math.log1p(math.exp(-2.0 * z)) - LN2


def marcum_q_half_ddb(a: float, b: float) -> float:
    """Derivative of marcum_q_half with respect to its second argument.

    Identical to -sqrt(a b) e^{-(a^2+b^2)/2} I_{-1/2}(a b) but evaluated
    in a log-stabilized form that cannot overflow:
    -sqrt(2/pi) exp(-(a - b)^2 / 2 + log1p(e^{-2ab}) - ln 2).
    """
    if a < 0.0 or b < 0.0:
        raise ValueError("marcum_q_half_ddb requires a >= 0 and b >= 0")
    return -_SQRT_2_OVER_PI * math.exp(
        -0.5 * (a - b) ** 2 + math.log1p(math.exp(-2.0 * a * b)) - LN2
    )


def ln_bessel_i_minus_half(z: float) -> float:
    """ln I_{-1/2}(z), stable for arbitrarily large z."""
    if z <= 0.0:
        raise ValueError(f"ln_bessel_i_minus_half requires z > 0, got {z}")
    return 0.5 * math.log(2.0 / (math.pi * z)) + _ln_cosh(z)


def bessel_i_minus_half(z: float) -> float:
    """Modified Bessel function I_{-1/2}(z) = sqrt(2/(pi z)) cosh(z)."""
    if z <= 0.0:
        raise ValueError(f"bessel_i_minus_half requires z > 0, got {z}")
    if z > BESSEL_LOG_SWITCH:
        return math.exp(ln_bessel_i_minus_half(z))
    return math.sqrt(2.0 / (math.pi * z)) * math.cosh(z)


def _kahan_sum(first_term: float, next_ratio, ctl: SeriesControl) -> float:
    """Kahan-compensated sum of term_0=first_term, term_{n+1}=term_n*ratio(n)."""
    total = first_term
    comp = 0.0
    term = first_term
    for n in range(ctl.max_terms):
        term = term * next_ratio(n)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= ctl.rel_tol * abs(total):
            return total
    raise ConvergenceError(
        f"series did not reach rel_tol={ctl.rel_tol} within {ctl.max_terms} terms"
    )


def hyp0f1(c: float, x: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Confluent limit function 0F1(; c; x) by direct series."""
    if c <= 0.0:
        raise ValueError(f"hyp0f1 requires c > 0, got {c}")
    if x == 0.0:
        return 1.0
    return _kahan_sum(1.0, lambda n: x / ((c + n) * (n + 1.0)), ctl)


def _hyp1f1_series(a: float, b: float, x: float, ctl: SeriesControl) -> float:
    return _kahan_sum(1.0, lambda n: (a + n) * x / ((b + n) * (n + 1.0)), ctl)


def _ln_hyp1f1_posx(a: float, b: float, x: float, ctl: SeriesControl) -> float:
    # x > 0 and a >= 0 here; a == 0 collapses every term past the first.
    if a == 0.0:
        return 0.0
    if x <= HYP1F1_ASYMPTOTIC_SWITCH:
        return math.log(_hyp1f1_series(a, b, x, ctl))
    # Large-x asymptotic: 1F1(a;b;x) ~ Gamma(b)/Gamma(a) e^x x^(a-b) * S,
    # S = sum_k (b-a)_k (1-a)_k / (k! x^k), truncated at its smallest term.
    corr = 1.0
    term = 1.0
    for k in range(ctl.max_terms):
        nxt = term * (b - a + k) * (1.0 - a + k) / ((k + 1.0) * x)
        if abs(nxt) >= abs(term):
            break
        corr += nxt
        term = nxt
        if abs(term) <= ctl.rel_tol * abs(corr):
            break
    if corr <= 0.0:
        raise ConvergenceError("1F1 asymptotic correction lost positivity")
    return ln_gamma(b) - ln_gamma(a) + x + (a - b) * math.log(x) + math.log(corr)


def ln_hyp1f1(a: float, b: float, x: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """ln 1F1(a; b; x) for a > 0, b > 0 and real x.

    Stays in the log domain so callers can combine it with large gamma
    factors before a single exponentiation.
    """
    if a <= 0.0:
        raise ValueError(f"ln_hyp1f1 requires a > 0, got {a}")
    if b <= 0.0:
        raise ValueError(f"ln_hyp1f1 requires b > 0, got {b}")
    if x == 0.0:
        return 0.0
    if x < 0.0:
        # reflect to positive argument: 1F1(a;b;x) = e^x 1F1(b-a;b;-x)
        if b - a >= 0.0:
            return x + _ln_hyp1f1_posx(b - a, b, -x, ctl)
        value = _hyp1f1_series(a, b, x, ctl)
        if value <= 0.0:
            raise ValueError(f"1F1({a};{b};{x}) is not positive; no log form")
        return math.log(value)
    return _ln_hyp1f1_posx(a, b, x, ctl)


def hyp3f3_unit(x: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """3F3([1,1,1]; [2,2,2]; x) = sum_n x^n / ((n+1)^3 n!).

    Converges for every real x; for x < 0 the series alternates, so the
    truncation error is bounded by the first omitted term.
    """
    if x == 0.0:
        return 1.0
    return _kahan_sum(1.0, lambda n: x * (n + 1.0) ** 2 / (n + 2.0) ** 3, ctl)


def expint_e1_scaled(x: float) -> float:
    """e^x E_1(x) for x > 0.

    Power series below x = 1.5, a modified-Lentz continued fraction at or
    above it; the product form never overflows and tends to 1/x for large x.
    """
    if x <= 0.0:
        raise ValueError(f"expint_e1_scaled requires x > 0, got {x}")
    if x < 1.5:
        # E_1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
        total = -EULER_GAMMA - math.log(x)
        term = 1.0
        for k in range(1, 200):
            term *= x / k
            contrib = term / k if k % 2 == 1 else -term / k
            total += contrib
            if abs(contrib) <= 1e-17 * abs(total):
                break
        return math.exp(x) * total
    # e^x E_1(x) = 1/(x+1-) 1^2/(x+3-) 2^2/(x+5-) ...
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for j in range(1, 500):
        a_j = 1.0 if j == 1 else -float((j - 1) * (j - 1))
        b_j = x + 2.0 * j - 1.0
        d = b_j + a_j * d
        if d == 0.0:
            d = tiny
        c = b_j + a_j / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-15:
            return f
    raise ConvergenceError(f"continued fraction for e^x E1(x) stalled at x={x}")
