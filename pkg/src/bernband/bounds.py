"""Explicit constants and computable bound evaluators.

Everything here is closed-form arithmetic: the Bennett-type exponent tau and
its inverse, the binary relative entropy driving exponential rates on flat
pieces, the D-K-W tail bound, the Bernstein / Kantorovich approximation
bounds, the generic concentration bound, and the constant pack used by the
confidence constructions.

Probability bounds are returned raw together with a clamped companion:
callers doing degree search need the raw exponent, users need a valid
probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from .errors import DomainError, ParameterError
from .operators import as_function1d, falling_factorial
from .smoothness import (
    FittedSpec,
    ModulusGrid,
    OracleSpec,
    PowerFamilySpec,
    modulus2,
    modulus2_dt,
    power_term_modulus1,
    power_term_modulus2,
    sigma,
)

__all__ = [
    "ProbabilityBound",
    "BoundConstants",
    "tau",
    "tau_inverse",
    "entropy_r",
    "dkw_bound",
    "concentration_bound",
    "bernstein_error_bounds",
    "kantorovich_error_bounds",
    "flat_region_error_bound",
    "constants_for",
]

_MAX_ORDER = 30  # binomial constants are exact integers up to here


@dataclass(frozen=True)
class ProbabilityBound:
    """Raw exponential bound plus its probability-valid clamp."""

    raw: float

    @property
    def clamped(self) -> float:
        return min(self.raw, 1.0)

    def __float__(self) -> float:
        return self.raw


def tau(eps):
    """tau(e) = (1+e) log(1+e) - e; nonnegative, increasing, convex on [0, inf)."""
    eps = np.asarray(eps, float)
    if np.any(eps < 0):
        raise DomainError("tau is defined for eps >= 0")
    out = (1.0 + eps) * np.log1p(eps) - eps
    return float(out) if out.ndim == 0 else out


def tau_inverse(y: float) -> float:
    """The unique eps >= 0 with tau(eps) = y, by bracketed root-finding."""
    if y < 0:
        raise DomainError("tau_inverse is defined for y >= 0")
    if y == 0.0:
        return 0.0
    hi = 1.0 + 2.0 * math.e * math.sqrt(y)
    while tau(hi) < y:
        hi *= 2.0
    return float(brentq(lambda e: tau(e) - y, 0.0, hi, xtol=1e-12, rtol=1e-15))


def entropy_r(x, theta):
    """Binary relative entropy r(x, theta) = theta log(theta/x)
    + (1-theta) log((1-theta)/(1-x)), with 0 log 0 = 0.

    Nonnegative, convex in theta, zero iff theta = x.
    """
    x = np.asarray(x, float)
    theta = np.asarray(theta, float)
    if np.any((x <= 0.0) | (x >= 1.0)):
        raise DomainError("entropy_r needs x in the open interval (0, 1)")
    if np.any((theta < 0.0) | (theta > 1.0)):
        raise DomainError("entropy_r needs theta in [0, 1]")
    out = xlogy(theta, theta / x) + xlogy(1.0 - theta, (1.0 - theta) / (1.0 - x))
    return float(out) if out.ndim == 0 else out


def dkw_bound(n: int, delta: float) -> ProbabilityBound:
    """Two-sided empirical-CDF tail bound 2 exp(-2 n delta^2)."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    if delta < 0:
        raise DomainError(f"half-width must be >= 0, got {delta}")
    return ProbabilityBound(2.0 * math.exp(-2.0 * n * delta * delta))


def concentration_bound(n: int, c: float, d: float, eps: float) -> ProbabilityBound:
    """Bound 2 exp(-n c tau(eps)) on P(|weighted sum| >= n c d eps).

    ``d`` is the almost-sure bound on the summands and only scales the
    deviation threshold, not the bound value.
    """
    if c < 0:
        raise DomainError(f"variance proxy factor must be >= 0, got {c}")
    if d <= 0:
        raise DomainError(f"a.s. bound must be > 0, got {d}")
    if eps < 0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    return ProbabilityBound(2.0 * math.exp(-n * c * float(tau(eps))))


# ---------------------------------------------------------------------------
# Approximation bounds
# ---------------------------------------------------------------------------


def _power_cdf_uniform_bound(beta: float, m: int) -> float:
    # sup_x (3/2) omega_2(x**beta; sigma(x)/sqrt(m)) via sup sigma(x)^p = 2^-p
    if beta <= 2.0:
        return 1.5 * abs(2.0**beta - 2.0) * 2.0**-beta * m ** (-beta / 2.0)
    return 1.5 * beta * (beta - 1.0) * 0.25 / m


def bernstein_error_bounds(spec, m: int, x=None, grid: ModulusGrid | None = None):
    """(pointwise, uniform) deterministic error bounds for the Bernstein
    polynomial of the target:

      pointwise:  (3/2) omega_2(f; sigma(x)/sqrt(m)),
      uniform:    (5/2) omega_2^sigma(f; 1/sqrt(m))  (or the supremum of the
                  pointwise bound for closed-form specs).

    ``spec`` is a SmoothnessSpec (or a bare callable, treated as an oracle).
    A component that cannot be produced from the given spec is None;
    requesting the pointwise bound without x raises.
    """
    if m < 1:
        raise ParameterError(f"degree m must be >= 1, got {m}")
    if isinstance(spec, PowerFamilySpec):
        uniform = _power_cdf_uniform_bound(spec.beta, m)
        if x is None:
            return None, uniform
        h = float(sigma(x)) / math.sqrt(m)
        val, _ = power_term_modulus2(1.0, spec.beta, h)
        return 1.5 * val, uniform
    if isinstance(spec, FittedSpec):
        rate = spec.C * m ** (-spec.beta / 2.0)
        if spec.modulus == "second_dt":
            uniform = 2.5 * rate
            return None, uniform
        uniform = 1.5 * spec.C * 2.0**-spec.beta * m ** (-spec.beta / 2.0)
        if x is None:
            return None, uniform
        return 1.5 * spec.C * (float(sigma(x)) / math.sqrt(m)) ** spec.beta, uniform
    if not isinstance(spec, OracleSpec):
        spec = OracleSpec(f=as_function1d(spec))
    g = grid or spec.grid
    uniform = 2.5 * modulus2_dt(spec.f, 1.0 / math.sqrt(m), g)
    if x is None:
        return None, uniform
    pointwise = 1.5 * modulus2(spec.f, float(sigma(x)) / math.sqrt(m), g)
    return pointwise, uniform


def kantorovich_error_bounds(
    k: int,
    m: int,
    omega1: float,
    omega2_pointwise: float | None = None,
    omega2_weighted: float | None = None,
):
    """(pointwise, uniform) bounds for Kantorovich-type operators of order k:

      pointwise: 2 k omega(f; 1/m) + (3/2) omega_2(f; sigma(x)/sqrt(m)),
      uniform:   2 k omega(f; 1/m) + (5/2) omega_2^sigma(f; 1/sqrt(m)).

    Modulus values are supplied by the caller; a missing omega_2 leaves the
    corresponding component None.  k = 0 drops the first term.
    """
    if m <= k:
        raise ParameterError(f"needs m > k, got m={m}, k={k}")
    shift_term = 2.0 * k * omega1
    pointwise = None if omega2_pointwise is None else shift_term + 1.5 * omega2_pointwise
    uniform = None if omega2_weighted is None else shift_term + 2.5 * omega2_weighted
    return pointwise, uniform


def flat_window(m: int, k: int, a: float, b: float) -> tuple:
    """Admissible x interval (m a/(m-k), (m b - k)/(m-k)) of the flat-region bound."""
    if not 0.0 < a < b < 1.0:
        raise DomainError(f"need 0 < a < b < 1, got a={a}, b={b}")
    if m <= k:
        raise ParameterError(f"needs m > k, got m={m}, k={k}")
    return m * a / (m - k), (m * b - k) / (m - k)


def flat_region_error_bound(
    m: int, k: int, x: float, a: float, b: float, sup_dev: float
) -> float:
    """Exponential bound for targets constant on (a, b):

    sup_dev * (exp(-(m-k) r(x, lo)) + exp(-(m-k) r(x, hi)))

    with (lo, hi) the admissible window from ``flat_window``; x outside the
    window is rejected.
    """
    lo, hi = flat_window(m, k, a, b)
    if not lo < x < hi:
        raise DomainError(
            f"x={x} outside flat window ({lo:.6g}, {hi:.6g}); bound does not apply"
        )
    rlo = float(entropy_r(x, lo))
    rhi = float(entropy_r(x, min(hi, 1.0)))
    return sup_dev * (math.exp(-(m - k) * rlo) + math.exp(-(m - k) * rhi))


# ---------------------------------------------------------------------------
# Constant pack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundConstants:
    """All explicit constants entering the confidence constructions at a
    given (alpha, m, k) and optional point x.  Order-specific constants are
    None at k = 0."""

    alpha: float
    m: int
    k: int
    l_alpha: float
    width_multiplier: float  # 2 l_alpha + 1/l_alpha
    band_constant: float  # 2^k (m)_k sqrt(2 log(2/alpha))
    d_k: int | None
    central_binom: int | None  # C(2(k-1), k-1)
    r_k: float | None
    s_k: float | None
    q_m_x: float | None


def l_alpha(alpha: float) -> float:
    """sqrt(3 log(2 e^(1/3) / alpha))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(3.0 * (math.log(2.0 / alpha) + 1.0 / 3.0))


def constants_for(alpha: float, m: int, k: int = 0, x: float | None = None) -> BoundConstants:
    """Populate every constant used by the band/interval constructions."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if k < 0 or m <= k:
        raise ParameterError(f"needs m > k >= 0, got m={m}, k={k}")
    if k > _MAX_ORDER:
        raise ParameterError(
            f"order k={k} exceeds the exact-integer limit {_MAX_ORDER}"
        )
    la = l_alpha(alpha)
    fall = falling_factorial(m, k)
    band = 2.0**k * fall * math.sqrt(2.0 * math.log(2.0 / alpha))
    if k >= 1:
        d_k = math.comb(k - 1, k // 2)
        central = math.comb(2 * (k - 1), k - 1)
        r_k = m * d_k / (fall * central)
        s_k = fall / math.sqrt(m) * math.sqrt(central)
    else:
        d_k = central = r_k = s_k = None
    q = None
    if x is not None:
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"x must lie in [0, 1], got {x}")
        q = 1.0 - x**m - (1.0 - x) ** m
    return BoundConstants(
        alpha=alpha,
        m=m,
        k=k,
        l_alpha=la,
        width_multiplier=2.0 * la + 1.0 / la,
        band_constant=band,
        d_k=d_k,
        central_binom=central,
        r_k=r_k,
        s_k=s_k,
        q_m_x=q,
    )
