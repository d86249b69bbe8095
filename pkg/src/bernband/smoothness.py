"""Moduli of smoothness and smoothness specifications.

The supremum in every modulus is replaced by a maximum over a uniform grid
(default resolution 10001 points), so each value is a lower bound of the true
modulus converging as the resolution grows.  Difference steps h are scanned
over the same grid as x, ties broken toward the smallest x, which makes every
value deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import DomainError, ParameterError
from .operators import Function1D, as_function1d

__all__ = [
    "ModulusGrid",
    "PowerFamilySpec",
    "FittedSpec",
    "OracleSpec",
    "PowerFamilyModuli",
    "LipschitzFit",
    "sigma",
    "power_cdf",
    "power_density",
    "modulus1",
    "modulus2",
    "modulus2_profile",
    "modulus2_dt",
    "power_family_moduli",
    "power_term_modulus1",
    "power_term_modulus2",
    "fit_lipschitz",
]


def sigma(x):
    """sigma(x) = sqrt(x (1 - x)), the Bernstein standard-deviation weight."""
    x = np.asarray(x, float)
    out = np.sqrt(x * (1.0 - x))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModulusGrid:
    """Uniform evaluation grid for the modulus suprema.

    ``resolution`` counts the x points including both endpoints; difference
    steps are multiples of the grid spacing up to the requested delta.
    """

    resolution: int = 10001

    def __post_init__(self):
        if self.resolution < 2:
            raise DomainError(f"grid needs at least 2 points, got {self.resolution}")

    @property
    def spacing(self) -> float:
        return 1.0 / (self.resolution - 1)

    def points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution)

    def steps_upto(self, delta: float) -> int:
        # number of whole grid steps inside delta (tolerant to fp jitter)
        return int(math.floor(delta * (self.resolution - 1) + 1e-9))


DEFAULT_GRID = ModulusGrid()


# ---------------------------------------------------------------------------
# Smoothness specifications (how smoothness of the target is known)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerFamilySpec:
    """Target is the power family CDF x**beta; closed-form moduli are used
    for degree-selection bounds and the exact CDF/density for centers."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError(f"power family exponent must be > 0, got {self.beta}")

    def cdf(self) -> Function1D:
        return power_cdf(self.beta)

    def density(self) -> Function1D:
        return power_density(self.beta)


@dataclass(frozen=True)
class FittedSpec:
    """Lipschitz profile modulus <= C * delta**beta for a fitted/assumed
    modulus; ``modulus`` names which one the profile describes."""

    C: float
    beta: float
    modulus: str = "second_dt"  # "second" | "second_dt"

    def __post_init__(self):
        if self.C <= 0:
            raise DomainError(f"Lipschitz constant must be > 0, got {self.C}")
        if not 0 < self.beta <= 2:
            raise DomainError(f"exponent must lie in (0, 2], got {self.beta}")
        if self.modulus not in ("second", "second_dt"):
            raise DomainError(f"unknown modulus tag {self.modulus!r}")


@dataclass(frozen=True)
class OracleSpec:
    """Target function fully known; conditions are evaluated exactly by
    direct operator evaluation and grid moduli."""

    f: Function1D
    grid: ModulusGrid = DEFAULT_GRID


SmoothnessSpec = PowerFamilySpec | FittedSpec | OracleSpec


def power_cdf(beta: float) -> Function1D:
    """F(x) = x**beta on [0,1] with its first two derivatives."""
    if beta <= 0:
        raise DomainError(f"exponent must be > 0, got {beta}")

    def f(x):
        return np.power(np.asarray(x, float), beta)

    def d1(x):
        return beta * np.power(np.asarray(x, float), beta - 1.0)

    def d2(x):
        return beta * (beta - 1.0) * np.power(np.asarray(x, float), beta - 2.0)

    return Function1D(f=f, derivatives=(d1, d2), name=f"power-cdf-{beta:g}")


def power_density(beta: float) -> Function1D:
    """rho(x) = beta * x**(beta-1), the density of the power family."""
    if beta <= 0:
        raise DomainError(f"exponent must be > 0, got {beta}")

    def f(x):
        return beta * np.power(np.asarray(x, float), beta - 1.0)

    def d1(x):
        return beta * (beta - 1.0) * np.power(np.asarray(x, float), beta - 2.0)

    return Function1D(f=f, derivatives=(d1,), name=f"power-density-{beta:g}")


# ---------------------------------------------------------------------------
# Grid moduli
# ---------------------------------------------------------------------------


def modulus1(f, delta: float, grid: ModulusGrid = DEFAULT_GRID) -> float:
    """First modulus: max |f(x) - f(y)| over grid pairs with |x - y| <= delta."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    func = as_function1d(f)
    v = np.asarray(func(grid.points()), float)
    d = grid.steps_upto(delta)
    if d == 0:
        return 0.0
    # forward-looking window [i, i+d]; edge replication cannot inflate the
    # range because the replicated value already belongs to the window
    w = d + 1
    rmax = maximum_filter1d(v, size=w, origin=-(w // 2), mode="nearest")
    rmin = minimum_filter1d(v, size=w, origin=-(w // 2), mode="nearest")
    return float(np.max(rmax - rmin))


def modulus2_profile(f, deltas, grid: ModulusGrid = DEFAULT_GRID) -> np.ndarray:
    """Second modulus at several deltas sharing one scan over step sizes."""
    deltas = np.asarray(deltas, float)
    if np.any((deltas < 0.0) | (deltas > 0.5)):
        raise DomainError("second-modulus deltas must lie in [0, 1/2]")
    func = as_function1d(f)
    v = np.asarray(func(grid.points()), float)
    dmax = grid.steps_upto(float(np.max(deltas))) if deltas.size else 0
    best = np.zeros(dmax + 1)
    for d in range(1, dmax + 1):
        diff = np.abs(v[: -2 * d] - 2.0 * v[d:-d] + v[2 * d :])
        best[d] = float(np.max(diff)) if diff.size else 0.0
    running = np.maximum.accumulate(best)
    idx = np.minimum([grid.steps_upto(t) for t in np.atleast_1d(deltas)], dmax)
    out = running[idx]
    return out if deltas.ndim else float(out[0])


def modulus2(f, delta: float, grid: ModulusGrid = DEFAULT_GRID) -> float:
    """Second modulus: max |f(x-h) - 2 f(x) + f(x+h)| over the grid, h <= delta
    with x - h and x + h inside [0, 1]."""
    return float(modulus2_profile(f, float(delta), grid))


def modulus2_dt(f, delta: float, grid: ModulusGrid = DEFAULT_GRID) -> float:
    """Weighted second modulus with step h*sigma(x): max over the grid of
    |f(x - h sigma(x)) - 2 f(x) + f(x + h sigma(x))| for 0 <= h <= delta and
    both displaced points inside [0, 1]."""
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    func = as_function1d(f)
    xs = grid.points()
    sg = sigma(xs)
    fx = np.asarray(func(xs), float)
    steps = grid.steps_upto(delta)
    best = 0.0
    for d in range(1, steps + 1):
        h = d * grid.spacing
        a = xs - h * sg
        b = xs + h * sg
        ok = (a >= 0.0) & (b <= 1.0)
        if not np.any(ok):
            continue
        diff = np.abs(
            np.asarray(func(a[ok]), float)
            - 2.0 * fx[ok]
            + np.asarray(func(b[ok]), float)
        )
        best = max(best, float(np.max(diff)))
    return best


# ---------------------------------------------------------------------------
# Closed forms for the power family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerFamilyModuli:
    """Closed-form modulus values; exact flags say equality vs upper bound."""

    omega1: float
    omega2: float
    omega1_exact: bool
    omega2_exact: bool


def power_term_modulus1(coeff: float, exponent: float, h: float) -> tuple:
    """(value, is_exact) for the first modulus of coeff * x**exponent."""
    c = abs(coeff)
    if exponent <= 0:
        raise DomainError(f"exponent must be > 0, got {exponent}")
    if exponent <= 1.0:
        return c * h**exponent, True
    return c * exponent * h, False


def power_term_modulus2(coeff: float, exponent: float, h: float) -> tuple:
    """(value, is_exact) for the second modulus of coeff * x**exponent."""
    c = abs(coeff)
    if exponent <= 0:
        raise DomainError(f"exponent must be > 0, got {exponent}")
    if exponent <= 2.0:
        return c * abs(2.0**exponent - 2.0) * h**exponent, True
    return c * exponent * (exponent - 1.0) * h**2, False


def power_family_moduli(beta: float, h: float) -> PowerFamilyModuli:
    """First and second moduli of x**beta at step h (h <= 1/2).

    Equalities hold for beta <= 1 (first) and beta <= 2 (second); outside
    those ranges the value is an upper bound and flagged as such.
    """
    if beta <= 0:
        raise DomainError(f"exponent must be > 0, got {beta}")
    if not 0.0 <= h <= 0.5:
        raise DomainError(f"step must lie in [0, 1/2], got {h}")
    w1, ex1 = power_term_modulus1(1.0, beta, h)
    w2, ex2 = power_term_modulus2(1.0, beta, h)
    return PowerFamilyModuli(omega1=w1, omega2=w2, omega1_exact=ex1, omega2_exact=ex2)


# ---------------------------------------------------------------------------
# Lipschitz profile fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LipschitzFit:
    C: float
    beta: float
    log_residual_rms: float
    exactly_smooth: bool = False
    beta_clamped: bool = False


def fit_lipschitz(samples) -> LipschitzFit:
    """Least-squares fit of log(modulus) = log C + beta log(delta).

    ``samples`` is a sequence of (delta, modulus value) pairs with delta > 0.
    All-zero values report the exactly-smooth sentinel C = 0.  beta is
    clamped to (0, 2].
    """
    pts = [(float(d), float(v)) for d, v in samples]
    if len(pts) < 2:
        raise ParameterError("fit needs at least 2 (delta, value) samples")
    if any(d <= 0 for d, _ in pts):
        raise DomainError("all deltas must be > 0")
    if all(v == 0.0 for _, v in pts):
        return LipschitzFit(C=0.0, beta=0.0, log_residual_rms=0.0, exactly_smooth=True)
    if any(v <= 0 for _, v in pts):
        raise DomainError("modulus values must be > 0 (or all zero)")
    ld = np.log([d for d, _ in pts])
    lv = np.log([v for _, v in pts])
    beta, logc = np.polyfit(ld, lv, 1)
    resid = lv - (beta * ld + logc)
    clamped = False
    if not 0.0 < beta <= 2.0:
        beta = min(max(beta, 1e-12), 2.0)
        clamped = True
        # refit C with the clamped slope
        logc = float(np.mean(lv - beta * ld))
        resid = lv - (beta * ld + logc)
    return LipschitzFit(
        C=float(np.exp(logc)),
        beta=float(beta),
        log_residual_rms=float(np.sqrt(np.mean(resid**2))),
        beta_clamped=clamped,
    )
