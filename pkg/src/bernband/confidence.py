"""Minimal-degree selection and finite-sample confidence regions.

Bands are uniform (sup-norm) regions for the CDF or its derivatives built on
the empirical-process tail bound; pointwise intervals come from the
Bennett-type concentration bound.  In both cases the estimator degree m is
the first integer at which explicit deterministic approximation conditions
hold, so every region is valid at its stated level for every n, not just
asymptotically.

Condition left-hand sides are evaluated along one of three routes, chosen by
the smoothness spec:

* ``OracleSpec``     -- target fully known, exact operator evaluation;
* ``PowerFamilySpec`` -- target is x**beta: the n-dependent approximation
  condition uses the family's closed-form modulus bounds (this is what gives
  the m ~ n**(1/beta) degree orders), while the variance-side condition,
  which does not involve n, is evaluated exactly;
* ``FittedSpec``     -- plug-in profile modulus <= C delta**beta together
  with estimated values of the unknown CDF/density (mode tagged "plugin" and
  preconditions flagged approximate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .bounds import (
    ProbabilityBound,
    constants_for,
    l_alpha,
    tau,
    tau_inverse,
)
from .errors import (
    DegreeSearchError,
    DomainError,
    ParameterError,
    PreconditionError,
)
from .estimators import (
    Sample,
    b2_uniform_estimate,
    bernstein_cdf_estimate,
    bernstein_derivative_estimate,
)
from .operators import (
    Function1D,
    OperatorParams,
    ShiftLaw,
    as_function1d,
    bernstein_apply,
    falling_factorial,
    kantorovich_apply,
    lmk_rplusv_apply,
)
from .serialize import write_csv
from .smoothness import (
    FittedSpec,
    OracleSpec,
    PowerFamilySpec,
    power_term_modulus1,
    power_term_modulus2,
    sigma,
)

__all__ = [
    "ConditionCheck",
    "DegreeSearchReport",
    "ConfidenceRegion",
    "band_for_cdf",
    "band_for_derivative",
    "band_uniform_b2",
    "interval_uniform_b2",
    "interval_for_cdf",
    "interval_for_derivative",
    "cdf_deviation_bound",
    "derivative_deviation_bound",
    "select_degree",
    "write_region",
]

DEFAULT_M_MAX = 10**6
_BAND_CONDITION_GRID = 1001
_REGION_GRID = 201


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class DegreeSearchReport:
    kind: str
    m_selected: int | None
    satisfied: bool
    m_min: int
    m_max: int
    conditions: tuple = ()  # checks at m_selected (or at m_max on failure)
    residuals_below: tuple = ()  # checks at m_selected - 1 when above the floor
    n_evaluations: int = 0

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "m_selected": self.m_selected,
            "satisfied": self.satisfied,
            "m_min": self.m_min,
            "m_max": self.m_max,
            "conditions": [c.as_dict() for c in self.conditions],
            "residuals_below": [c.as_dict() for c in self.residuals_below],
            "n_evaluations": self.n_evaluations,
        }


@dataclass(frozen=True)
class ConfidenceRegion:
    """A uniform band or pointwise interval around an estimate."""

    kind: str  # "band" | "interval"
    k: int
    alpha: float
    x: np.ndarray
    center: np.ndarray
    half_width: np.ndarray  # scalar-like for bands, per-x for some intervals
    m: int
    method: str
    mode: str
    n: int
    report: DegreeSearchReport | None = None
    extras: dict = field(default_factory=dict)

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - np.asarray(self.half_width)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center) + np.asarray(self.half_width)

    def rows(self) -> list:
        xs = np.atleast_1d(np.asarray(self.x, float))
        cs = np.broadcast_to(np.asarray(self.center, float), xs.shape)
        hw = np.broadcast_to(np.asarray(self.half_width, float), xs.shape)
        return [
            {"x": x, "estimate": c, "lower": c - w, "upper": c + w}
            for x, c, w in zip(xs, cs, hw)
        ]

    def sidecar(self) -> dict:
        out = {
            "alpha": self.alpha,
            "m": self.m,
            "method": self.method,
            "mode": self.mode,
            "kind": self.kind,
            "k": self.k,
            "n": self.n,
            "conditions": [
                c.as_dict() for c in (self.report.conditions if self.report else ())
            ],
        }
        if self.report is not None:
            out["degree_search"] = self.report.as_dict()
        out.update(self.extras)
        return out


def write_region(region: ConfidenceRegion, csv_path) -> bytes:
    return write_csv(csv_path, ["x", "estimate", "lower", "upper"], region.rows())


# ---------------------------------------------------------------------------
# Degree search
# ---------------------------------------------------------------------------


def _search_minimal_degree(kind, check_fn, m_min, m_max) -> DegreeSearchReport:
    """First m in [m_min, m_max] satisfying every condition.

    Doubling to bracket, bisection on the first satisfied index, then a
    walk-back so that m_selected - 1 provably fails (unless at the floor).
    """
    cache: dict = {}

    def conds(m):
        if m not in cache:
            cache[m] = tuple(check_fn(m))
        return cache[m]

    def ok(m):
        return all(c.satisfied for c in conds(m))

    if m_min > m_max:
        raise ParameterError(f"empty search range [{m_min}, {m_max}]")
    m = m_min
    last_fail = None
    while not ok(m):
        last_fail = m
        if m >= m_max:
            return DegreeSearchReport(
                kind=kind,
                m_selected=None,
                satisfied=False,
                m_min=m_min,
                m_max=m_max,
                conditions=conds(m_max),
                residuals_below=(),
                n_evaluations=len(cache),
            )
        m = min(2 * m, m_max)
    if last_fail is not None:
        lo, hi = last_fail, m  # ok(hi), not ok(lo)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        m = hi
    while m - 1 >= m_min and ok(m - 1):
        m -= 1
    below = conds(m - 1) if m - 1 >= m_min else ()
    return DegreeSearchReport(
        kind=kind,
        m_selected=m,
        satisfied=True,
        m_min=m_min,
        m_max=m_max,
        conditions=conds(m),
        residuals_below=below,
        n_evaluations=len(cache),
    )


# ---------------------------------------------------------------------------
# Condition left-hand sides per smoothness route
# ---------------------------------------------------------------------------


def _mode_of(spec) -> str:
    return "plugin" if isinstance(spec, FittedSpec) else "oracle"


def _sup_power_modulus2(coeff, exponent, m) -> float:
    # sup_x omega_2 bound at step sigma(x)/sqrt(m); sup sigma(x)^p = 2^-p
    if exponent <= 2.0:
        return abs(coeff) * abs(2.0**exponent - 2.0) * 2.0**-exponent * m ** (-exponent / 2.0)
    return abs(coeff) * exponent * (exponent - 1.0) * 0.25 / m


def _power_derivative(beta, k):
    """coefficient and exponent of the k-th derivative of x**beta."""
    coeff = 1.0
    for j in range(k):
        coeff *= beta - j
    return coeff, beta - k


def _cdf_uniform_error(spec, m, grid_x) -> float:
    """sup_x |B_m(F;x) - F(x)| (exact or bounded, by route)."""
    if isinstance(spec, OracleSpec):
        fx = np.asarray(spec.f(grid_x), float)
        return float(np.max(np.abs(bernstein_apply(spec.f, m, grid_x) - fx)))
    if isinstance(spec, PowerFamilySpec):
        return _sup_power_modulus2(1.5, spec.beta, m)
    # FittedSpec
    if spec.modulus == "second_dt":
        return 2.5 * spec.C * m ** (-spec.beta / 2.0)
    return 1.5 * spec.C * 2.0**-spec.beta * m ** (-spec.beta / 2.0)


def _derivative_uniform_error(spec, m, k, grid_x) -> float:
    """sup_x |(m)_k/m^k B_{m,k}(F^(k);x) - F^(k)(x)| (exact or bounded)."""
    scale = falling_factorial(m, k) / m**k
    if isinstance(spec, OracleSpec):
        fk = spec.f.derivative(k)
        vals = kantorovich_apply(fk, OperatorParams(m, k), ShiftLaw.irwin_hall(k), grid_x)
        return float(np.max(np.abs(scale * np.asarray(vals) - np.asarray(fk(grid_x), float))))
    if isinstance(spec, PowerFamilySpec):
        coeff, expo = _power_derivative(spec.beta, k)
        if expo <= 0:
            raise ParameterError(
                f"power family beta={spec.beta} is not C^{k} on [0,1]"
            )
        w1, _ = power_term_modulus1(coeff, expo, 1.0 / m)
        bound = 2.0 * k * w1 + 1.5 * _sup_power_modulus2(coeff, expo, m)
        return bound + (1.0 - scale) * abs(coeff)
    # FittedSpec: C describes the operator-error profile directly
    return spec.C * m ** (-spec.beta / 2.0)


def _interval_cdf_lhs(spec, m, x, f_value) -> tuple:
    """(variance-side lhs, cdf-side lhs) of the pointwise CDF conditions."""
    if isinstance(spec, FittedSpec):
        if spec.modulus != "second":
            raise ParameterError(
                "pointwise CDF intervals need a plain second-modulus profile "
                "(FittedSpec(modulus='second'))"
            )
        common = 1.5 * spec.C * (float(sigma(x)) / math.sqrt(m)) ** spec.beta
        return common, common
    f = spec.cdf() if isinstance(spec, PowerFamilySpec) else spec.f
    var_fun = lambda t: np.asarray(f(t), float) * (1.0 - np.asarray(f(t), float))
    lhs_var = abs(
        float(bernstein_apply(var_fun, m, x)) - f_value * (1.0 - f_value)
    )
    if isinstance(spec, PowerFamilySpec):
        val, _ = power_term_modulus2(1.0, spec.beta, float(sigma(x)) / math.sqrt(m))
        lhs_cdf = 1.5 * val
    else:
        lhs_cdf = abs(float(bernstein_apply(f, m, x)) - f_value)
    return lhs_var, lhs_cdf


def _interval_derivative_lhs(spec, m, k, x, rho_value) -> tuple:
    """(density-side lhs, derivative-side lhs) of the pointwise conditions."""
    if isinstance(spec, FittedSpec):
        common = spec.C * m ** (-spec.beta / 2.0)
        return common, common
    if isinstance(spec, PowerFamilySpec):
        rho = spec.density()
        lhs_rho = abs(float(lmk_rplusv_apply(rho, OperatorParams(m, k), x)) - rho_value)
        coeff, expo = _power_derivative(spec.beta, k)
        if expo <= 0:
            raise ParameterError(f"power family beta={spec.beta} is not C^{k} on [0,1]")
        h = float(sigma(x)) / math.sqrt(m)
        w1, _ = power_term_modulus1(coeff, expo, 1.0 / m)
        w2, _ = power_term_modulus2(coeff, expo, h)
        scale = falling_factorial(m, k) / m**k
        lhs_der = 2.0 * k * w1 + 1.5 * w2 + (1.0 - scale) * abs(coeff)
        return lhs_rho, lhs_der
    rho = spec.f.derivative(1)
    fk = spec.f.derivative(k)
    lhs_rho = abs(float(lmk_rplusv_apply(rho, OperatorParams(m, k), x)) - rho_value)
    scale = falling_factorial(m, k) / m**k
    val = float(
        kantorovich_apply(fk, OperatorParams(m, k), ShiftLaw.irwin_hall(k), x)
    )
    lhs_der = abs(scale * val - float(np.asarray(fk(x), float)))
    return lhs_rho, lhs_der


# ---------------------------------------------------------------------------
# Public degree selection
# ---------------------------------------------------------------------------


def select_degree(
    kind: str,
    n: int,
    alpha: float,
    spec,
    x: float | None = None,
    k: int = 0,
    f_of_x: float | None = None,
    rho_of_x: float | None = None,
    m_max: int = DEFAULT_M_MAX,
    condition_grid: int = _BAND_CONDITION_GRID,
) -> DegreeSearchReport:
    """Minimal degree for one of the condition sets.

    kinds: ``band-cdf``, ``band-derivative``, ``interval-cdf``,
    ``interval-derivative`` (the k = 1 case of the latter is the density
    interval with its combined condition).  Plug-in specs require the
    relevant plug-in value (``f_of_x`` / ``rho_of_x``).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 2:
        raise PreconditionError("confidence machinery needs n >= 2", "n >= 2")
    la = l_alpha(alpha)
    grid_x = np.linspace(0.0, 1.0, condition_grid)

    if kind == "band-cdf":
        rhs = 0.5 * math.sqrt(2.0 * math.log(2.0 / alpha) / n)

        def checks(m):
            return [ConditionCheck("band-cdf-approx", _cdf_uniform_error(spec, m, grid_x), rhs)]

        return _search_minimal_degree(kind, checks, 2, m_max)

    if kind == "band-derivative":
        if k < 1:
            raise ParameterError("band-derivative needs k >= 1 (use band-cdf for k=0)")
        root = math.sqrt(2.0 * math.log(2.0 / alpha) / n)

        def checks(m):
            rhs = 0.5 * 2.0**k * falling_factorial(m, k) * root
            return [
                ConditionCheck(
                    "band-derivative-approx",
                    _derivative_uniform_error(spec, m, k, grid_x),
                    rhs,
                )
            ]

        return _search_minimal_degree(kind, checks, max(k + 1, 2), m_max)

    if kind == "interval-cdf":
        if x is None:
            raise ParameterError("interval-cdf needs the evaluation point x")
        fx = _resolve_target_value(spec, x, f_of_x, density=False)
        s2 = fx * (1.0 - fx)

        def checks(m):
            lhs_var, lhs_cdf = _interval_cdf_lhs(spec, m, x, fx)
            return [
                ConditionCheck("variance-approx", lhs_var, s2 / la**2),
                ConditionCheck("cdf-approx", lhs_cdf, math.sqrt(s2) * la / math.sqrt(n)),
            ]

        return _search_minimal_degree(kind, checks, 2, m_max)

    if kind == "interval-derivative":
        if x is None:
            raise ParameterError("interval-derivative needs the evaluation point x")
        if k < 1:
            raise ParameterError("interval-derivative needs k >= 1")
        rho = _resolve_target_value(spec, x, rho_of_x, density=True)
        if rho <= 0:
            raise PreconditionError(
                f"density value at x={x} must be > 0, got {rho}", "rho(x) > 0"
            )
        central = math.comb(2 * (k - 1), k - 1)

        def checks(m):
            s_k = falling_factorial(m, k) / math.sqrt(m) * math.sqrt(central)
            lhs_rho, lhs_der = _interval_derivative_lhs(spec, m, k, x, rho)
            return [
                ConditionCheck("rho-approx", lhs_rho, rho / la**2),
                ConditionCheck(
                    "derivative-approx", lhs_der, la * math.sqrt(rho / n) * s_k
                ),
            ]

        return _search_minimal_degree(kind, checks, max(k + 1, 2), m_max)

    raise ParameterError(f"unknown degree-selection kind {kind!r}")


def _resolve_target_value(spec, x, supplied, density: bool) -> float:
    if supplied is not None:
        return float(supplied)
    if isinstance(spec, PowerFamilySpec):
        fun = spec.density() if density else spec.cdf()
        return float(np.asarray(fun(x), float))
    if isinstance(spec, OracleSpec):
        fun = spec.f.derivative(1) if density else spec.f
        return float(np.asarray(fun(x), float))
    raise ParameterError(
        "plug-in spec needs an explicit plug-in value for the target at x"
    )


def _require_selected(report: DegreeSearchReport) -> int:
    if not report.satisfied:
        raise DegreeSearchError(
            f"no degree m <= {report.m_max} satisfies the {report.kind} conditions; "
            "residual trace attached",
            report=report,
        )
    return int(report.m_selected)


# ---------------------------------------------------------------------------
# Bands
# ---------------------------------------------------------------------------


def _band_grid(x_grid) -> np.ndarray:
    if x_grid is None:
        return np.linspace(0.0, 1.0, _REGION_GRID)
    return np.atleast_1d(np.asarray(x_grid, float))


def band_for_cdf(
    sample: Sample,
    alpha: float,
    spec,
    x_grid=None,
    m_max: int = DEFAULT_M_MAX,
) -> ConfidenceRegion:
    """Uniform band for the CDF: half-width sqrt(2 log(2/alpha) / n) around
    the Bernstein estimate at the minimal admissible degree."""
    n = sample.n
    report = select_degree("band-cdf", n, alpha, spec, m_max=m_max)
    m = _require_selected(report)
    xs = _band_grid(x_grid)
    center = np.atleast_1d(bernstein_cdf_estimate(sample, m, xs))
    hw = math.sqrt(2.0 * math.log(2.0 / alpha) / n)
    return ConfidenceRegion(
        kind="band",
        k=0,
        alpha=alpha,
        x=xs,
        center=center,
        half_width=np.full_like(center, hw),
        m=m,
        method="bernstein-cdf-band",
        mode=_mode_of(spec),
        n=n,
        report=report,
        extras={"half_width_uniform": hw},
    )


def band_for_derivative(
    sample: Sample,
    k: int,
    alpha: float,
    spec,
    x_grid=None,
    m_max: int = DEFAULT_M_MAX,
) -> ConfidenceRegion:
    """Uniform band for the k-th derivative of the CDF; k = 0 delegates to
    the CDF band.  Half-width 2^k (m)_k sqrt(2 log(2/alpha) / n)."""
    if k == 0:
        return band_for_cdf(sample, alpha, spec, x_grid=x_grid, m_max=m_max)
    n = sample.n
    report = select_degree("band-derivative", n, alpha, spec, k=k, m_max=m_max)
    m = _require_selected(report)
    xs = _band_grid(x_grid)
    center = np.atleast_1d(bernstein_derivative_estimate(sample, m, k, xs))
    hw = 2.0**k * falling_factorial(m, k) * math.sqrt(2.0 * math.log(2.0 / alpha) / n)
    return ConfidenceRegion(
        kind="band",
        k=k,
        alpha=alpha,
        x=xs,
        center=center,
        half_width=np.full_like(center, hw),
        m=m,
        method="bernstein-derivative-band",
        mode=_mode_of(spec),
        n=n,
        report=report,
        extras={"half_width_uniform": hw},
    )


def band_uniform_b2(sample: Sample, alpha: float, x_grid=None) -> ConfidenceRegion:
    """Closed-form uniform band around the degree-2 estimator for the uniform
    target: half-width sqrt(log(2/alpha) / (8 n)), half the two-sided
    empirical-process band at the same level."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = sample.n
    delta = math.sqrt(math.log(2.0 / alpha) / (8.0 * n))
    xs = _band_grid(x_grid)
    center = np.atleast_1d(b2_uniform_estimate(sample, xs))
    return ConfidenceRegion(
        kind="band",
        k=0,
        alpha=alpha,
        x=xs,
        center=center,
        half_width=np.full_like(center, delta),
        m=2,
        method="b2-uniform-band",
        mode="oracle",
        n=n,
        extras={
            "half_width_uniform": delta,
            "dkw_half_width": math.sqrt(math.log(2.0 / alpha) / (2.0 * n)),
        },
    )


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


def _check_interior(x) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, float))
    if np.any((xs <= 0.0) | (xs >= 1.0)):
        raise PreconditionError(
            "pointwise intervals need x in the open interval (0, 1): "
            "sigma(x) = 0 degenerates the construction at the endpoints",
            constraint="0 < x < 1",
        )
    return xs


def interval_uniform_b2(sample: Sample, x, alpha: float) -> ConfidenceRegion:
    """Pointwise interval around the degree-2 estimator for the uniform
    target, half-width 4 sigma^2(x) delta with the exact Bennett exponent
    inverted: 2 exp(-n tau(8 delta) / 4) = alpha.

    The weakened quadratic-form solution (valid for delta <= 1/8) is reported
    alongside in the extras.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = sample.n
    xs = _check_interior(x)
    delta = tau_inverse(4.0 * math.log(2.0 / alpha) / n) / 8.0
    target = math.log(2.0 / alpha)

    def weak(d):
        return 8.0 * n * d * d * (1.0 - 8.0 * d / 3.0) - target

    delta_weak = None
    if weak(0.125) >= 0.0:
        delta_weak = float(brentq(weak, 0.0, 0.125, xtol=1e-14))
    center = np.atleast_1d(b2_uniform_estimate(sample, xs))
    hw = 4.0 * xs * (1.0 - xs) * delta
    scalar = np.isscalar(x) or np.ndim(x) == 0
    return ConfidenceRegion(
        kind="interval",
        k=0,
        alpha=alpha,
        x=float(xs[0]) if scalar else xs,
        center=float(center[0]) if scalar else center,
        half_width=float(hw[0]) if scalar else hw,
        m=2,
        method="b2-uniform-interval",
        mode="oracle",
        n=n,
        extras={"delta": delta, "delta_weakened": delta_weak},
    )


def interval_for_cdf(
    sample: Sample,
    x: float,
    alpha: float,
    spec,
    f_of_x: float | None = None,
    m_max: int = DEFAULT_M_MAX,
) -> ConfidenceRegion:
    """Pointwise interval for the CDF at x: half-width
    (2 l_alpha + 1/l_alpha) sigma(F(x)) / sqrt(n) at the minimal degree
    satisfying the variance- and CDF-approximation conditions.

    Precondition n >= l_alpha^2 / sigma^2(F(x)); with a plug-in spec the
    check uses the plug-in value and is flagged approximate.
    """
    n = sample.n
    _check_interior(x)
    x = float(x)
    mode = _mode_of(spec)
    if f_of_x is None and isinstance(spec, FittedSpec):
        pilot_m = max(2, math.ceil(math.sqrt(n)))
        f_of_x = float(bernstein_cdf_estimate(sample, pilot_m, x))
    fx = _resolve_target_value(spec, x, f_of_x, density=False)
    if not 0.0 < fx < 1.0:
        raise PreconditionError(
            f"target CDF value at x={x} must lie in (0,1), got {fx}",
            constraint="0 < F(x) < 1",
        )
    la = l_alpha(alpha)
    s2 = fx * (1.0 - fx)
    if n < la**2 / s2:
        raise PreconditionError(
            f"sample too small: n={n} < l_alpha^2 / sigma^2(F(x)) = {la**2 / s2:.6g}"
            + (" (plug-in value, approximate)" if mode == "plugin" else ""),
            constraint="n >= l_alpha^2 / sigma^2(F(x))",
        )
    report = select_degree(
        "interval-cdf", n, alpha, spec, x=x, f_of_x=fx, m_max=m_max
    )
    m = _require_selected(report)
    hw = (2.0 * la + 1.0 / la) * math.sqrt(s2) / math.sqrt(n)
    return ConfidenceRegion(
        kind="interval",
        k=0,
        alpha=alpha,
        x=x,
        center=float(bernstein_cdf_estimate(sample, m, x)),
        half_width=hw,
        m=m,
        method="bernstein-cdf-interval",
        mode=mode,
        n=n,
        report=report,
        extras={
            "f_of_x": fx,
            "width_multiplier": 2.0 * la + 1.0 / la,
            "approximate_precondition": mode == "plugin",
        },
    )


def interval_for_derivative(
    sample: Sample,
    x: float,
    k: int,
    alpha: float,
    spec,
    rho_of_x: float | None = None,
    m_max: int = DEFAULT_M_MAX,
) -> ConfidenceRegion:
    """Pointwise interval for the k-th derivative of the CDF at x:
    half-width (2 l_alpha + 1/l_alpha) sqrt(rho(x)/n) s_k(m).

    After degree selection the growth constraint
    m/n <= rho(x) C(2(k-1),k-1) / (l_alpha^2 d_k^2) is verified and a
    violation is reported by name.
    """
    if k < 1:
        raise ParameterError("interval_for_derivative needs k >= 1")
    n = sample.n
    _check_interior(x)
    x = float(x)
    mode = _mode_of(spec)
    if rho_of_x is None and isinstance(spec, FittedSpec):
        pilot_m = max(2, math.ceil(n ** (1.0 / 3.0)))
        rho_of_x = float(bernstein_derivative_estimate(sample, pilot_m, 1, x))
    rho = _resolve_target_value(spec, x, rho_of_x, density=True)
    report = select_degree(
        "interval-derivative", n, alpha, spec, x=x, k=k, rho_of_x=rho, m_max=m_max
    )
    m = _require_selected(report)
    la = l_alpha(alpha)
    d_k = math.comb(k - 1, k // 2)
    central = math.comb(2 * (k - 1), k - 1)
    if m / n > rho * central / (la**2 * d_k**2):
        raise PreconditionError(
            f"degree growth constraint violated at m={m}: m/n = {m/n:.6g} > "
            f"rho(x) C(2(k-1),k-1) / (l_alpha^2 d_k^2) = "
            f"{rho * central / (la**2 * d_k**2):.6g}"
            + (" (plug-in value, approximate)" if mode == "plugin" else ""),
            constraint="m/n <= rho(x) C(2(k-1),k-1) / (l_alpha^2 d_k^2)",
        )
    s_k = falling_factorial(m, k) / math.sqrt(m) * math.sqrt(central)
    hw = (2.0 * la + 1.0 / la) * math.sqrt(rho / n) * s_k
    return ConfidenceRegion(
        kind="interval",
        k=k,
        alpha=alpha,
        x=x,
        center=float(bernstein_derivative_estimate(sample, m, k, x)),
        half_width=hw,
        m=m,
        method="bernstein-derivative-interval" if k > 1 else "bernstein-density-interval",
        mode=mode,
        n=n,
        report=report,
        extras={
            "rho_of_x": rho,
            "width_multiplier": 2.0 * la + 1.0 / la,
            "s_k": s_k,
            "approximate_precondition": mode == "plugin",
        },
    )


# ---------------------------------------------------------------------------
# Raw deviation bounds (diagnostics / simulation oracles)
# ---------------------------------------------------------------------------


def cdf_deviation_bound(f, m: int, x: float, eps: float, n: int):
    """(radius, bound) of the pointwise CDF deviation inequality:

    radius = eps B_m(sigma^2(F); x) + |B_m(F;x) - F(x)|,
    bound  = 2 exp(-(n / q_m(x)) B_m(sigma^2(F); x) tau(eps)),
    with q_m(x) = 1 - x^m - (1-x)^m.
    """
    func = as_function1d(f)
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    var_fun = lambda t: np.asarray(func(t), float) * (1.0 - np.asarray(func(t), float))
    bvar = float(bernstein_apply(var_fun, m, x))
    bias = abs(float(bernstein_apply(func, m, x)) - float(np.asarray(func(x), float)))
    radius = eps * bvar + bias
    q = 1.0 - x**m - (1.0 - x) ** m
    bound = ProbabilityBound(2.0 * math.exp(-(n / q) * bvar * float(tau(eps))))
    return radius, bound


def derivative_deviation_bound(rho, m: int, k: int, x: float, delta: float, n: int, fk=None):
    """(radius, bound) of the pointwise derivative deviation inequality:

    radius = delta L_{m,k}(rho; x) + |(m)_k/m^k B_{m,k}(F^(k); x) - F^(k)(x)|,
    bound  = 2 exp(-(n / ((m)_k d_k r_k(m))) L_{m,k}(rho; x) tau(r_k(m) delta)).

    ``fk`` is the k-th derivative of the CDF; it defaults to rho when k = 1.
    """
    if k < 1:
        raise ParameterError(f"needs k >= 1, got {k}")
    rho_f = as_function1d(rho)
    fk_f = rho_f if fk is None and k == 1 else as_function1d(fk)
    params = OperatorParams(m, k)
    lval = float(lmk_rplusv_apply(rho_f, params, x))
    scale = params.falling / m**k
    bval = float(kantorovich_apply(fk_f, params, ShiftLaw.irwin_hall(k), x))
    bias = abs(scale * bval - float(np.asarray(fk_f(x), float)))
    radius = delta * lval + bias
    d_k = math.comb(k - 1, k // 2)
    central = math.comb(2 * (k - 1), k - 1)
    r_k = m * d_k / (params.falling * central)
    bound = ProbabilityBound(
        2.0 * math.exp(-(n / (params.falling * d_k * r_k)) * lval * float(tau(r_k * delta)))
    )
    return radius, bound
