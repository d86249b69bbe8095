"""Deterministic positive linear operators on [0,1].

Bernstein basis weights and polynomials, forward differences, Kantorovich-type
averaged operators (uniform-sum and binomial-square shift laws), and the
derivative operator of Bernstein polynomials.

Basis weights are evaluated in log space (log-binomial via ``gammaln`` plus
``k log x + (m-k) log(1-x)``), which keeps degrees up to ~1e5 usable without
overflow at ~1e-13 relative accuracy.  Beyond ``FULL_EVAL_MAX`` the binomial
weight vector is truncated to a window around ``m*x`` whose complementary
tail mass is below ``TAIL_TOL``; the induced absolute error on any operator
value is at most ``TAIL_TOL * sup|f|``.

All operations are pure; values are immutable after construction and safe to
evaluate concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import DomainError, ParameterError, QuadratureError

__all__ = [
    "FULL_EVAL_MAX",
    "TAIL_TOL",
    "Function1D",
    "OperatorParams",
    "ShiftLaw",
    "as_function1d",
    "falling_factorial",
    "bernstein_basis",
    "bernstein_weights",
    "bernstein_matrix",
    "bernstein_apply",
    "forward_difference",
    "kantorovich_apply",
    "lmk_rplusv_apply",
    "bernstein_derivative_apply",
    "irwin_hall_density",
    "irwin_hall_cdf",
]

# Degrees up to this size get the full weight vector; larger degrees use a
# tail-truncated window (Hoeffding tail mass <= TAIL_TOL on each side).
FULL_EVAL_MAX = 20_000
TAIL_TOL = 1e-15

_GL_NODES_PER_UNIT = 16


def falling_factorial(m: int, k: int) -> int:
    """(m)_k = m (m-1) ... (m-k+1), exactly; (m)_0 = 1."""
    if k < 0 or m < 0 or k > m:
        raise ParameterError(f"falling factorial needs 0 <= k <= m, got m={m}, k={k}")
    return math.perm(m, k)


@dataclass(frozen=True)
class Function1D:
    """A deterministic function on [0,1] with optional analytic derivatives.

    ``f`` must accept numpy arrays.  ``derivatives[i-1]`` is the i-th
    derivative when known.  ``is_step_function`` says the function is
    piecewise constant and right-continuous with the given breakpoints, in
    which case inner integrals against uniform shift components are computed
    by exact breakpoint splitting instead of quadrature.
    """

    f: Callable
    derivatives: tuple = ()
    is_step_function: bool = False
    breakpoints: tuple = ()
    name: str = ""

    def __call__(self, x):
        return self.f(x)

    def derivative(self, order: int) -> Callable:
        if order == 0:
            return self.f
        if order > len(self.derivatives):
            raise ParameterError(
                f"function {self.name or repr(self.f)} has no derivative of order {order}"
            )
        return self.derivatives[order - 1]


def as_function1d(f) -> Function1D:
    """Wrap a bare callable; pass Function1D through unchanged."""
    if isinstance(f, Function1D):
        return f
    if callable(f):
        return Function1D(f=f)
    raise ParameterError(f"expected a callable or Function1D, got {type(f)!r}")


@dataclass(frozen=True)
class OperatorParams:
    """Degree / derivative-order pair with its falling factorial (m)_k."""

    m: int
    k: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"degree m must be >= 1, got {self.m}")
        if self.k < 0:
            raise ParameterError(f"order k must be >= 0, got {self.k}")
        if self.k > self.m:
            raise ParameterError(f"order k={self.k} exceeds degree m={self.m}")

    @property
    def falling(self) -> int:
        return falling_factorial(self.m, self.k)

    def require_kantorovich(self):
        if self.m <= self.k:
            raise ParameterError(
                f"Kantorovich-type evaluation requires m > k, got m={self.m}, k={self.k}"
            )


def _gl_unit_rule(a: float, b: float, n: int = _GL_NODES_PER_UNIT):
    """Gauss-Legendre nodes/weights on [a, b]."""
    xi, wi = leggauss(n)
    half = 0.5 * (b - a)
    return half * xi + 0.5 * (a + b), half * wi


@dataclass(frozen=True)
class ShiftLaw:
    """Law of the index shift T in Kantorovich-type operators.

    kinds:
      - ``none``:        T = 0 (order 0),
      - ``irwin_hall``:  T = V_1 + ... + V_k, sum of k independent uniforms,
      - ``r_plus_v``:    T = R + V with P(R = j) = C(k-1,j)^2 / C(2(k-1),k-1)
                         for j = 0..k-1 and V uniform.

    ``expectation_rule`` returns nodes/weights integrating g against the law
    of T; per-unit-interval Gauss-Legendre is exact for piecewise polynomials
    of degree <= 2*nodes_per_unit - k on integer subintervals.
    """

    kind: str
    order: int
    nodes_per_unit: int = _GL_NODES_PER_UNIT

    def __post_init__(self):
        if self.kind not in ("none", "irwin_hall", "r_plus_v"):
            raise ParameterError(f"unknown shift law kind {self.kind!r}")
        if self.kind == "none" and self.order != 0:
            raise ParameterError("shift law 'none' has order 0")
        if self.kind != "none" and self.order < 1:
            raise ParameterError(f"shift law {self.kind!r} needs order >= 1")

    @staticmethod
    def none() -> "ShiftLaw":
        return ShiftLaw(kind="none", order=0)

    @staticmethod
    def irwin_hall(k: int) -> "ShiftLaw":
        if k == 0:
            return ShiftLaw.none()
        return ShiftLaw(kind="irwin_hall", order=k)

    @staticmethod
    def r_plus_v(k: int) -> "ShiftLaw":
        if k == 0:
            return ShiftLaw.none()
        return ShiftLaw(kind="r_plus_v", order=k)

    def discrete_mixture(self) -> tuple:
        """(offsets j, probabilities) of the integer part; uniform V rides on top."""
        k = self.order
        if self.kind == "r_plus_v":
            js = np.arange(k)
            ps = np.array([math.comb(k - 1, j) ** 2 for j in js], float)
            return js, ps / math.comb(2 * (k - 1), k - 1)
        raise ParameterError(f"shift law {self.kind!r} has no discrete+uniform split")

    def expectation_rule(self, nodes_per_unit: int | None = None):
        """Nodes t_i in [0, order] and weights w_i with sum w_i = 1 (exactly
        for smooth laws) such that E g(T) ~= sum_i w_i g(t_i)."""
        npu = nodes_per_unit or self.nodes_per_unit
        if self.kind == "none":
            return np.zeros(1), np.ones(1)
        k = self.order
        if self.kind == "irwin_hall":
            nodes, weights = [], []
            for j in range(k):
                t, w = _gl_unit_rule(j, j + 1, npu)
                nodes.append(t)
                weights.append(w * irwin_hall_density(k, t))
            return np.concatenate(nodes), np.concatenate(weights)
        js, ps = self.discrete_mixture()
        nodes, weights = [], []
        for j, p in zip(js, ps):
            t, w = _gl_unit_rule(j, j + 1, npu)
            nodes.append(t + 0.0)
            weights.append(w * p)
        return np.concatenate(nodes), np.concatenate(weights)

    def cdf(self, t):
        """Distribution function of T, used for exact step-function splitting."""
        t = np.asarray(t, float)
        if self.kind == "none":
            return (t >= 0.0).astype(float)
        if self.kind == "irwin_hall":
            return irwin_hall_cdf(self.order, np.clip(t, 0.0, self.order))
        js, ps = self.discrete_mixture()
        return np.clip(t[..., None] - js, 0.0, 1.0) @ ps


def irwin_hall_density(k: int, t):
    """Density of V_1 + ... + V_k at t in [0, k] (piecewise polynomial)."""
    if k < 1:
        raise DomainError(f"irwin_hall_density needs k >= 1, got {k}")
    t = np.asarray(t, float)
    if np.any((t < 0) | (t > k)):
        raise DomainError(f"t outside [0, {k}]")
    if k == 1:
        out = np.ones_like(t)
        return out if out.ndim else float(out)
    # exponent k-1 >= 1, so the truncated powers vanish cleanly at t = j
    out = np.zeros_like(t)
    for j in range(k + 1):
        out += (-1) ** j * math.comb(k, j) * np.clip(t - j, 0.0, None) ** (k - 1)
    out /= math.factorial(k - 1)
    return out if out.ndim else float(out)


def irwin_hall_cdf(k: int, t):
    """Distribution function of V_1 + ... + V_k."""
    if k < 1:
        raise DomainError(f"irwin_hall_cdf needs k >= 1, got {k}")
    t = np.asarray(np.clip(t, 0.0, k), float)
    out = np.zeros_like(t)
    for j in range(k + 1):
        out += (-1) ** j * math.comb(k, j) * np.clip(t - j, 0.0, None) ** k
    out /= math.factorial(k)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Bernstein basis
# ---------------------------------------------------------------------------


def _check_point(x):
    x = np.asarray(x, float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("evaluation point outside [0, 1]")
    return x


def support_window(m: int, x: float, tail_tol: float = TAIL_TOL) -> tuple:
    """Index range [lo, hi] whose complement carries binomial(m, x) tail mass
    at most ``tail_tol`` per side (Hoeffding)."""
    if m <= FULL_EVAL_MAX:
        return 0, m
    t = math.sqrt(0.5 * m * math.log(2.0 / tail_tol))
    lo = max(0, int(math.floor(m * x - t)))
    hi = min(m, int(math.ceil(m * x + t)))
    return lo, hi


def bernstein_weights(m: int, x: float, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """p_{m,k}(x) for k = lo..hi at a single point x."""
    if hi is None:
        hi = m
    if x == 0.0 or x == 1.0:
        w = np.zeros(hi - lo + 1)
        edge = 0 if x == 0.0 else m
        if lo <= edge <= hi:
            w[edge - lo] = 1.0
        return w
    ks = np.arange(lo, hi + 1, dtype=float)
    logw = (
        gammaln(m + 1.0)
        - gammaln(ks + 1.0)
        - gammaln(m - ks + 1.0)
        + ks * math.log(x)
        + (m - ks) * math.log1p(-x)
    )
    return np.exp(logw)


def bernstein_basis(m: int, k: int, x):
    """Basis polynomial p_{m,k}(x) = C(m,k) x^k (1-x)^(m-k)."""
    if m < 0 or k < 0 or k > m:
        raise DomainError(f"basis index out of range: m={m}, k={k}")
    x = _check_point(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    out = np.empty_like(xs)
    interior = (xs > 0.0) & (xs < 1.0)
    if np.any(interior):
        xi = xs[interior]
        logw = (
            gammaln(m + 1.0)
            - gammaln(k + 1.0)
            - gammaln(m - k + 1.0)
            + k * np.log(xi)
            + (m - k) * np.log1p(-xi)
        )
        out[interior] = np.exp(logw)
    out[xs == 0.0] = 1.0 if k == 0 else 0.0
    out[xs == 1.0] = 1.0 if k == m else 0.0
    return float(out[0]) if scalar else out


def bernstein_matrix(m: int, xs: np.ndarray, chunk: int = 128) -> np.ndarray:
    """Weight matrix W[i, k] = p_{m,k}(xs[i]) for the full index range."""
    xs = np.atleast_1d(_check_point(xs))
    ks = np.arange(m + 1, dtype=float)
    logc = gammaln(m + 1.0) - gammaln(ks + 1.0) - gammaln(m - ks + 1.0)
    out = np.empty((xs.size, m + 1))
    for start in range(0, xs.size, chunk):
        xb = xs[start : start + chunk]
        safe = np.clip(xb, 1e-300, 1.0 - 1e-16)
        logw = logc[None, :] + ks[None, :] * np.log(safe)[:, None]
        logw += (m - ks)[None, :] * np.log1p(-safe)[:, None]
        block = np.exp(logw)
        at0 = xb == 0.0
        at1 = xb == 1.0
        if np.any(at0):
            block[at0] = 0.0
            block[at0, 0] = 1.0
        if np.any(at1):
            block[at1] = 0.0
            block[at1, m] = 1.0
        out[start : start + chunk] = block
    return out


def _grid_values(func, m: int, lo: int, hi: int, offset: int = 0) -> np.ndarray:
    return np.asarray(func((np.arange(lo, hi + 1, dtype=float) + offset) / m), float)


def bernstein_apply(f, m: int, x):
    """Bernstein polynomial of f: sum_k f(k/m) p_{m,k}(x).

    Reproduces affine functions exactly and interpolates f at x in {0, 1}.
    """
    if m < 1:
        raise ParameterError(f"degree m must be >= 1, got {m}")
    func = as_function1d(f)
    x = _check_point(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    if m <= FULL_EVAL_MAX:
        fv = _grid_values(func, m, 0, m)
        res = bernstein_matrix(m, xs) @ fv
    else:
        res = np.empty(xs.size)
        for i, xi in enumerate(xs):
            lo, hi = support_window(m, float(xi))
            w = bernstein_weights(m, float(xi), lo, hi)
            res[i] = w @ _grid_values(func, m, lo, hi)
    return float(res[0]) if scalar else res


def forward_difference(f, h: float, k: int, x):
    """k-th forward difference at step h: sum_j C(k,j) (-1)^(k-j) f(x + j h)."""
    if h < 0:
        raise DomainError(f"step h must be >= 0, got {h}")
    if k < 0:
        raise DomainError(f"order k must be >= 0, got {k}")
    func = as_function1d(f)
    x = np.asarray(x, float)
    if np.any(x < 0) or np.any(x + k * h > 1.0 + 1e-12):
        raise DomainError("forward difference needs 0 <= x <= x + k h <= 1")
    out = np.zeros_like(x, dtype=float)
    for j in range(k + 1):
        out = out + math.comb(k, j) * (-1.0) ** (k - j) * np.asarray(
            func(np.minimum(x + j * h, 1.0)), float
        )
    return float(out) if out.ndim == 0 else out


def _step_expectations(func: Function1D, shift: ShiftLaw, m: int, ls: np.ndarray) -> np.ndarray:
    """E f((l + T)/m) by exact breakpoint splitting for piecewise-constant f."""
    bps = np.asarray(func.breakpoints, float)
    k = max(shift.order, 1)
    out = np.empty(ls.size)
    for i, l in enumerate(ls):
        # breakpoints of f mapped into T-space, clipped to [0, k]
        ts = m * bps - l
        ts = ts[(ts > 0.0) & (ts < k)]
        knots = np.unique(np.concatenate(([0.0], ts, [float(k)])))
        mids = 0.5 * (knots[:-1] + knots[1:])
        masses = np.diff(shift.cdf(knots))
        out[i] = np.asarray(func((l + mids) / m), float) @ masses
    return out


def _shift_expectations(
    func: Function1D,
    shift: ShiftLaw,
    m: int,
    ls: np.ndarray,
    check_quadrature: bool = False,
) -> np.ndarray:
    """E f((l + T)/m) for each index l, by quadrature or exact splitting."""
    if shift.kind == "none":
        return np.asarray(func(ls / m), float)
    if func.is_step_function:
        return _step_expectations(func, shift, m, ls)
    t, w = shift.expectation_rule()
    args = (ls[:, None] + t[None, :]) / m
    vals = np.asarray(func(args), float) @ w
    if check_quadrature:
        t2, w2 = shift.expectation_rule(nodes_per_unit=_GL_NODES_PER_UNIT // 2)
        coarse = np.asarray(func((ls[:, None] + t2[None, :]) / m), float) @ w2
        err = float(np.max(np.abs(vals - coarse))) if vals.size else 0.0
        if err > 1e-8:
            raise QuadratureError(
                f"inner quadrature not converged (estimate {err:.3e}); "
                "set is_step_function with breakpoints for exact splitting",
                error_estimate=err,
            )
    return vals


def kantorovich_apply(f, params: OperatorParams, shift: ShiftLaw, x, check_quadrature=False):
    """Averaged Bernstein-type operator sum_l p_{m-k,l}(x) E f((l + T_k)/m).

    With the uniform-sum shift this is the Bernstein-Kantorovich operator
    B_{m,k}; with order 0 it reduces exactly to ``bernstein_apply``.
    """
    params.require_kantorovich()
    if shift.order != params.k:
        raise ParameterError(
            f"shift order {shift.order} does not match derivative order {params.k}"
        )
    func = as_function1d(f)
    m, k = params.m, params.k
    x = _check_point(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    deg = m - k
    if deg <= FULL_EVAL_MAX:
        ls = np.arange(deg + 1, dtype=float)
        inner = _shift_expectations(func, shift, m, ls, check_quadrature)
        res = bernstein_matrix(deg, xs) @ inner
    else:
        res = np.empty(xs.size)
        for i, xi in enumerate(xs):
            lo, hi = support_window(deg, float(xi))
            ls = np.arange(lo, hi + 1, dtype=float)
            inner = _shift_expectations(func, shift, m, ls, check_quadrature)
            res[i] = bernstein_weights(deg, float(xi), lo, hi) @ inner
    return float(res[0]) if scalar else res


def lmk_rplusv_apply(rho, params: OperatorParams, x, check_quadrature=False):
    """Kantorovich-type operator with the binomial-square shift R_{k-1} + V."""
    if params.k < 1:
        raise ParameterError("lmk_rplusv_apply needs derivative order k >= 1")
    return kantorovich_apply(rho, params, ShiftLaw.r_plus_v(params.k), x, check_quadrature)


def bernstein_derivative_apply(f, params: OperatorParams, x):
    """k-th derivative of the Bernstein polynomial of f:

    (m)_k sum_l p_{m-k,l}(x) D^k_{1/m} f(l/m),

    where D is the forward difference at step 1/m.  For k = 0 this is
    ``bernstein_apply``.
    """
    m, k = params.m, params.k
    if k == 0:
        return bernstein_apply(f, m, x)
    params.require_kantorovich()
    func = as_function1d(f)
    x = _check_point(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    deg = m - k
    coeffs = np.array([math.comb(k, j) * (-1.0) ** (k - j) for j in range(k + 1)])

    def diffs(lo, hi):
        fv = _grid_values(func, m, lo, hi + k)
        out = np.zeros(hi - lo + 1)
        for j in range(k + 1):
            out += coeffs[j] * fv[j : j + hi - lo + 1]
        return out

    if deg <= FULL_EVAL_MAX:
        res = bernstein_matrix(deg, xs) @ diffs(0, deg)
        res *= params.falling
    else:
        res = np.empty(xs.size)
        for i, xi in enumerate(xs):
            lo, hi = support_window(deg, float(xi))
            res[i] = params.falling * (
                bernstein_weights(deg, float(xi), lo, hi) @ diffs(lo, hi)
            )
    return float(res[0]) if scalar else res
