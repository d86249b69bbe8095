"""Data-driven estimators built on the sorted sample.

Empirical CDF, the Bernstein-smoothed CDF estimator, its degree-2 closed form
for the uniform target, the Bernstein derivative estimator (bin-count form),
and the kernel CDF estimator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, InputFormatError, ParameterError
from .operators import (
    FULL_EVAL_MAX,
    Function1D,
    OperatorParams,
    bernstein_matrix,
    bernstein_weights,
    falling_factorial,
    support_window,
)

__all__ = [
    "Sample",
    "KernelSpec",
    "empirical_cdf",
    "empirical_cdf_function",
    "bernstein_cdf_estimate",
    "b2_uniform_estimate",
    "bernstein_derivative_estimate",
    "kernel_cdf_estimate",
    "normal_kernel",
    "standard_normal_cdf",
]


@dataclass(frozen=True, eq=False)
class Sample:
    """Sorted observations in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, float).ravel()
        if v.size < 1:
            raise DomainError("sample must contain at least one observation")
        if np.any(~np.isfinite(v)) or np.any((v < 0.0) | (v > 1.0)):
            raise DomainError("observations must lie in [0, 1]")
        object.__setattr__(self, "values", np.sort(v))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_csv(cls, path) -> "Sample":
        """One observation per line, or a single-column CSV with an optional
        header cell named ``x``.  Out-of-range values are rejected with their
        line numbers."""
        vals, bad = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                cells = [c.strip() for c in row if c.strip() != ""]
                if not cells:
                    continue
                if len(cells) > 1:
                    raise InputFormatError(
                        f"line {lineno}: expected a single value, got {len(cells)}",
                        line_numbers=[lineno],
                    )
                tok = cells[0]
                if lineno == 1 and tok.lower() == "x":
                    continue
                try:
                    val = float(tok)
                except ValueError:
                    bad.append((lineno, tok))
                    continue
                if not 0.0 <= val <= 1.0 or not math.isfinite(val):
                    bad.append((lineno, tok))
                    continue
                vals.append(val)
        if bad:
            listing = ", ".join(f"line {ln}: {tok!r}" for ln, tok in bad)
            raise InputFormatError(
                f"values outside [0, 1] or unparseable: {listing}",
                line_numbers=[ln for ln, _ in bad],
            )
        if not vals:
            raise InputFormatError("no observations found", line_numbers=[])
        return cls(values=np.array(vals))


def empirical_cdf(sample: Sample, x):
    """Y_n(x) = (1/n) #{X_r <= x}, right-continuous, by binary search."""
    x = np.asarray(x, float)
    counts = np.searchsorted(sample.values, x, side="right")
    out = counts / sample.n
    return float(out) if out.ndim == 0 else out


def empirical_cdf_function(sample: Sample) -> Function1D:
    """The empirical CDF wrapped as a step Function1D (exact splitting hint)."""
    return Function1D(
        f=lambda x: empirical_cdf(sample, x),
        is_step_function=True,
        breakpoints=tuple(np.unique(sample.values)),
        name=f"empirical-cdf-n{sample.n}",
    )


def _check_eval_points(x):
    x = np.asarray(x, float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("evaluation point outside [0, 1]")
    return x


def bernstein_cdf_estimate(sample: Sample, m: int, x):
    """Bernstein-smoothed CDF estimate sum_k Y_n(k/m) p_{m,k}(x).

    Nondecreasing in x; equals Y_n(0) at x=0 and 1 at x=1.  Requires m >= 2
    (degree 1 is reserved for the plain operator).
    """
    if m < 2:
        raise ParameterError(f"CDF estimator needs degree m >= 2, got {m}")
    x = _check_eval_points(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    if m <= FULL_EVAL_MAX:
        yv = empirical_cdf(sample, np.arange(m + 1) / m)
        res = bernstein_matrix(m, xs) @ yv
    else:
        res = np.empty(xs.size)
        for i, xi in enumerate(xs):
            lo, hi = support_window(m, float(xi))
            yv = empirical_cdf(sample, np.arange(lo, hi + 1) / m)
            res[i] = bernstein_weights(m, float(xi), lo, hi) @ yv
    return float(res[0]) if scalar else res


def b2_uniform_estimate(sample: Sample, x):
    """Closed form of the degree-2 estimator: 2 x(1-x) Y_n(1/2) + x^2.

    Coincides with ``bernstein_cdf_estimate(sample, 2, x)`` whenever no
    observation sits exactly at 0 (continuous targets).
    """
    x = _check_eval_points(x)
    y_half = empirical_cdf(sample, 0.5)
    out = 2.0 * x * (1.0 - x) * y_half + x * x
    return float(out) if out.ndim == 0 else out


def bernstein_derivative_estimate(sample: Sample, m: int, k: int, x):
    """Derivative-of-Bernstein estimator of the k-th derivative of the CDF.

    ((m)_k / n) sum_l p_{m-k,l}(x) sum_j C(k-1,j) (-1)^(k-1-j)
    #{X_r in ((l+j)/m, (l+j+1)/m]}.

    Bins are half-open on the left, so observations exactly at 0 fall in no
    bin (they enter only through the k = 0 estimator).
    """
    if k < 1:
        raise ParameterError(f"derivative estimator needs k >= 1, got {k}")
    if m <= k:
        raise ParameterError(f"derivative estimator needs m > k, got m={m}, k={k}")
    x = _check_eval_points(x)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    deg = m - k
    fall = falling_factorial(m, k)
    signs = np.array([math.comb(k - 1, j) * (-1.0) ** (k - 1 - j) for j in range(k)])

    def signed_counts(lo, hi):
        # counts over ((i)/m, (i+1)/m] for i = lo .. hi+k-1, combined with signs
        edges = np.arange(lo, hi + k + 1) / m
        cum = np.searchsorted(sample.values, edges, side="right")
        c = np.diff(cum)
        out = np.zeros(hi - lo + 1)
        for j in range(k):
            out += signs[j] * c[j : j + hi - lo + 1]
        return out

    if deg <= FULL_EVAL_MAX:
        res = bernstein_matrix(deg, xs) @ signed_counts(0, deg)
        res *= fall / sample.n
    else:
        res = np.empty(xs.size)
        for i, xi in enumerate(xs):
            lo, hi = support_window(deg, float(xi))
            res[i] = (
                fall
                / sample.n
                * (bernstein_weights(deg, float(xi), lo, hi) @ signed_counts(lo, hi))
            )
    return float(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# Kernel CDF estimator
# ---------------------------------------------------------------------------


def standard_normal_cdf(t):
    """High-accuracy standard normal CDF (absolute error well below 1e-10)."""
    out = ndtr(np.asarray(t, float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KernelSpec:
    """Kernel given by its CDF on the real line plus a bandwidth."""

    kernel_cdf: Callable
    bandwidth: float
    name: str = ""

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise DomainError(f"bandwidth must be > 0, got {self.bandwidth}")


def normal_kernel(bandwidth: float) -> KernelSpec:
    return KernelSpec(kernel_cdf=standard_normal_cdf, bandwidth=bandwidth, name="normal")


def kernel_cdf_estimate(sample: Sample, kernel: KernelSpec, x):
    """Kernel CDF estimate (1/n) sum_r K((x - X_r)/h); x may be any real."""
    x = np.asarray(x, float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    out = np.empty(xs.size)
    chunk = max(1, int(2_000_000 // max(sample.n, 1)))
    for start in range(0, xs.size, chunk):
        xb = xs[start : start + chunk]
        args = (xb[:, None] - sample.values[None, :]) / kernel.bandwidth
        out[start : start + chunk] = np.mean(
            np.asarray(kernel.kernel_cdf(args), float), axis=1
        )
    return float(out[0]) if scalar else out
