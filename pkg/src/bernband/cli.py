"""Command-line surface.

Subcommands: estimate, band, interval, moduli, simulate, bound-check.
Every subcommand is a thin adapter over the library; no numeric logic lives
here.

Exit codes:
  0  success
  2  malformed input file or invalid experiment config (argparse usage
     errors also exit 2)
  3  parameter violation (e.g. degree m <= order k, out-of-domain argument)
  4  degree search exhausted its cap; residuals are printed
  5  precondition failure (the violated inequality is named)
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import confidence, estimators, sim, smoothness
from .errors import (
    BernbandError,
    DegreeSearchError,
    DomainError,
    InputFormatError,
    ParameterError,
    PreconditionError,
)
from .serialize import json_bytes, write_csv

_EXIT_INPUT = 2
_EXIT_PARAMETER = 3
_EXIT_DEGREE_SEARCH = 4
_EXIT_PRECONDITION = 5


def _parse_grid(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ParameterError(f"cannot parse grid {text!r}: {exc}") from exc


def _spec_from_args(args, region: str):
    """Build a SmoothnessSpec from the mutually exclusive spec flags."""
    chosen = [
        args.oracle_family is not None,
        args.C is not None,
        args.beta is not None and args.C is None and args.oracle_family is None,
    ]
    if sum(chosen) != 1:
        raise ParameterError(
            "exactly one smoothness spec required: --beta BETA (power family), "
            "--C C --beta BETA (fitted plug-in), or --oracle-family BETA"
        )
    if args.oracle_family is not None:
        return smoothness.OracleSpec(f=smoothness.power_cdf(args.oracle_family))
    if args.C is not None:
        if args.beta is None:
            raise ParameterError("--C needs --beta")
        modulus = "second" if region == "interval" else "second_dt"
        return smoothness.FittedSpec(C=args.C, beta=args.beta, modulus=modulus)
    return smoothness.PowerFamilySpec(beta=args.beta)


def _write_region(region, args) -> None:
    write_csv(args.output, ["x", "estimate", "lower", "upper"], region.rows())
    with open(args.output + ".json", "wb") as fh:
        fh.write(json_bytes(region.sidecar()))
    print(f"m={region.m} method={region.method} mode={region.mode} -> {args.output}")


def _cmd_estimate(args) -> int:
    sample = estimators.Sample.from_csv(args.input)
    xs = np.linspace(0.0, 1.0, args.grid)
    if args.kind == "bernstein-cdf":
        est = estimators.bernstein_cdf_estimate(sample, args.m, xs)
    elif args.kind == "bernstein-derivative":
        est = estimators.bernstein_derivative_estimate(sample, args.m, args.k, xs)
    elif args.kind == "b2-uniform":
        est = estimators.b2_uniform_estimate(sample, xs)
    elif args.kind == "kernel-cdf":
        kernel = estimators.normal_kernel(args.bandwidth)
        est = estimators.kernel_cdf_estimate(sample, kernel, xs)
    else:  # pragma: no cover - argparse choices
        raise ParameterError(f"unknown estimator kind {args.kind!r}")
    rows = [{"x": x, "estimate": e} for x, e in zip(xs, np.atleast_1d(est))]
    if args.output:
        write_csv(args.output, ["x", "estimate"], rows)
    else:
        sys.stdout.write("x,estimate\n")
        for r in rows:
            sys.stdout.write("%.17g,%.17g\n" % (r["x"], r["estimate"]))
    return 0


def _cmd_band(args) -> int:
    sample = estimators.Sample.from_csv(args.input)
    x_grid = np.linspace(0.0, 1.0, args.grid)
    if args.b2_uniform:
        region = confidence.band_uniform_b2(sample, args.alpha, x_grid=x_grid)
    else:
        spec = _spec_from_args(args, region="band")
        region = confidence.band_for_derivative(
            sample, args.k, args.alpha, spec, x_grid=x_grid, m_max=args.m_max
        )
    _write_region(region, args)
    return 0


def _cmd_interval(args) -> int:
    sample = estimators.Sample.from_csv(args.input)
    if args.b2_uniform:
        region = confidence.interval_uniform_b2(sample, args.x, args.alpha)
    else:
        spec = _spec_from_args(args, region="interval")
        if args.k == 0:
            region = confidence.interval_for_cdf(
                sample, args.x, args.alpha, spec, m_max=args.m_max
            )
        else:
            region = confidence.interval_for_derivative(
                sample, args.x, args.k, args.alpha, spec, m_max=args.m_max
            )
    _write_region(region, args)
    return 0


def _cmd_moduli(args) -> int:
    f = smoothness.power_cdf(args.family_beta)
    grid = smoothness.ModulusGrid(resolution=args.resolution)
    deltas = _parse_grid(args.deltas)
    rows = []
    for d in deltas:
        if args.order == "1":
            val = smoothness.modulus1(f, d, grid)
        elif args.order == "2":
            val = smoothness.modulus2(f, d, grid)
        else:
            val = smoothness.modulus2_dt(f, d, grid)
        rows.append({"delta": d, "value": val})
    if args.output:
        write_csv(args.output, ["delta", "value"], rows)
    else:
        sys.stdout.write("delta,value\n")
        for r in rows:
            sys.stdout.write("%.17g,%.17g\n" % (r["delta"], r["value"]))
    if args.fit:
        fit = smoothness.fit_lipschitz([(r["delta"], r["value"]) for r in rows])
        print(
            f"fit: C={fit.C:.6g} beta={fit.beta:.6g} "
            f"log_residual_rms={fit.log_residual_rms:.3g}"
            + (" (exactly smooth)" if fit.exactly_smooth else "")
        )
    return 0


def _experiment_config(args) -> sim.ExperimentConfig:
    if args.seed is None:
        raise ParameterError(
            "--seed is required: simulations never seed from the wall clock"
        )
    return sim.ExperimentConfig(
        experiment=args.experiment,
        n=args.n,
        seed=args.seed,
        beta=args.beta,
        reps=args.reps,
        alpha=args.alpha,
        x_grid=_parse_grid(args.x_grid) if args.x_grid else None,
        m_override=args.m,
        check=args.check,
    )


def _cmd_simulate(args) -> int:
    try:
        config = _experiment_config(args)
    except (ParameterError, DomainError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    result = sim.run_experiment(config)
    hashes = sim.write_experiment(result, args.out)
    for name, digest in sorted(hashes.items()):
        print(f"{digest}  {name}")
    return 0


def _cmd_bound_check(args) -> int:
    args.experiment = "bound_check"
    try:
        config = _experiment_config(args)
    except (ParameterError, DomainError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    result = sim.bound_check(args.check, config)
    hashes = sim.write_experiment(result, args.out)
    agg = result.aggregates
    status = "OK" if agg.get("violations", 0) == 0 else "VIOLATED"
    print(f"{args.check}: {status} aggregates={agg}")
    return 0 if agg.get("violations", 0) == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bernband",
        description="Bernstein-polynomial CDF/density estimation with "
        "finite-sample confidence bands and intervals",
    )
    sub = p.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="evaluate an estimator on a grid")
    est.add_argument("--input", required=True, help="observations CSV (one value per line)")
    est.add_argument(
        "--kind",
        required=True,
        choices=["bernstein-cdf", "bernstein-derivative", "kernel-cdf", "b2-uniform"],
    )
    est.add_argument("--m", type=int, default=10, help="Bernstein degree")
    est.add_argument("--k", type=int, default=1, help="derivative order")
    est.add_argument("--bandwidth", type=float, default=0.1, help="kernel bandwidth")
    est.add_argument("--grid", type=int, default=101, help="number of grid points")
    est.add_argument("--output", default=None)
    est.set_defaults(fn=_cmd_estimate)

    def add_spec_flags(sp):
        sp.add_argument("--beta", type=float, default=None, help="smoothness exponent")
        sp.add_argument("--C", type=float, default=None, help="fitted Lipschitz constant")
        sp.add_argument(
            "--oracle-family",
            type=float,
            default=None,
            help="exact-oracle power family exponent",
        )
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--m-max", type=int, default=confidence.DEFAULT_M_MAX)
        sp.add_argument("--b2-uniform", action="store_true", help="closed-form uniform case")

    band = sub.add_parser("band", help="uniform confidence band")
    band.add_argument("--input", required=True)
    band.add_argument("--k", type=int, default=0)
    band.add_argument("--grid", type=int, default=201)
    add_spec_flags(band)
    band.add_argument("--output", required=True)
    band.set_defaults(fn=_cmd_band)

    ival = sub.add_parser("interval", help="pointwise confidence interval")
    ival.add_argument("--input", required=True)
    ival.add_argument("--x", type=float, required=True)
    ival.add_argument("--k", type=int, default=0)
    add_spec_flags(ival)
    ival.add_argument("--output", required=True)
    ival.set_defaults(fn=_cmd_interval)

    mod = sub.add_parser("moduli", help="grid moduli of a power-family CDF")
    mod.add_argument("--family-beta", type=float, required=True)
    mod.add_argument("--order", choices=["1", "2", "2dt"], default="2")
    mod.add_argument("--deltas", required=True, help="comma-separated steps")
    mod.add_argument("--resolution", type=int, default=10001)
    mod.add_argument("--fit", action="store_true", help="fit C, beta to the values")
    mod.add_argument("--output", default=None)
    mod.set_defaults(fn=_cmd_moduli)

    def add_sim_flags(sp):
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--beta", type=float, default=1.0)
        sp.add_argument("--reps", type=int, default=1)
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--x-grid", default=None, help="comma-separated points")
        sp.add_argument("--m", type=int, default=None, help="degree override")
        sp.add_argument("--out", required=True, help="output path prefix")

    simp = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    simp.add_argument("--experiment", required=True, choices=list(sim.EXPERIMENTS))
    simp.add_argument("--check", default=None, choices=list(sim.BOUND_CHECKS))
    add_sim_flags(simp)
    simp.set_defaults(fn=_cmd_simulate)

    bc = sub.add_parser("bound-check", help="verify a bound family empirically")
    bc.add_argument("--check", required=True, choices=list(sim.BOUND_CHECKS))
    add_sim_flags(bc)
    bc.set_defaults(fn=_cmd_bound_check)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except DegreeSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            for c in exc.report.conditions:
                print(
                    f"  residual at m={exc.report.m_max}: {c.name}: "
                    f"lhs={c.lhs:.6g} rhs={c.rhs:.6g}",
                    file=sys.stderr,
                )
        return _EXIT_DEGREE_SEARCH
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.constraint:
            print(f"  violated constraint: {exc.constraint}", file=sys.stderr)
        return _EXIT_PRECONDITION
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARAMETER
    except BernbandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
