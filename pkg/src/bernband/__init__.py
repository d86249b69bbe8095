"""Bernstein-polynomial estimation on [0,1] with finite-sample confidence
bands and intervals, minimal-degree selection, and a reproducible Monte Carlo
harness."""

from .bounds import (
    BoundConstants,
    ProbabilityBound,
    bernstein_error_bounds,
    concentration_bound,
    constants_for,
    dkw_bound,
    entropy_r,
    flat_region_error_bound,
    kantorovich_error_bounds,
    l_alpha,
    tau,
    tau_inverse,
)
from .confidence import (
    ConditionCheck,
    ConfidenceRegion,
    DegreeSearchReport,
    band_for_cdf,
    band_for_derivative,
    band_uniform_b2,
    cdf_deviation_bound,
    derivative_deviation_bound,
    interval_for_cdf,
    interval_for_derivative,
    interval_uniform_b2,
    select_degree,
    write_region,
)
from .errors import (
    BernbandError,
    DegreeSearchError,
    DomainError,
    InputFormatError,
    ParameterError,
    PreconditionError,
    QuadratureError,
)
from .estimators import (
    KernelSpec,
    Sample,
    b2_uniform_estimate,
    bernstein_cdf_estimate,
    bernstein_derivative_estimate,
    empirical_cdf,
    empirical_cdf_function,
    kernel_cdf_estimate,
    normal_kernel,
    standard_normal_cdf,
)
from .operators import (
    Function1D,
    OperatorParams,
    ShiftLaw,
    bernstein_apply,
    bernstein_basis,
    bernstein_derivative_apply,
    falling_factorial,
    forward_difference,
    irwin_hall_cdf,
    irwin_hall_density,
    kantorovich_apply,
    lmk_rplusv_apply,
)
from .sim import (
    ExperimentConfig,
    ExperimentResult,
    asymptotic_interval_baseline,
    bound_check,
    mse_mise_b2,
    replicate_rng,
    run_experiment,
    sample_power,
    splitmix64,
    write_experiment,
)
from .smoothness import (
    FittedSpec,
    LipschitzFit,
    ModulusGrid,
    OracleSpec,
    PowerFamilySpec,
    fit_lipschitz,
    modulus1,
    modulus2,
    modulus2_dt,
    power_cdf,
    power_density,
    power_family_moduli,
    sigma,
)

__version__ = "0.1.0"
