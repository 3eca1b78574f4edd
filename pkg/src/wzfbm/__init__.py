"""Stationary smoothing of fractional noise, its exact error theory, and
pathwise solvers for equations it drives."""

from .fbm import (
    CholeskyFactorizationError,
    SamplePath,
    TimeGrid,
    covariance,
    empirical_covariance,
    generate_path,
    path_rng,
)
from .harness import (
    ExperimentConfig,
    RateReport,
    RateRow,
    mc_besov_rate,
    mc_pointwise_error,
    mc_sde_rate,
    rate_regression,
    theta_scan,
)
from .integration import FracDerivative, gls_integral, weyl_marchaud, young_integral
from .norms import (
    BesovReport,
    besov_report,
    holder_norm,
    norm_1_1mb,
    norm_2_beta,
    norm_beta_inf,
    vector_norm_beta_inf,
)
from .sde import (
    BlowupError,
    CoefficientConditions,
    SdeProblem,
    SolutionPath,
    additive_problem,
    fractional_ou_problem,
    kappa,
    linear_problem,
    solution_error,
    solve_euler,
)
from .wong_zakai import (
    ErrorProcess,
    QuadratureError,
    WongZakaiDriver,
    build_driver,
    error_process,
    exact_lp_error,
    gaussian_abs_moment,
    theta,
)

__version__ = "0.1.0"

__all__ = [
    "BesovReport",
    "BlowupError",
    "CholeskyFactorizationError",
    "CoefficientConditions",
    "ErrorProcess",
    "ExperimentConfig",
    "FracDerivative",
    "QuadratureError",
    "RateReport",
    "RateRow",
    "SamplePath",
    "SdeProblem",
    "SolutionPath",
    "TimeGrid",
    "WongZakaiDriver",
    "additive_problem",
    "besov_report",
    "build_driver",
    "covariance",
    "empirical_covariance",
    "error_process",
    "exact_lp_error",
    "fractional_ou_problem",
    "gaussian_abs_moment",
    "generate_path",
    "gls_integral",
    "holder_norm",
    "kappa",
    "linear_problem",
    "mc_besov_rate",
    "mc_pointwise_error",
    "mc_sde_rate",
    "norm_1_1mb",
    "norm_2_beta",
    "norm_beta_inf",
    "path_rng",
    "rate_regression",
    "solution_error",
    "solve_euler",
    "theta",
    "theta_scan",
    "vector_norm_beta_inf",
    "weyl_marchaud",
    "young_integral",
]
