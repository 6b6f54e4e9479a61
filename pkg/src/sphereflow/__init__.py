"""Early-stopped kernel gradient-flow regression on high-dimensional spheres.

Implements inner-product kernel profiles on the sphere, their Mercer spectra
(multiplicities, Funk-Hecke eigenvalues, closed forms for the two-layer NTK),
Mendelson-complexity fixed points and the induced stopping time, metric-entropy
lower-bound certificates, theoretical rate curves for the n = d^gamma scaling,
the gradient-flow regressor itself, and a seeded experiment harness that fits
log-log convergence rates.
"""

from .errors import InfeasibleConfigError, NumericError
from .kernels import GramMatrix, KernelProfile, cross_kernel, gram, ntk2_profile, phi, rbf_profile, taylor_profile
from .sphere_data import Dataset, SphereSample, TargetFunction, generate_dataset, make_target, sample_sphere
from .spectrum import (
    BetaCoefficients,
    Spectrum,
    SpectrumLevel,
    build_spectrum,
    eigenvalue_quadrature,
    legendre,
    multiplicity,
    ntk_beta,
    ntk_eigen_closed,
    spectral_sum,
    surrogate_mu,
)
from .complexity import (
    MendelsonSolution,
    RademacherEstimate,
    empirical_mendelson,
    r_function,
    rademacher_estimate,
    rademacher_z,
    solve_mendelson,
    stopping_time,
)
from .entropy_rates import EntropyFixture, RatePoint, certify_lower_bound, covering_radius, metric_entropy, rate_curve, rate_table
from .regression import FlowDiagnostics, FlowPredictor, GramEigen, diagnostics, eigendecompose, excess_risk, fit_flow, predict
from .harness import ExperimentConfig, RiskTable, eigen_gap_check, emit, fit_rate, run_experiment

__all__ = [
    "BetaCoefficients",
    "Dataset",
    "EntropyFixture",
    "ExperimentConfig",
    "FlowDiagnostics",
    "FlowPredictor",
    "GramEigen",
    "GramMatrix",
    "InfeasibleConfigError",
    "KernelProfile",
    "MendelsonSolution",
    "NumericError",
    "RademacherEstimate",
    "RatePoint",
    "RiskTable",
    "SphereSample",
    "Spectrum",
    "SpectrumLevel",
    "TargetFunction",
    "build_spectrum",
    "certify_lower_bound",
    "covering_radius",
    "cross_kernel",
    "diagnostics",
    "eigen_gap_check",
    "eigendecompose",
    "emit",
    "eigenvalue_quadrature",
    "empirical_mendelson",
    "excess_risk",
    "fit_flow",
    "fit_rate",
    "generate_dataset",
    "gram",
    "legendre",
    "make_target",
    "metric_entropy",
    "multiplicity",
    "ntk2_profile",
    "ntk_beta",
    "ntk_eigen_closed",
    "phi",
    "predict",
    "r_function",
    "rademacher_estimate",
    "rademacher_z",
    "rate_curve",
    "rate_table",
    "rbf_profile",
    "run_experiment",
    "sample_sphere",
    "solve_mendelson",
    "spectral_sum",
    "stopping_time",
    "surrogate_mu",
    "taylor_profile",
]
