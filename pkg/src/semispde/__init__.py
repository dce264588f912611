"""Simulation and verification harness for semilinear stochastic PDEs.

The package integrates Dirichlet problems of the form

    du = (div(a grad u) + b.grad u + c u + f(u, grad u) + f0) dt
         + sum_k (sigma^k . grad u + mu^k u + g^k) dW^k

on boxes in one or two dimensions, with a monotone (dissipative) reaction
term f such as the Ginzburg-Landau drift -|u|^{alpha-2} u, and provides
Monte Carlo estimators that test moment and regularity estimates for the
solution: L^p moment bounds, truncation stability, interior Sobolev
regularity, weighted Sobolev regularity near the boundary, and Holder
continuity in time.
"""

from semispde._version import __version__
from semispde.geometry import Grid, DistanceField, Subdomain, build_grid, boundary_distance, carve_subdomain
from semispde.smoothing import SmoothPower
from semispde.semilinear import (
    SemilinearTerm,
    ginzburg_landau,
    lipschitz_tanh,
    truncate,
    normalize_decreasing,
    normalize_zero_at_origin,
    zero_term,
)
from semispde.noise import NoisePath, sample_path, brownian_bridge_refine
from semispde.coefficients import CoefficientSet, ForcingSet
from semispde.solver import SolverConfig, Trajectory, solve_trajectory, solve_truncated_family
from semispde.scenarios import Scenario, ConfigError, load_config, config_fingerprint
from semispde.norms import WeightedNormSpec
from semispde.estimators import (
    EstimateReport,
    MeanStderr,
    PreconditionError,
    verify_moment_bound,
    verify_truncation_convergence,
    verify_interior_regularity,
    verify_weighted_regularity,
    estimate_holder_exponent,
)

__all__ = [
    "__version__",
    "Grid",
    "DistanceField",
    "Subdomain",
    "build_grid",
    "boundary_distance",
    "carve_subdomain",
    "SmoothPower",
    "SemilinearTerm",
    "ginzburg_landau",
    "lipschitz_tanh",
    "zero_term",
    "truncate",
    "normalize_decreasing",
    "normalize_zero_at_origin",
    "NoisePath",
    "sample_path",
    "brownian_bridge_refine",
    "CoefficientSet",
    "ForcingSet",
    "SolverConfig",
    "Trajectory",
    "solve_trajectory",
    "solve_truncated_family",
    "Scenario",
    "ConfigError",
    "load_config",
    "config_fingerprint",
    "WeightedNormSpec",
    "EstimateReport",
    "MeanStderr",
    "PreconditionError",
    "verify_moment_bound",
    "verify_truncation_convergence",
    "verify_interior_regularity",
    "verify_weighted_regularity",
    "estimate_holder_exponent",
]
