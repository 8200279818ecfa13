"""Competitive ratios and competition complexity for threshold stopping rules."""

from .binom import (
    BinomialLaw,
    SelectionInstance,
    binom_pmf_log,
    binom_shortfall,
    g_cumulative,
    g_kernel,
    poisson_min_expectation,
    q_deriv,
    q_second_deriv,
    q_value,
)
from .distributions import (
    AtomWorstCase,
    Distribution,
    Exponential,
    Pareto,
    QuantileTable,
    Uniform,
    catalog,
    parse_distribution,
)
from .ratio import RatioResult, alg_value, competitive_ratio, opt_value, phi_curve
from .complexity import (
    ComplexityQuery,
    ComplexityReport,
    beta_bounds,
    beta_finite_n,
    lambert_wm1,
    poisson_complexity_estimate,
    psi,
    t_star,
)
from .certificates import (
    CheckReport,
    DualCertificate,
    GridSpec,
    PrimalCertificate,
    build_certificates,
    check_dual_feasibility,
    check_primal_feasibility,
    check_quasiconcavity,
    check_weak_duality,
)
from .lp import solve_discretized_lp
from .mc import McConfig, McEstimate, empirical_ratio_scan, simulate_prophet, simulate_threshold

__version__ = "0.1.0"

__all__ = [
    "AtomWorstCase",
    "BinomialLaw",
    "CheckReport",
    "ComplexityQuery",
    "ComplexityReport",
    "Distribution",
    "DualCertificate",
    "Exponential",
    "GridSpec",
    "McConfig",
    "McEstimate",
    "Pareto",
    "PrimalCertificate",
    "QuantileTable",
    "RatioResult",
    "SelectionInstance",
    "Uniform",
    "alg_value",
    "beta_bounds",
    "beta_finite_n",
    "binom_pmf_log",
    "binom_shortfall",
    "build_certificates",
    "catalog",
    "check_dual_feasibility",
    "check_primal_feasibility",
    "check_quasiconcavity",
    "check_weak_duality",
    "competitive_ratio",
    "empirical_ratio_scan",
    "g_cumulative",
    "g_kernel",
    "lambert_wm1",
    "opt_value",
    "parse_distribution",
    "phi_curve",
    "poisson_complexity_estimate",
    "poisson_min_expectation",
    "psi",
    "q_deriv",
    "q_second_deriv",
    "q_value",
    "simulate_prophet",
    "simulate_threshold",
    "solve_discretized_lp",
    "t_star",
]
