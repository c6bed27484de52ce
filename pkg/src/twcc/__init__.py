"""Trivariate wrapped Cauchy copula on the 3-torus.

Exact density, marginal, and conditional evaluation; rejection-free
sampling; closed-form trigonometric moments, correlations, and modes;
constrained maximum likelihood with parametric bootstrap; and the torus
quadrature oracle everything is cross-validated against.
"""

from .analytics import CorrCoefficients, ModeReport, corr_coefficients, modes, trig_moment, trig_moment_detail
from .density import (
    GeneralizedParams,
    MultiRho,
    WrappedCauchyParams,
    bivariate_marginal_pdf,
    c1,
    c2,
    conditional_one_given_one,
    conditional_pair_given_one,
    conditional_params_given_two,
    generalized_pdf,
    multivariate_pdf,
    twcc_pdf,
    twcc_pdf_complex,
    wrapped_cauchy_pdf,
)
from .estimation import (
    BootstrapResult,
    FisherInfo,
    FitConfig,
    FitResult,
    bootstrap_ci,
    circular_center,
    empirical_trig_moments,
    fisher_information,
    fit_mle,
    fit_with_bootstrap,
    log_likelihood,
    score,
    uncenter,
)
from .numerics import (
    QuadratureResult,
    QuadratureSpec,
    elliptic_K,
    elliptic_K_param,
    finite_diff_gradient,
    finite_diff_hessian,
    torus_quadrature,
    wrap_angle,
)
from .params import (
    BRANCHES,
    PAIRS,
    PairwisePhi,
    PhiTriple,
    RhoParams,
    StarParams,
    ZetaBranch,
    from_star,
    from_zeta,
    normalize_rho,
    pairwise_phi,
    phi_to_rho,
    rho_to_phi,
    to_star,
    to_zeta,
    unit_disc_representative,
    validate_rho,
    zeta_threshold,
)
from .sampling import AngleSample, RngState, sample_twcc, wrapped_cauchy_quantile

__version__ = "0.1.0"

__all__ = [
    "AngleSample",
    "BootstrapResult",
    "BRANCHES",
    "CorrCoefficients",
    "FisherInfo",
    "FitConfig",
    "FitResult",
    "GeneralizedParams",
    "ModeReport",
    "MultiRho",
    "PAIRS",
    "PairwisePhi",
    "PhiTriple",
    "QuadratureResult",
    "QuadratureSpec",
    "RhoParams",
    "RngState",
    "StarParams",
    "WrappedCauchyParams",
    "ZetaBranch",
    "bivariate_marginal_pdf",
    "bootstrap_ci",
    "c1",
    "c2",
    "circular_center",
    "conditional_one_given_one",
    "conditional_pair_given_one",
    "conditional_params_given_two",
    "corr_coefficients",
    "elliptic_K",
    "elliptic_K_param",
    "empirical_trig_moments",
    "finite_diff_gradient",
    "finite_diff_hessian",
    "fisher_information",
    "fit_mle",
    "fit_with_bootstrap",
    "from_star",
    "from_zeta",
    "generalized_pdf",
    "log_likelihood",
    "modes",
    "multivariate_pdf",
    "normalize_rho",
    "pairwise_phi",
    "phi_to_rho",
    "rho_to_phi",
    "sample_twcc",
    "score",
    "to_star",
    "to_zeta",
    "torus_quadrature",
    "trig_moment",
    "trig_moment_detail",
    "twcc_pdf",
    "twcc_pdf_complex",
    "unit_disc_representative",
    "uncenter",
    "validate_rho",
    "wrap_angle",
    "wrapped_cauchy_pdf",
    "wrapped_cauchy_quantile",
    "zeta_threshold",
]
