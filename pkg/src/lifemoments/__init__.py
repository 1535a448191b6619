"""Moments of discrete order statistics and coherent-system lifetimes.

Exact moments for finite supports, truncated series with certified error
bounds for infinite supports, and closed forms for multivariate geometric
(common shock) component lifetimes.
"""

from .distributions import (
    ExplicitFinitePMF,
    FinitePMF,
    Geometric,
    IndependentMarginals,
    JointModel,
    MarginalDist,
    MvgModel,
    NegBin,
    Poisson,
    marginal_survival,
    multinomial_pmf,
    rect_prob,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    LifemomentsError,
    NumericError,
    UnsupportedModelError,
    ValidationError,
)
from .mvg import (
    FactorialMomentTerms,
    MvgParams,
    factorial_moment_terms,
    factorial_to_raw,
    geometric_factorial_moment,
    mvg_joint_survival,
    mvg_marginal,
    mvg_min_param,
    mvg_orderstat_factorial_moment,
    mvg_orderstat_mean_var,
    mvg_orderstat_survival,
    stirling2_row,
    theta_all,
)
from .oracle import McEstimate, enumerate_moment, mc_moment, sample_mvg
from .orderstats import (
    MomentRequest,
    MomentResult,
    TruncationPlan,
    approx_moment,
    exact_moment_finite,
    plan_generic,
    plan_negbin,
    plan_poisson,
    survival_orderstat,
)
from .systems import (
    SignatureSet,
    SystemStructure,
    alpha_coefficients,
    beta_coefficients,
    cut_sets_from_path_sets,
    exchangeable_system_moment,
    k_out_of_n_structure,
    maximal_signature,
    minimal_signature,
    signature_from_samaniego,
    signature_set,
    system_mean_var_mvg,
    system_moment_approx,
    system_moment_approx_beta,
    system_moment_exact,
    system_moment_from_max_moments,
    system_moment_from_min_moments,
    system_moment_mvg,
    system_survival,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "ExplicitFinitePMF",
    "FactorialMomentTerms",
    "FinitePMF",
    "Geometric",
    "IndependentMarginals",
    "JointModel",
    "LifemomentsError",
    "MarginalDist",
    "McEstimate",
    "MomentRequest",
    "MomentResult",
    "MvgModel",
    "MvgParams",
    "NegBin",
    "NumericError",
    "Poisson",
    "SignatureSet",
    "SystemStructure",
    "TruncationPlan",
    "UnsupportedModelError",
    "ValidationError",
    "alpha_coefficients",
    "approx_moment",
    "beta_coefficients",
    "cut_sets_from_path_sets",
    "enumerate_moment",
    "exact_moment_finite",
    "exchangeable_system_moment",
    "factorial_moment_terms",
    "factorial_to_raw",
    "geometric_factorial_moment",
    "k_out_of_n_structure",
    "marginal_survival",
    "maximal_signature",
    "mc_moment",
    "minimal_signature",
    "multinomial_pmf",
    "mvg_joint_survival",
    "mvg_marginal",
    "mvg_min_param",
    "mvg_orderstat_factorial_moment",
    "mvg_orderstat_mean_var",
    "mvg_orderstat_survival",
    "plan_generic",
    "plan_negbin",
    "plan_poisson",
    "rect_prob",
    "sample_mvg",
    "signature_from_samaniego",
    "signature_set",
    "stirling2_row",
    "survival_orderstat",
    "system_mean_var_mvg",
    "system_moment_approx",
    "system_moment_approx_beta",
    "system_moment_exact",
    "system_moment_from_max_moments",
    "system_moment_from_min_moments",
    "system_moment_mvg",
    "system_survival",
    "theta_all",
]
