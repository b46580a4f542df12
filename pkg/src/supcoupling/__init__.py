"""Monte Carlo laboratory for Gaussian couplings of suprema of empirical and bootstrap processes."""
from .bounds import (
    ClassParams,
    anticoncentration_bound,
    compute_Kn,
    cov_discrepancy,
    delta_rate,
    gaussian_tail_term,
    levy_concentration_mc,
    nazarov_density_bound,
    third_moment_terms,
)
from .convex import ConvexSetSpec, convex_probability, support_function
from .coupling import (
    ExperimentConfig,
    RateParams,
    coupling_kolmogorov_bound,
    coupling_to_kolmogorov,
    kolmogorov_distance,
    ks_band,
    rate_regression,
    run_comparison_experiment,
    run_conditional_experiment,
    run_marginal_experiment,
    shared_randomness_pairs,
)
from .errors import ConfigurationError, InputError, NumericalError
from .function_class import DriftSpec, FunctionClassSpec, Net, build_net, covering_number_estimate, sphere_net
from .gaussian import CovarianceModel, estimate_covariance, gaussian_sups, psd_repair, sample_gaussian_sup
from .population import Population
from .process import (
    draw_data,
    empirical_bootstrap_sup,
    empirical_sup,
    multinomial_weights,
    multiplier_bootstrap_sup,
)
from .smoothing import MollifiedIndicator, derivative_bound_check, mollified_indicator_eval, softmax

__version__ = "0.1.0"

__all__ = [
    "anticoncentration_bound",
    "build_net",
    "ClassParams",
    "compute_Kn",
    "ConfigurationError",
    "convex_probability",
    "ConvexSetSpec",
    "coupling_kolmogorov_bound",
    "coupling_to_kolmogorov",
    "cov_discrepancy",
    "CovarianceModel",
    "covering_number_estimate",
    "delta_rate",
    "derivative_bound_check",
    "draw_data",
    "DriftSpec",
    "empirical_bootstrap_sup",
    "empirical_sup",
    "estimate_covariance",
    "ExperimentConfig",
    "FunctionClassSpec",
    "gaussian_sups",
    "gaussian_tail_term",
    "InputError",
    "kolmogorov_distance",
    "ks_band",
    "levy_concentration_mc",
    "mollified_indicator_eval",
    "MollifiedIndicator",
    "multinomial_weights",
    "multiplier_bootstrap_sup",
    "nazarov_density_bound",
    "Net",
    "NumericalError",
    "Population",
    "psd_repair",
    "rate_regression",
    "RateParams",
    "run_comparison_experiment",
    "run_conditional_experiment",
    "run_marginal_experiment",
    "sample_gaussian_sup",
    "shared_randomness_pairs",
    "softmax",
    "sphere_net",
    "support_function",
    "third_moment_terms",
]
