from zomax.diagnostics.mvi import prox_mvi_sampler, weak_mvi_sampler, write_histogram_csv
from zomax.diagnostics.planning import (
    admissible_rho,
    lipschitz_variance_bound,
    plan_constrained,
    plan_nonsmooth,
    plan_unconstrained,
    smoothing_gradient_bound,
    smoothing_value_bound,
)
from zomax.diagnostics.stationarity import (
    goldstein_hull_estimate,
    goldstein_mu,
    goldstein_surrogate,
    gradient_mapping_tau,
    projected_residual_P,
    stationarity_report,
)
from zomax.diagnostics.tuning import NuParameters, nu_bounds, nu_optimize

__all__ = [
    "NuParameters",
    "admissible_rho",
    "goldstein_hull_estimate",
    "goldstein_mu",
    "goldstein_surrogate",
    "gradient_mapping_tau",
    "lipschitz_variance_bound",
    "nu_bounds",
    "nu_optimize",
    "plan_constrained",
    "plan_nonsmooth",
    "plan_unconstrained",
    "projected_residual_P",
    "prox_mvi_sampler",
    "smoothing_gradient_bound",
    "smoothing_value_bound",
    "stationarity_report",
    "weak_mvi_sampler",
    "write_histogram_csv",
]
