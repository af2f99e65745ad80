"""Hyperparameter calculators: smoothing radius, iteration count and batch size for a target
accuracy epsilon, for the unconstrained, constrained and nonsmooth settings with B = lambda I.

Plans without sigma follow the plain ZO-EG guarantees; passing sigma switches to the
variance-reduced ones and adds t_min.
"""

from __future__ import annotations

import logging
import math

from zomax.diagnostics.stationarity import goldstein_mu
from zomax.errors import ConfigurationError, InfeasiblePlanError
from zomax.schemas import HyperparamPlan

logger = logging.getLogger(__name__)


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ConfigurationError(f"{name} must be positive, got {value}")


def _nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise ConfigurationError(f"{name} must be nonnegative, got {value}")


def _iterations(numerator: float, denominator: float, epsilon: float) -> int:
    return max(1, math.ceil(numerator / denominator * epsilon**-2 - 1))


def _window(low: float, high: float) -> tuple[float, float]:
    if not low < high:
        raise InfeasiblePlanError(f"step window [{low:g}, {high:g}] is empty")
    return low, high


def admissible_rho(L: float, kappa: float = 1.0, proximal: bool = False) -> float:
    """Upper end of the weak MVI range for rho: 1/(8 L kappa^2), or 1/(24 L kappa^2) proximal."""
    _positive(L=L)
    if kappa < 1:
        raise ConfigurationError(f"kappa must be at least 1, got {kappa}")
    return 1.0 / ((24.0 if proximal else 8.0) * L * kappa**2)


def _warn_rho(rho: float, L: float, proximal: bool) -> None:
    limit = admissible_rho(L, 1.0, proximal)
    if rho >= limit:
        logger.warning("rho=%g is outside the admissible range [0, %g)", rho, limit)


def smoothing_value_bound(mu: float, L1: float, d: int) -> float:
    """|f_mu(z) - f(z)| <= mu^2/2 L1 d for L1-smooth f."""
    return 0.5 * mu**2 * L1 * d


def smoothing_gradient_bound(mu: float, L1: float, d: int) -> float:
    """|grad f_mu(z) - grad f(z)|_* <= mu/2 L1 (d+3)^(3/2) for L1-smooth f."""
    return 0.5 * mu * L1 * (d + 3) ** 1.5


def lipschitz_variance_bound(L0: float, d: int) -> float:
    """Second-moment bound L0^2 (d+4)^2 of the single-direction oracle for L0-Lipschitz f."""
    return L0**2 * (d + 4) ** 2


def plan_unconstrained(
    L1: float,
    rho: float,
    lam: float,
    r0: float,
    epsilon: float,
    h2: float,
    d: int,
    sigma: float | None = None,
) -> HyperparamPlan:
    _positive(L1=L1, lam=lam, r0=r0, epsilon=epsilon, h2=h2, d=d)
    _nonnegative(rho=rho)
    _warn_rho(rho, L1, proximal=False)
    denom = lam**2 * L1 * h2**2 - 2.0 * rho
    if denom <= 0:
        raise InfeasiblePlanError(
            f"lambda^2 L1 h2^2 = {lam**2 * L1 * h2**2:g} must exceed 2 rho = {2 * rho:g}"
        )
    vr = sigma is not None
    coef = 24.0 if vr else 16.0
    first = epsilon / ((math.sqrt(3.0) if vr else math.sqrt(2.0)) * lam * L1 * (d + 3) ** 1.5)
    second = math.sqrt(denom / (coef * lam * L1 * d + coef * lam * L1**2 * rho * (d + 3) ** 3))
    t_min = None
    if vr:
        _nonnegative(sigma=sigma)
        inner = L1 * h2**2 - 2.0 * rho
        if inner <= 0:
            raise InfeasiblePlanError(f"L1 h2^2 - 2 rho = {inner:g} must be positive")
        t_min = max(1, math.ceil(18.0 * lam * sigma**2 / (lam**2 * L1 * inner) * epsilon**-2))
    return HyperparamPlan(
        mu_max=min(first, second * epsilon),
        N_min=_iterations((12.0 if vr else 8.0) * lam**2 * L1 * r0**2, denom, epsilon),
        t_min=t_min,
        h_window=_window(math.sqrt(2.0 * rho / (L1 * lam**2)), 1.0 / (2.0 * L1 * lam)),
        source="unconstrained_vr" if vr else "unconstrained",
        h1=1.0 / (L1 * lam),
        h2=h2,
    )


def _quadratic_root(a: float, b: float, epsilon: float) -> float:
    """Positive root of a mu^2 + b mu = epsilon^2 / 4 written without cancellation."""
    return epsilon**2 / (2.0 * (b + math.sqrt(b**2 + a * epsilon**2)))


def plan_constrained(
    L1: float,
    rho: float,
    lam: float,
    r0: float,
    epsilon: float,
    h: float,
    D_z: float,
    d: int,
    sigma: float | None = None,
) -> HyperparamPlan:
    """mu_max is the smaller of (-b + sqrt(b^2 + a eps^2)) / (2a) and eps / (sqrt(2) lambda L1
    (d+3)^(3/2)); the root is evaluated in rationalized form, so a -> 0 needs no special case."""
    _positive(L1=L1, lam=lam, r0=r0, epsilon=epsilon, h=h, D_z=D_z, d=d)
    _nonnegative(rho=rho)
    _warn_rho(rho, L1, proximal=True)
    denom = lam**2 * L1 * h**2 - 6.0 * rho
    if denom <= 0:
        raise InfeasiblePlanError(
            f"lambda^2 L1 h^2 = {lam**2 * L1 * h**2:g} must exceed 6 rho = {6 * rho:g}"
        )
    a = 4.0 * rho * lam * L1**2 * (d + 3) ** 3 / denom
    b = 4.0 * lam * L1 * D_z * (d + 3) ** 1.5 / denom
    mu_max = min(
        _quadratic_root(a, b, epsilon), epsilon / (math.sqrt(2.0) * lam * L1 * (d + 3) ** 1.5)
    )
    vr = sigma is not None
    t_min = None
    if vr:
        _nonnegative(sigma=sigma)
        c = (36.0 * rho + 4.0 / L1 + 4.0) * lam * sigma**2 / denom
        spread = 2.0 * D_z * lam * sigma / denom
        t_min = max(1, 32 * math.ceil(max(c * epsilon**-2, spread**2 * epsilon**-4)))
    return HyperparamPlan(
        mu_max=mu_max,
        N_min=_iterations((32.0 if vr else 16.0) * lam**2 * L1 * r0**2, denom, epsilon),
        t_min=t_min,
        h_window=_window(math.sqrt(6.0 * rho / (L1 * lam**2)), 1.0 / (2.0 * L1 * lam)),
        source="constrained_vr" if vr else "constrained",
        h1=h,
        h2=h,
    )


def plan_nonsmooth(
    L0: float,
    rho: float,
    d: int,
    delta: float,
    epsilon: float,
    r0: float,
    sigma: float | None = None,
    h2: float | None = None,
) -> HyperparamPlan:
    """Chains mu -> L1(f_mu) = sqrt(d) L0 / mu -> h1 = 1/L1(f_mu) -> h2 (default h1/2)."""
    _positive(L0=L0, d=d, epsilon=epsilon, r0=r0)
    _nonnegative(rho=rho)
    mu = goldstein_mu(delta, epsilon, L0, d)
    L1_mu = math.sqrt(d) * L0 / mu
    h1 = 1.0 / L1_mu
    h2 = h1 / 2.0 if h2 is None else h2
    _positive(h2=h2)
    low = math.sqrt(rho / L1_mu)
    if h2 > h1 / 2.0 or h2 <= low:
        raise InfeasiblePlanError(f"h2={h2:g} outside ({low:g}, {h1 / 2.0:g}]")
    denom = L1_mu * h2**2 - rho
    vr = sigma is not None
    t_min = None
    if vr:
        _nonnegative(sigma=sigma)
        t_min = max(1, math.ceil(24.0 * sigma**2 / (L1_mu * denom) * epsilon**-2))
    return HyperparamPlan(
        mu_max=mu,
        N_min=_iterations((16.0 if vr else 8.0) * r0**2 * L1_mu, denom, epsilon),
        t_min=t_min,
        h_window=(low, h1 / 2.0),
        source="nonsmooth_vr" if vr else "nonsmooth",
        L1_mu=L1_mu,
        h1=h1,
        h2=h2,
    )


PLANNERS = {
    "unconstrained": plan_unconstrained,
    "constrained": plan_constrained,
    "nonsmooth": plan_nonsmooth,
}
