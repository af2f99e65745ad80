"""Bound evaluators for choosing the metric B.

Each setting's convergence bound is a function nu(lam_min, lam_max, h) once the Lipschitz
constant is written in the Euclidean norm, L1 = L_bar / lam_max. The optimizers return the
closed-form minimizers for rho = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

from zomax.errors import ConfigurationError, InfeasiblePlanError

Setting = Literal["unconstrained", "constrained", "nonsmooth"]


@dataclass(frozen=True)
class NuParameters:
    """Raw bound constants; a, b, c, e, p mean different things per setting."""

    L_bar: float
    rho: float
    a: float
    b: float
    c: float = 0.0
    e: float = 0.0
    p: float = 0.0

    def __post_init__(self) -> None:
        if not self.L_bar > 0:
            raise ConfigurationError(f"L_bar must be positive, got {self.L_bar}")
        if min(self.rho, self.a, self.b, self.c, self.e, self.p) < 0:
            raise ConfigurationError("bound constants must be nonnegative")

    @classmethod
    def unconstrained(
        cls,
        L_bar: float,
        rho: float,
        r0_sq: float,
        N: int,
        mu: float,
        d: int,
        sigma: float,
        t: int,
    ) -> NuParameters:
        return cls(
            L_bar=L_bar,
            rho=rho,
            a=2.0 * r0_sq / (N + 1),
            b=2.0 * mu**2 * d,
            c=2.0 * mu**2 * rho * (d + 3) ** 3,
            e=3.0 * sigma**2 / t,
        )

    @classmethod
    def constrained(
        cls,
        L_bar: float,
        rho: float,
        r0_sq: float,
        N: int,
        mu: float,
        d: int,
        sigma: float,
        t: int,
        D_z: float,
    ) -> NuParameters:
        return cls(
            L_bar=L_bar,
            rho=rho,
            a=2.0 * r0_sq / (N + 1),
            b=mu * D_z * (d + 3) ** 1.5,
            c=mu**2 * rho * (d + 3) ** 3,
            e=sigma**2 / t,
            p=2.0 * D_z * sigma / math.sqrt(t),
        )

    @classmethod
    def nonsmooth(
        cls, L_bar: float, rho: float, r0_sq: float, N: int, sigma: float, t: int
    ) -> NuParameters:
        return cls(L_bar=L_bar, rho=rho, a=2.0 * r0_sq / (N + 1), b=3.0 * sigma**2 / t)


class NuOptimum(NamedTuple):
    h: float
    lam_min: float
    lam_max: float
    kappa: float
    value: float


def _check_eigs(lam_min: float, lam_max: float, h: float) -> None:
    if not 0 < lam_min <= lam_max:
        raise ConfigurationError("need 0 < lam_min <= lam_max")
    if not h > 0:
        raise ConfigurationError(f"h must be positive, got {h}")


def nu_bounds(
    setting: Setting, params: NuParameters, lam_min: float, lam_max: float, h: float
) -> float:
    _check_eigs(lam_min, lam_max, h)
    L, rho = params.L_bar, params.rho
    kappa = lam_max / lam_min
    a_bar = L * params.a
    if setting == "unconstrained":
        numerator = (
            lam_max * a_bar
            + L * params.b / kappa
            + L**2 * params.c / (lam_max * kappa)
            + lam_min**2 * params.e / L
        )
        denom = L * lam_max * h**2 - 2.0 * rho
    elif setting == "constrained":
        e_term = (36.0 * rho * kappa**2 * lam_min + 4.0 * lam_min * lam_max / L) * params.e
        numerator = (
            lam_max * a_bar
            + L * params.b
            + L**2 * params.c / lam_min
            + params.p * lam_min * kappa
            + e_term
        )
        denom = L * lam_max * h**2 - 6.0 * rho
    elif setting == "nonsmooth":
        numerator = lam_max * a_bar + lam_min**2 * params.b / L
        denom = L * lam_max * h**2 - rho
    else:
        raise ConfigurationError(f"unknown setting {setting!r}")
    if denom <= 0:
        raise InfeasiblePlanError(f"bound denominator {denom:g} is not positive")
    return numerator / denom


def nu_optimize(setting: Setting, params: NuParameters) -> NuOptimum:
    """h* = 1/(2 L_bar), kappa* = 1 and the optimal eigenvalue for rho = 0.

    The nonsmooth bound decreases as lam -> 0, so lam_min = lam_max = 0 is reported together
    with the limiting value.
    """
    if params.rho != 0 or params.c != 0:
        raise ConfigurationError("closed-form optimizers need rho = 0 and c = 0")
    L = params.L_bar
    h = 1.0 / (2.0 * L)
    a_bar = L * params.a
    if setting == "nonsmooth":
        return NuOptimum(h, 0.0, 0.0, 1.0, 4.0 * L * a_bar)
    if setting == "unconstrained":
        b_bar, e_bar, offset = L * params.b, params.e / L, 0.0
    elif setting == "constrained":
        b_bar, e_bar, offset = L * params.b, 4.0 * params.e / L, params.p
    else:
        raise ConfigurationError(f"unknown setting {setting!r}")
    if b_bar == 0 or e_bar == 0:
        raise InfeasiblePlanError("b and e must be positive for a finite optimal eigenvalue")
    lam = math.sqrt(b_bar / e_bar)
    value = 4.0 * L * (a_bar + offset + 2.0 * math.sqrt(b_bar * e_bar))
    return NuOptimum(h, lam, lam, 1.0, value)
