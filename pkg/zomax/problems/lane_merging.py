"""Two-car lane merging as an open-loop min-max game.

Car 1 keeps its lane and only chooses accelerations (the maximizing player); car 2 chooses
acceleration and steering to merge into the target lane (the minimizing player). Both cars
follow the kinematic bicycle model, discretized with RK4 over piecewise-linear inputs.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from zomax.problems.base import Box, MinMaxProblem, ProblemMetadata


class CarState(NamedTuple):
    x: float
    y: float
    theta: float
    v: float


class CarInput(NamedTuple):
    a: float
    delta: float


class LaneMergingConfig(BaseModel):
    """Scenario parameters; input bounds and wheelbase are modelling defaults."""

    model_config = ConfigDict(frozen=True)

    horizon: float = Field(20.0, gt=0)
    control_points: int = Field(50, ge=2)
    wheelbase: float = Field(2.5, gt=0)
    accel_bounds: tuple[float, float] = (-3.0, 3.0)
    steer_bounds: tuple[float, float] = (-0.5, 0.5)
    y_target: float = 5.0
    car1_start: tuple[float, float, float, float] = (0.0, 5.0, 0.0, 2.0)
    car2_start: tuple[float, float, float, float] = (5.0, 0.0, 0.0, 3.0)

    @model_validator(mode="after")
    def check_bounds(self) -> LaneMergingConfig:
        """Input boxes must be non-empty."""
        for name in ("accel_bounds", "steer_bounds"):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} lower bound exceeds upper bound")
        return self

    @property
    def dt(self) -> float:
        return self.horizon / self.control_points


def bicycle_dynamics(state: NDArray, control: NDArray, wheelbase: float) -> NDArray:
    """ds/dt for states (..., 4) under controls (..., 2)."""
    theta, v = state[..., 2], state[..., 3]
    a, delta = control[..., 0], control[..., 1]
    return np.stack(
        [v * np.cos(theta), v * np.sin(theta), v * np.tan(delta) / wheelbase, a], axis=-1
    )


def rk4_step(state, input_pair, dt: float, wheelbase: float = 2.5):
    """One RK4 step; the midpoint input is the average of the two endpoint inputs."""
    if not dt > 0 or not wheelbase > 0:
        raise ValueError("dt and wheelbase must be positive")
    s = np.asarray(state, dtype=float)
    u_start = np.asarray(input_pair[0], dtype=float)
    u_end = np.asarray(input_pair[1], dtype=float)
    u_mid = 0.5 * (u_start + u_end)
    k1 = bicycle_dynamics(s, u_start, wheelbase)
    k2 = bicycle_dynamics(s + 0.5 * dt * k1, u_mid, wheelbase)
    k3 = bicycle_dynamics(s + 0.5 * dt * k2, u_mid, wheelbase)
    k4 = bicycle_dynamics(s + dt * k3, u_end, wheelbase)
    result = s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if isinstance(state, CarState):
        return CarState(*result.tolist())
    return result


def stage_costs(s1: NDArray, s2: NDArray, y_target: float) -> tuple[NDArray, NDArray]:
    """Per-stage costs of car 1 and car 2 for states shaped (..., 4)."""
    dist_sq = (s1[..., 0] - s2[..., 0]) ** 2 + (s1[..., 1] - s2[..., 1]) ** 2
    proximity = np.exp(-dist_sq)
    gamma1 = 0.5 * s1[..., 3] ** 2 - 2.0 * proximity
    gamma2 = proximity + 10.0 * (s2[..., 1] - y_target) ** 2
    return gamma1, gamma2


def _clip(values: NDArray, bounds: tuple[float, float]) -> NDArray:
    return np.clip(values, bounds[0], bounds[1])


def rollout(
    accel1: NDArray, accel2: NDArray, steer2: NDArray, config: LaneMergingConfig
) -> tuple[NDArray, NDArray]:
    """States s_0..s_{Phi-1} of both cars; control arrays are (batch, Phi)."""
    batch, phi = accel1.shape
    u1 = np.stack([_clip(accel1, config.accel_bounds), np.zeros_like(accel1)], axis=-1)
    u2 = np.stack(
        [_clip(accel2, config.accel_bounds), _clip(steer2, config.steer_bounds)], axis=-1
    )
    s1 = np.empty((batch, phi, 4))
    s2 = np.empty((batch, phi, 4))
    s1[:, 0] = config.car1_start
    s2[:, 0] = config.car2_start
    for k in range(phi - 1):
        s1[:, k + 1] = rk4_step(s1[:, k], (u1[:, k], u1[:, k + 1]), config.dt, config.wheelbase)
        s2[:, k + 1] = rk4_step(s2[:, k], (u2[:, k], u2[:, k + 1]), config.dt, config.wheelbase)
    return s1, s2


def control_variances(
    config: LaneMergingConfig, accel: float = 0.1, steer: float = 0.01
) -> NDArray:
    """Sampling variances in problem order: car-2 accel, car-2 steer, car-1 accel."""
    phi = config.control_points
    return np.concatenate([np.full(phi, accel), np.full(phi, steer), np.full(phi, accel)])


def lane_merging_problem(config: LaneMergingConfig | None = None) -> MinMaxProblem:
    """x = (car-2 accelerations, car-2 steering), y = car-1 accelerations."""
    config = config or LaneMergingConfig()
    phi = config.control_points

    def split(Z: NDArray) -> tuple[NDArray, NDArray, NDArray]:
        return Z[:, 2 * phi :], Z[:, :phi], Z[:, phi : 2 * phi]

    def objective(Z: NDArray) -> NDArray:
        s1, s2 = rollout(*split(Z), config)
        gamma1, gamma2 = stage_costs(s1, s2, config.y_target)
        return gamma1.sum(axis=1) + gamma2.sum(axis=1)

    def components(z: NDArray) -> dict[str, float]:
        s1, s2 = rollout(*split(z[None, :]), config)
        gamma1, gamma2 = stage_costs(s1, s2, config.y_target)
        return {"gamma1": float(gamma1.sum()), "gamma2": float(gamma2.sum())}

    a_low, a_high = config.accel_bounds
    d_low, d_high = config.steer_bounds
    lower = np.concatenate([np.full(phi, a_low), np.full(phi, d_low), np.full(phi, a_low)])
    upper = np.concatenate([np.full(phi, a_high), np.full(phi, d_high), np.full(phi, a_high)])
    return MinMaxProblem(
        name="lane_merging",
        n=2 * phi,
        m=phi,
        objective=objective,
        feasible_set=Box(lower, upper),
        metadata=ProblemMetadata(),
        initial_point=np.zeros(3 * phi),
        components=components,
    )
