from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from zomax.errors import ConfigurationError, DimensionMismatchError
from zomax.geometry import MetricMatrix
from zomax.oracles import AdditiveGaussian, Noiseless, OracleConfig, Schedule, SmoothingScheme
from zomax.problems import (
    LaneMergingConfig,
    MinMaxProblem,
    PoisoningDataset,
    abs_diff_problem,
    bilinear_problem,
    generate_dataset,
    lane_merging_problem,
    linear_problem,
    load_rls_instance,
    poisoning_problem_from_dataset,
    rls_problem,
    toy_f1,
    toy_f2,
    toy_f3,
)
from zomax.problems.rls import random_rls_instance
from zomax.schemas import ExperimentConfig, MetricSpec, ProblemSpec
from zomax.solvers import SolverConfig, SolverVariant

logger = logging.getLogger(__name__)

RLS_DESK_SIZE = (30, 50)


@dataclass(frozen=True)
class BuiltProblem:
    problem: MinMaxProblem
    dataset: PoisoningDataset | None = None
    rls_data: tuple[NDArray, NDArray] | None = None
    lane_config: LaneMergingConfig | None = None


def _build(spec: ProblemSpec) -> BuiltProblem:
    kind = spec.kind
    if kind == "toy_f1":
        return BuiltProblem(toy_f1())
    if kind == "toy_f2":
        return BuiltProblem(toy_f2())
    if kind == "toy_f3":
        return BuiltProblem(toy_f3(lipschitz_bound=spec.lipschitz_bound))
    if kind in ("bilinear", "bilinear_orthant"):
        return BuiltProblem(bilinear_problem(orthant=kind == "bilinear_orthant"))
    if kind == "linear":
        return BuiltProblem(linear_problem())
    if kind == "abs_diff":
        return BuiltProblem(abs_diff_problem(sigma=spec.sigma))
    if kind == "rls":
        if spec.dataset is not None:
            A, y0 = load_rls_instance(spec.dataset)
            return BuiltProblem(rls_problem(A, y0, spec.rho_ball), rls_data=(A, y0))
        n, m = spec.n or RLS_DESK_SIZE[0], spec.m or RLS_DESK_SIZE[1]
        A, y0, x0 = random_rls_instance(n, m, spec.seed)
        start = np.concatenate([x0, np.zeros(n)])
        return BuiltProblem(rls_problem(A, y0, spec.rho_ball, start), rls_data=(A, y0))
    if kind == "poisoning":
        if spec.dataset is not None:
            dataset = PoisoningDataset.load_csv(spec.dataset)
        else:
            dataset = generate_dataset(spec.seed, n_holdout=spec.holdout)
        problem = poisoning_problem_from_dataset(dataset, lam=spec.lam, zeta=spec.zeta)
        return BuiltProblem(problem, dataset=dataset)
    if kind == "lane_merging":
        config = LaneMergingConfig(horizon=spec.horizon, control_points=spec.control_points)
        return BuiltProblem(lane_merging_problem(config), lane_config=config)
    raise ConfigurationError(f"unknown problem kind {kind!r}")


def build_problem(spec: ProblemSpec) -> BuiltProblem:
    built = _build(spec)
    if spec.start is None:
        return built
    start = np.asarray(spec.start, dtype=float)
    if start.size != built.problem.d:
        raise DimensionMismatchError(
            f"start has {start.size} coordinates, {built.problem.name} has d={built.problem.d}"
        )
    problem = dataclasses.replace(built.problem, initial_point=start)
    return dataclasses.replace(built, problem=problem)


def build_metric(spec: MetricSpec, problem: MinMaxProblem) -> MetricMatrix:
    n, m = problem.dims
    if spec.kind == "problem":
        return problem.metadata.metric or MetricMatrix.identity(n, m)
    if spec.kind == "identity":
        return MetricMatrix.identity(n, m)
    if spec.kind == "scaled":
        return MetricMatrix.scaled_identity(spec.scale, n, m)
    if spec.kind == "diagonal_random":
        metric = MetricMatrix.random_diagonal(
            n, m, spec.low, spec.high, np.random.default_rng(spec.seed)
        )
        logger.info("random diagonal metric with kappa=%.2f", metric.kappa)
        return metric
    return MetricMatrix.half_split(n, m, spec.high, spec.low, np.random.default_rng(spec.seed))


def build_solver_config(
    config: ExperimentConfig, problem: MinMaxProblem, seed: int
) -> SolverConfig:
    solver, oracle = config.solver, config.oracle
    metric = build_metric(config.metric, problem)
    noise = AdditiveGaussian(oracle.noise_variance) if oracle.noise_variance > 0 else Noiseless
    oracle_cfg = OracleConfig(
        mu=Schedule(kind=oracle.mu_schedule, value=oracle.mu),
        metric=metric,
        scheme=SmoothingScheme(oracle.scheme),
        samples_per_call=Schedule(kind=oracle.samples_schedule, value=oracle.samples),
        noise=noise,
        cache_base=oracle.cache_base,
    )
    return SolverConfig(
        variant=SolverVariant(solver.variant),
        h1=Schedule(kind=solver.h_schedule, value=solver.h1),
        h2=Schedule(kind=solver.h_schedule, value=solver.h2 or solver.h1),
        iterations=solver.iterations,
        oracle=oracle_cfg,
        seed=seed,
        record_every=solver.record_every,
        projection=solver.projection,
        project_start=solver.project_start,
        diagnostic_samples=oracle.diagnostic_samples,
    )
