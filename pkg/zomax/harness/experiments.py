"""Experiment runner: single runs, variant comparisons and proximal MVI studies."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from slugify import slugify

from zomax.config import get_settings
from zomax.diagnostics.mvi import default_operator, prox_mvi_sampler, write_histogram_csv
from zomax.diagnostics.stationarity import goldstein_surrogate, stationarity_report
from zomax.errors import ConfigFileError, DimensionMismatchError, DivergenceError, EvaluationError
from zomax.harness.artifacts import (
    append_summary,
    reset_summary,
    write_error_marker,
    write_json,
    write_table,
    write_trace_csv,
)
from zomax.harness.builders import BuiltProblem, build_metric, build_problem, build_solver_config
from zomax.harness.config_file import load_experiment
from zomax.problems.lane_merging import control_variances
from zomax.problems.rls import save_rls_instance
from zomax.schemas import ExperimentConfig, MviReport, SummaryRow
from zomax.solvers import RunTrace, SolverConfig, run_solver

logger = logging.getLogger(__name__)

BASE_VARIANT = "base"
EVAL_GRID_POINTS = 101


@dataclass
class ExperimentResult:
    output_dir: Path
    traces: dict[int, RunTrace] = field(default_factory=dict)
    trace_paths: dict[int, Path] = field(default_factory=dict)
    rows: list[SummaryRow] = field(default_factory=list)


@dataclass
class MviResult:
    report: MviReport
    histogram_path: Path
    report_path: Path
    candidate: NDArray


def output_dir_for(config: ExperimentConfig) -> Path:
    return config.output_dir or get_settings().output_root / slugify(config.name)


def _stem(config: ExperimentConfig, variant: str) -> str:
    stem = slugify(config.name, separator="_")
    if variant != BASE_VARIANT:
        stem += "-" + slugify(variant, separator="_")
    return stem


def _dump_dataset(built: BuiltProblem, out: Path) -> None:
    if built.dataset is not None:
        built.dataset.save_csv(out / "dataset.csv")
    if built.rls_data is not None:
        save_rls_instance(out / "rls_instance.csv", *built.rls_data)


def _with_coordinates(config: ExperimentConfig, d: int) -> bool:
    flag = config.diagnostics.record_coordinates
    return d <= get_settings().trace_coordinate_limit if flag is None else flag


def _summary_row(
    config: ExperimentConfig,
    variant: str,
    built: BuiltProblem,
    cfg: SolverConfig,
    trace: RunTrace,
    elapsed: float,
) -> SummaryRow:
    problem = built.problem
    initial = float(trace.f_values[0]) if len(trace) else problem.evaluate(problem.start())
    final = problem.evaluate(trace.final_point)
    last_is_final = len(trace) and trace.iterations[-1] == cfg.iterations
    accuracy = holdout_accuracy = None
    if built.dataset is not None:
        weights = trace.final_point[problem.n :]
        accuracy = built.dataset.accuracy(weights)
        holdout_accuracy = built.dataset.holdout_accuracy(weights)
    return SummaryRow(
        experiment=config.name,
        variant=variant,
        seed=cfg.seed,
        initial_objective=initial,
        final_objective=final,
        objective_ratio=final / initial if initial != 0 else math.nan,
        final_diag_norm=float(trace.diag_norms[-1]) if last_is_final else math.nan,
        iterations=cfg.iterations,
        function_evals=trace.total_evals,
        wall_time_s=elapsed,
        accuracy=accuracy,
        holdout_accuracy=holdout_accuracy,
    )


def _final_report(
    config: ExperimentConfig, built: BuiltProblem, cfg: SolverConfig, trace: RunTrace, path: Path
) -> None:
    """Stationarity and Goldstein reports at the final iterate, when they apply."""
    problem = built.problem
    diagnostics = config.diagnostics
    report = None
    if diagnostics.stationarity and problem.has_gradient:
        k = cfg.iterations
        report = stationarity_report(
            problem, trace.final_point, cfg.h1.at(k), cfg.h2.at(k), metric=cfg.metric_for(problem)
        )
    if diagnostics.goldstein and problem.metadata.L0 is not None:
        goldstein = goldstein_surrogate(
            problem,
            trace.final_point,
            diagnostics.goldstein_delta,
            diagnostics.goldstein_epsilon,
            problem.metadata.L0,
            diagnostics.goldstein_samples,
            np.random.default_rng(cfg.seed),
        )
        if report is None:
            report = goldstein
        else:
            report = report.model_copy(
                update={
                    "goldstein": goldstein.goldstein,
                    "evals_spent": report.evals_spent + goldstein.evals_spent,
                }
            )
    if report is not None:
        write_json(path, report)


def run_config(
    config: ExperimentConfig, variant: str = BASE_VARIANT, built: BuiltProblem | None = None
) -> ExperimentResult:
    """Run every seed of one configuration in ascending order, appending to summary.csv."""
    built = built or build_problem(config.problem)
    problem = built.problem
    out = output_dir_for(config)
    out.mkdir(parents=True, exist_ok=True)
    _dump_dataset(built, out)
    stem = _stem(config, variant)
    coordinates = _with_coordinates(config, problem.d)
    result = ExperimentResult(output_dir=out)
    for seed in sorted(config.solver.seeds):
        cfg = build_solver_config(config, problem, seed)
        trace_path = out / f"{stem}_seed{seed}.csv"
        started = time.perf_counter()
        try:
            trace = run_solver(problem, cfg)
        except (EvaluationError, DivergenceError) as exc:
            if exc.partial_trace is not None:
                write_trace_csv(exc.partial_trace, trace_path, coordinates)
            write_error_marker(trace_path.with_suffix(".error"), exc)
            raise
        elapsed = time.perf_counter() - started
        write_trace_csv(trace, trace_path, coordinates)
        row = _summary_row(config, variant, built, cfg, trace, elapsed)
        append_summary(out / "summary.csv", row)
        _final_report(config, built, cfg, trace, out / f"{stem}_seed{seed}_stationarity.json")
        result.traces[seed] = trace
        result.trace_paths[seed] = trace_path
        result.rows.append(row)
        logger.info(
            "%s seed %d: objective %.6g -> %.6g in %d evaluations",
            stem,
            seed,
            row.initial_objective,
            row.final_objective,
            row.function_evals,
        )
    return result


def run_experiment(config_path: Path | str) -> ExperimentResult:
    loaded = load_experiment(config_path)
    reset_summary(output_dir_for(loaded.base) / "summary.csv")
    return run_config(loaded.base)


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def _by_iteration(results: dict[str, ExperimentResult]) -> tuple[list[str], list[list]]:
    names = list(results)
    traces = [t for r in results.values() for t in r.traces.values()]
    steps = sorted({int(k) for t in traces for k in t.iterations})
    rows = []
    for k in steps:
        row: list = [k]
        for name in names:
            values = [
                float(t.f_values[np.searchsorted(t.iterations, k)])
                for t in results[name].traces.values()
                if k in t.iterations
            ]
            row += list(_mean_std(values)) if values else [None, None]
        rows.append(row)
    header = ["k"] + [f"{n}_{stat}" for n in names for stat in ("mean", "std")]
    return header, rows


def _by_evals(results: dict[str, ExperimentResult]) -> tuple[list[str], list[list]]:
    """Objective of the last record at or before each point of a shared evaluation grid."""
    names = list(results)
    traces = [t for r in results.values() for t in r.traces.values() if len(t)]
    top = min(int(t.cum_evals[-1]) for t in traces) if traces else 0
    grid = np.unique(np.linspace(0, top, EVAL_GRID_POINTS).astype(int))
    rows = []
    for evals in grid:
        row: list = [int(evals)]
        for name in names:
            values = []
            for t in results[name].traces.values():
                index = int(np.searchsorted(t.cum_evals, evals, side="right")) - 1
                if index >= 0:
                    values.append(float(t.f_values[index]))
            row += list(_mean_std(values)) if values else [None, None]
        rows.append(row)
    header = ["evals"] + [f"{n}_{stat}" for n in names for stat in ("mean", "std")]
    return header, rows


def compare_study(config_path: Path | str) -> Path:
    """Run each [variant.NAME] and write objective mean/std per iteration and per evaluation."""
    loaded = load_experiment(config_path)
    if len(loaded.variants) < 2:
        raise ConfigFileError("a comparison needs at least two [variant.NAME] sections")
    built = build_problem(loaded.base.problem)
    reset_summary(output_dir_for(loaded.base) / "summary.csv")
    results = {
        name: run_config(config, variant=name, built=built)
        for name, config in loaded.variants.items()
    }
    out = output_dir_for(loaded.base)
    header, rows = _by_iteration(results)
    path = write_table(out / "comparison.csv", header, rows)
    header, rows = _by_evals(results)
    write_table(out / "comparison_by_evals.csv", header, rows)
    return path


def load_candidate(path: Path | str, d: int) -> NDArray:
    """Last numeric row of a comma separated file; header and '#' lines are skipped."""
    lines = [
        line
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    for line in reversed(lines):
        try:
            values = np.array([float(item) for item in line.split(",")])
        except ValueError:
            continue
        if values.size != d:
            raise DimensionMismatchError(f"candidate has {values.size} coordinates, expected {d}")
        return values
    raise ConfigFileError(f"no numeric row in candidate file {path}", field="mvi.candidate")


def mvi_study(config_path: Path | str) -> MviResult:
    loaded = load_experiment(config_path)
    config = loaded.base
    spec = config.mvi
    if spec is None:
        raise ConfigFileError("an [mvi] section is required", field="mvi")
    built = build_problem(config.problem)
    problem = built.problem
    if spec.candidate == "run":
        reset_summary(output_dir_for(config) / "summary.csv")
        result = run_config(config, built=built)
        candidate = result.traces[min(result.traces)].final_point
    else:
        candidate = load_candidate(spec.candidate, problem.d)
    if spec.covariance == "lane_merging":
        if built.lane_config is None:
            raise ConfigFileError("covariance 'lane_merging' needs the lane merging problem")
        cov = control_variances(built.lane_config)
    else:
        values = [float(v) for v in spec.covariance.split(",")]
        cov = values[0] if len(values) == 1 else np.asarray(values)
    rng = np.random.default_rng(spec.seed)
    operator = default_operator(problem, rng, spec.mu, spec.estimate_samples)
    report = prox_mvi_sampler(
        problem,
        candidate,
        spec.h,
        spec.count,
        cov,
        rng,
        operator=operator,
        rho=spec.rho,
        metric=build_metric(config.metric, problem),
        bins=spec.bins,
    )
    out = output_dir_for(config)
    out.mkdir(parents=True, exist_ok=True)
    stem = _stem(config, BASE_VARIANT)
    write_table(out / f"{stem}_candidate.csv", [f"z_{i}" for i in range(problem.d)], [candidate])
    histogram = write_histogram_csv(report, out / f"{stem}_mvi_histogram.csv")
    report_path = write_json(out / "mvi_report.json", report)
    return MviResult(report, histogram, report_path, candidate)
