"""Benchmark studies run from the shipped configurations. All of them are slow."""

import csv
from pathlib import Path

import numpy as np
import pytest

from zomax.diagnostics import gradient_mapping_tau
from zomax.geometry import MetricMatrix
from zomax.harness import compare_study, load_experiment, mvi_study, run_config, run_experiment
from zomax.oracles import OracleConfig, estimate_oracle_variance
from zomax.problems import generate_dataset, random_rls_problem, toy_f1, toy_f2, toy_f3

pytestmark = pytest.mark.slow

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _shipped(name, start=None, iterations=None):
    """A shipped configuration, optionally with another start or iteration budget."""

    config = load_experiment(CONFIG_DIR / f"{name}.ini").base
    if start is not None:
        problem = config.problem.model_copy(update={"start": list(start)})
        config = config.model_copy(update={"problem": problem})
    if iterations is not None:
        solver = config.solver.model_copy(update={"iterations": iterations})
        config = config.model_copy(update={"solver": solver})
    return config


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def _column(rows, name):
    index = rows[0].index(name)
    return np.array([float(row[index]) for row in rows[1:]])


def test_averaging_shrinks_oracle_variance_on_rls():
    """Test that t = 100 samples divide the oracle variance by about 100."""

    problem = random_rls_problem(30, 50, 5.0, seed=0)
    z = problem.start()
    single = OracleConfig(mu=1e-4, metric=MetricMatrix.identity(problem.n, problem.m))
    averaged = OracleConfig(mu=1e-4, metric=single.metric, samples_per_call=100)
    rng = np.random.default_rng(7)
    one = estimate_oracle_variance(problem, z, single, 1000, rng)
    hundred = estimate_oracle_variance(problem, z, averaged, 1000, rng)
    assert 0.005 <= hundred / one <= 0.02


@pytest.mark.parametrize("start", [(5.0, -7.0), (-7.0, 5.0)], ids=["start1", "start2"])
def test_toy_f1_operator_norm_drops_tenfold(start, settings):
    problem = toy_f1()
    result = run_config(_shipped("toy_f1", start=start))
    final = result.traces[0].final_point
    initial = np.linalg.norm(problem.operator(np.array(start)))
    assert np.linalg.norm(problem.operator(final)) < 0.1 * initial


def test_toy_f2_gradient_mapping_drops_tenfold(settings):
    problem = toy_f2()
    trace = run_config(_shipped("toy_f2")).traces[0]

    def tau_norm(z):
        return np.linalg.norm(gradient_mapping_tau(problem, z, 1e-3, 1e-3, problem.operator(z)))

    np.testing.assert_array_equal(trace.points[0], [3.0, -2.0])
    assert tau_norm(trace.final_point) < 0.1 * tau_norm(trace.points[0])
    assert problem.contains(trace.final_point)


@pytest.mark.parametrize("start", [(7.0, -1.0), (1.0, 7.0)], ids=["start1", "start2"])
def test_toy_f3_approaches_the_kink_solution(start, settings):
    target = toy_f3().metadata.z_star
    result = run_config(_shipped("toy_f3", start=start, iterations=50_000))
    final = result.traces[0].final_point
    assert np.linalg.norm(final - target) < 0.1 * np.linalg.norm(np.array(start) - target)


def test_rls_solvers_reach_the_residual_threshold(settings):
    """Test ZO-EG, EG and GDA against |Ax - y0 + delta| <= 0.5% of its initial value."""

    out = compare_study(CONFIG_DIR / "rls.ini").parent
    for variant in ("zoeg", "eg", "gda"):
        rows = _read_csv(out / f"rls-{variant}_seed0.csv")
        values = _column(rows, "f_value")
        assert values.min() <= 0.005**2 * values[0], variant


def test_poisoning_attack_lowers_accuracy(settings):
    """Test a drop of at least five points against a model fit on clean data."""

    result = run_experiment(CONFIG_DIR / "poisoning.ini")
    assert len(result.rows) == 5
    dataset = generate_dataset(0)
    clean = dataset.accuracy(dataset.fit_reference_model())
    attacked = np.mean([row.accuracy for row in result.rows])
    assert attacked <= clean - 0.05
    assert all(row.holdout_accuracy is not None for row in result.rows)


def test_lane_merging_mvi_study(settings):
    result = mvi_study(CONFIG_DIR / "lane_merging_mvi.ini")
    trace = _read_csv(result.report_path.parent / "lane_merging_mvi_seed0.csv")
    assert trace[-1][0] == "7500"
    assert result.report.samples == 1000
    histogram = _read_csv(result.histogram_path)
    assert sum(int(row[2]) for row in histogram[1:]) == 1000


def test_central_differences_beat_forward_under_noise(settings):
    path = compare_study(CONFIG_DIR / "noise_study.ini")
    rows = _read_csv(path)
    assert _column(rows, "central_mean")[-1] < _column(rows, "forward_mean")[-1]
