import csv
from pathlib import Path

import numpy as np
import pytest

from zomax.errors import ConfigFileError, DimensionMismatchError, EvaluationError
from zomax.harness import compare_study, load_experiment, mvi_study, run_config, run_experiment
from zomax.harness.artifacts import _fmt
from zomax.harness.builders import BuiltProblem, build_metric, build_problem
from zomax.harness.experiments import load_candidate
from zomax.problems import MinMaxProblem, Unconstrained

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SMOKE = """
[experiment]
name = smoke
output_dir = {tmp}/out

[problem]
kind = toy_f1

[solver]
variant = zoeg
h1 = 2e-3
h2 = 1e-3
iterations = 10
seeds = 0

[oracle]
mu = 1e-6
"""

COMPARE = """
[experiment]
name = cmp
output_dir = {tmp}/out

[problem]
kind = toy_f1

[solver]
h1 = 1e-3
iterations = 20
seeds = 0, 1
record_every = 5

[variant.a]
solver.h1 = 1e-3

[variant.b]
solver.h1 = 1e-3
"""


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_single_run_writes_trace_summary_and_report(write_config, settings):
    result = run_experiment(write_config(SMOKE))
    out = result.output_dir
    rows = _read_csv(out / "smoke_seed0.csv")
    assert rows[0] == ["k", "f_value", "diag_norm", "cum_evals", "z_0", "z_1"]
    assert len(rows) == 12
    assert rows[1][4:] == ["5.0", "-7.0"]
    summary = _read_csv(out / "summary.csv")
    assert len(summary) == 2
    row = dict(zip(summary[0], summary[1], strict=True))
    assert row["function_evals"] == "40"
    assert row["variant"] == "base"
    assert (out / "smoke_seed0_stationarity.json").exists()


def test_default_output_dir_comes_from_settings(write_config, settings):
    text = SMOKE.replace("output_dir = {tmp}/out\n", "")
    result = run_experiment(write_config(text))
    assert result.output_dir == settings.output_root / "smoke"
    assert (result.output_dir / "smoke_seed0.csv").exists()


def test_runs_replay_byte_for_byte(write_config, settings):
    first = run_experiment(write_config(SMOKE, "first.ini"))
    second_text = SMOKE.replace("{tmp}/out", "{tmp}/again")
    second = run_experiment(write_config(second_text, "second.ini"))
    a = (first.output_dir / "smoke_seed0.csv").read_bytes()
    b = (second.output_dir / "smoke_seed0.csv").read_bytes()
    assert a == b


def test_missing_dataset_points_at_the_key(write_config):
    text = "[experiment]\nname = x\n\n[problem]\nkind = rls\ndataset = missing.csv\n\n"
    text += "[solver]\nh1 = 0.1\niterations = 1\n"
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config(text))
    assert exc.value.field == "problem.dataset"
    assert exc.value.line == 6


def test_mvi_count_must_be_positive(write_config):
    text = SMOKE + "\n[mvi]\nh = 0.1\ncount = 0\n"
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config(text))
    assert exc.value.field == "mvi.count"


def test_variants_cannot_override_the_problem(write_config):
    text = SMOKE + "\n[variant.other]\nproblem.kind = toy_f2\n"
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config(text))
    assert exc.value.field == "variant.other.problem.kind"


def test_unknown_section_is_rejected(write_config):
    with pytest.raises(ConfigFileError, match="unknown section"):
        load_experiment(write_config(SMOKE + "\n[plots]\nwidth = 3\n"))


def test_malformed_line_reports_its_number(write_config):
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config("[experiment]\nname = x\nnot a pair\n"))
    assert exc.value.line == 3


def test_unknown_key_is_rejected(write_config):
    text = SMOKE.replace("mu = 1e-6", "mu = 1e-6\nradius = 3")
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config(text))
    assert exc.value.field == "oracle.radius"


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigFileError):
        load_experiment(tmp_path / "absent.ini")


def test_variant_overrides_merge_onto_the_base(write_config):
    text = SMOKE + "\n[variant.central]\noracle.scheme = central\nsolver.h1 = 5e-3\n"
    loaded = load_experiment(write_config(text))
    assert loaded.base.oracle.scheme == "forward"
    variant = loaded.variants["central"]
    assert variant.oracle.scheme == "central"
    assert variant.solver.h1 == 5e-3
    assert variant.oracle.mu == loaded.base.oracle.mu


def test_comparison_of_identical_variants(write_config, settings):
    """Test that equal variants give equal columns and means match the per-seed traces."""

    path = compare_study(write_config(COMPARE))
    out = path.parent
    rows = _read_csv(path)
    assert rows[0] == ["k", "a_mean", "a_std", "b_mean", "b_std"]
    assert [row[0] for row in rows[1:]] == ["0", "5", "10", "15", "20"]
    for row in rows[1:]:
        assert row[1:3] == row[3:5]
    seeds = [_read_csv(out / f"cmp-a_seed{seed}.csv")[1:] for seed in (0, 1)]
    for i, row in enumerate(rows[1:]):
        values = [float(trace[i][1]) for trace in seeds]
        assert float(row[1]) == pytest.approx(np.mean(values), rel=1e-12)
        assert float(row[2]) == pytest.approx(np.std(values), abs=1e-12)
    by_evals = _read_csv(out / "comparison_by_evals.csv")
    assert by_evals[0][0] == "evals"
    assert by_evals[1][0] == "0"
    summary = _read_csv(out / "summary.csv")
    assert len(summary) == 1 + 4


def test_comparison_needs_two_variants(write_config):
    text = SMOKE + "\n[variant.only]\nsolver.h1 = 1e-3\n"
    with pytest.raises(ConfigFileError):
        compare_study(write_config(text))


def test_mvi_study_with_candidate_file(write_config, tmp_path):
    (tmp_path / "candidate.csv").write_text("z_0,z_1\n9.0,9.0\n0.5,0.5\n")
    text = (
        "[experiment]\nname = orthant\noutput_dir = {tmp}/out\n\n"
        "[problem]\nkind = bilinear_orthant\n\n"
        "[solver]\nvariant = first_order_eg\nh1 = 0.01\niterations = 0\n\n"
        "[mvi]\ncandidate = candidate.csv\nh = 0.01\ncount = 200\ncovariance = 0.5\n"
    )
    result = mvi_study(write_config(text))
    np.testing.assert_array_equal(result.candidate, [0.5, 0.5])
    assert result.report.samples == 200
    assert result.histogram_path.exists()
    assert result.report_path.name == "mvi_report.json"
    assert (result.report_path.parent / "orthant_candidate.csv").exists()


def test_mvi_study_from_a_fresh_run(write_config):
    text = SMOKE + "\n[mvi]\ncandidate = run\nh = 0.01\ncount = 50\n"
    result = mvi_study(write_config(text))
    trace = _read_csv(result.report_path.parent / "smoke_seed0.csv")
    np.testing.assert_array_equal(result.candidate, [float(v) for v in trace[-1][4:]])
    assert result.report.samples == 50


def test_failed_run_leaves_partial_trace_and_marker(write_config):
    cliff = MinMaxProblem(
        name="cliff",
        n=1,
        m=1,
        objective=lambda Z: np.where(Z[:, 0] < -1.0, np.nan, Z[:, 0] - Z[:, 1]),
        gradient=lambda z: np.array([1.0, 1.0]),
        feasible_set=Unconstrained(2),
    )
    text = SMOKE.replace("variant = zoeg", "variant = first_order_eg").replace(
        "h1 = 2e-3\nh2 = 1e-3", "h1 = 0.5\nh2 = 0.5"
    )
    config = load_experiment(write_config(text)).base
    with pytest.raises(EvaluationError):
        run_config(config, built=BuiltProblem(cliff))
    out = config.output_dir
    assert len(_read_csv(out / "smoke_seed0.csv")) == 1 + 3
    assert (out / "smoke_seed0.error").read_text().startswith("EvaluationError")
    assert not (out / "summary.csv").exists()


def test_load_candidate_takes_the_last_numeric_row(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("# comment\nx,y,z\n1,2,3\n4,5,6\n")
    np.testing.assert_array_equal(load_candidate(path, 3), [4.0, 5.0, 6.0])
    with pytest.raises(DimensionMismatchError):
        load_candidate(path, 2)


def test_floats_are_written_with_repr():
    assert _fmt(np.float64(0.1)) == "0.1"
    assert _fmt(np.int64(7)) == "7"
    assert _fmt(None) == ""


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.ini")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    loaded = load_experiment(path)
    assert loaded.base.name == path.stem


def test_rerun_replaces_summary_rows(write_config, settings):
    path = write_config(SMOKE)
    run_experiment(path)
    result = run_experiment(path)
    assert len(_read_csv(result.output_dir / "summary.csv")) == 2
    out = compare_study(write_config(COMPARE, "cmp.ini")).parent
    compare_study(write_config(COMPARE, "cmp.ini"))
    assert len(_read_csv(out / "summary.csv")) == 1 + 4


def test_poisoning_summary_scores_holdout_samples(write_config):
    text = (
        "[experiment]\nname = poison\noutput_dir = {tmp}/out\n\n"
        "[problem]\nkind = poisoning\nholdout = 50\n\n"
        "[solver]\nh1 = 1e-3\niterations = 2\n"
    )
    result = run_experiment(write_config(text))
    summary = _read_csv(result.output_dir / "summary.csv")
    row = dict(zip(summary[0], summary[1], strict=True))
    assert 0.0 <= float(row["accuracy"]) <= 1.0
    assert 0.0 <= float(row["holdout_accuracy"]) <= 1.0
    assert result.rows[0].holdout_accuracy is not None


def test_holdout_needs_a_generated_dataset(write_config, tmp_path):
    (tmp_path / "data.csv").write_text("feature_0,label\n0.5,1\n-0.5,0\n")
    text = (
        "[experiment]\nname = poison\n\n"
        "[problem]\nkind = poisoning\ndataset = data.csv\nholdout = 10\n\n"
        "[solver]\nh1 = 1e-3\niterations = 1\n"
    )
    with pytest.raises(ConfigFileError) as exc:
        load_experiment(write_config(text))
    assert exc.value.field == "problem"


def test_b_study_uses_zoeg_and_the_five_metrics():
    loaded = load_experiment(CONFIG_DIR / "b_study.ini")
    solver = loaded.base.solver
    assert solver.variant == "zoeg"
    assert (solver.h1, solver.h2, solver.iterations) == (1e-5, 1e-5, 5000)
    assert solver.seeds == [0, 1, 2, 3, 4]
    assert loaded.base.oracle.mu == 1e-5
    assert set(loaded.variants) == {"b_10i", "b_01i", "b_random_diag", "b_half_split", "b_i"}
    problem = build_problem(loaded.base.problem).problem
    assert problem.dims == (250, 150)
    random_diag = build_metric(loaded.variants["b_random_diag"].metric, problem)
    entries = np.concatenate([np.diag(random_diag.b1), np.diag(random_diag.b2)])
    assert entries.min() >= 0.1
    assert entries.max() <= 10.0
    assert 10.0 < random_diag.kappa <= 100.0
    half = build_metric(loaded.variants["b_half_split"].metric, problem)
    assert half.kappa == pytest.approx(10.0)
    assert np.any(np.diag(half.b2) == 10.0)
    assert np.any(np.diag(half.b1) == 1.0)
