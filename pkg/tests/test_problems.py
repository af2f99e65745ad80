import numpy as np
import pytest
from scipy.stats import norm

from zomax.errors import ConfigurationError, DimensionMismatchError, EvaluationError
from zomax.geometry import MetricMatrix
from zomax.oracles import estimate_f_mu
from zomax.problems import (
    Ball,
    Box,
    CarInput,
    CarState,
    LaneMergingConfig,
    MinMaxProblem,
    NonnegativeOrthant,
    Product,
    Unconstrained,
    abs_diff_problem,
    ball_on_block,
    bilinear_problem,
    generate_dataset,
    lane_merging_problem,
    load_rls_instance,
    poisoning_problem,
    poisoning_problem_from_dataset,
    project,
    random_rls_problem,
    rk4_step,
    rls_problem,
    save_rls_instance,
    toy_f1,
    toy_f2,
    toy_f3,
)
from zomax.problems.lane_merging import stage_costs
from zomax.problems.toys import abs_diff_smoothed_operator, abs_diff_smoothed_value

IDENTITY = MetricMatrix.identity(1, 1)


def _fd_operator(problem: MinMaxProblem, z: np.ndarray) -> np.ndarray:
    step = 1e-6 * (1.0 + np.linalg.norm(z))
    offsets = step * np.eye(problem.d)
    plus = problem.evaluate_batch(z + offsets)
    minus = problem.evaluate_batch(z - offsets)
    grad = (plus - minus) / (2.0 * step)
    grad[problem.n :] *= -1.0
    return grad


def _feasible_points(problem: MinMaxProblem, rng, count: int, scale: float = 2.0):
    raw = scale * rng.standard_normal((count, problem.d))
    return problem.feasible_set.project(raw)


def test_projection_examples():
    """Test interior, box clamp and ball scaling projections."""

    box = toy_f2().feasible_set
    np.testing.assert_array_equal(project(box, [1.0, 1.0], IDENTITY), [1.0, 1.0])
    np.testing.assert_array_equal(project(box, [5.0, -7.0], IDENTITY), [3.0, -2.0])
    ball = ball_on_block("y", 1, 2, 5.0)
    projected = project(ball, [7.0, 6.0, 8.0], MetricMatrix.identity(1, 2))
    np.testing.assert_allclose(projected, [7.0, 3.0, 4.0])


def test_projection_needs_scalar_metric_on_constrained_blocks():
    box = Box.symmetric(1.0, 4)
    metric = MetricMatrix.diagonal([1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ConfigurationError):
        project(box, np.full(4, 3.0), metric)
    np.testing.assert_array_equal(project(box, np.full(4, 3.0), metric, euclidean=True), 1.0)
    free_x = ball_on_block("y", 2, 2, 1.0)
    project(free_x, np.full(4, 3.0), metric)


def test_projection_rejects_wrong_length():
    with pytest.raises(DimensionMismatchError):
        project(Box.symmetric(1.0, 2), [1.0, 2.0, 3.0], IDENTITY)


def test_projections_are_idempotent_and_non_expansive(rng):
    sets = [
        Box(np.array([-1.0, 0.0, -2.0]), np.array([1.0, 3.0, 2.0])),
        Ball(np.array([0.5, -0.5, 1.0]), 2.0),
        NonnegativeOrthant(3),
        Product((Ball(np.zeros(2), 1.0), Unconstrained(1))),
        Unconstrained(3),
    ]
    for feasible in sets:
        a = 3.0 * rng.standard_normal((1000, 3))
        b = 3.0 * rng.standard_normal((1000, 3))
        pa, pb = feasible.project(a), feasible.project(b)
        np.testing.assert_allclose(feasible.project(pa), pa, atol=1e-12)
        gap = np.linalg.norm(pa - pb, axis=1) - np.linalg.norm(a - b, axis=1)
        assert np.all(gap <= 1e-12)


def test_box_rejects_inverted_bounds():
    with pytest.raises(ConfigurationError):
        Box(np.array([1.0]), np.array([0.0]))
    with pytest.raises(ConfigurationError):
        Ball(np.zeros(2), 0.0)


def test_problem_checks_feasible_set_size():
    with pytest.raises(DimensionMismatchError):
        MinMaxProblem("bad", 1, 1, lambda Z: Z[:, 0], feasible_set=Unconstrained(3))


def test_non_finite_objective_raises():
    problem = MinMaxProblem("nan", 1, 1, lambda Z: np.full(len(Z), np.nan), Unconstrained(2))
    with pytest.raises(EvaluationError):
        problem.evaluate([0.0, 0.0])


def test_toy_f1_values():
    problem = toy_f1()
    assert problem.evaluate([0.0, 0.0]) == 0.0
    np.testing.assert_array_equal(problem.operator([0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(problem.start(), [5.0, -7.0])


def test_toy_f2_feasible_set_is_the_box():
    feasible = toy_f2().feasible_set
    np.testing.assert_array_equal(feasible.lower, [-3.0, -2.0])
    np.testing.assert_array_equal(feasible.upper, [3.0, 2.0])


def test_toy_f3_saddle_and_metadata():
    problem = toy_f3()
    assert problem.evaluate([1.0, -1.0]) == 0.0
    assert not problem.has_gradient
    assert problem.metadata.nonsmooth
    lower, upper = problem.metadata.lipschitz_box
    np.testing.assert_array_equal(lower, [-10.0, -10.0])
    np.testing.assert_array_equal(upper, [10.0, 10.0])
    # separable: min over x at the x kink, max over y at the y kink
    assert problem.evaluate([1.2, -1.0]) > 0.0
    assert problem.evaluate([1.0, -0.8]) < 0.0


@pytest.mark.parametrize(
    "problem",
    [
        toy_f1(),
        toy_f2(),
        bilinear_problem(),
        random_rls_problem(6, 4, 2.0, seed=3),
        poisoning_problem_from_dataset(generate_dataset(1, n_samples=60, n_features=5)),
    ],
    ids=lambda p: p.name,
)
def test_analytic_gradient_matches_finite_differences(problem, rng):
    """Test F against central differences at feasible points."""

    for z in _feasible_points(problem, rng, 100, scale=1.0):
        np.testing.assert_allclose(
            problem.operator(z), _fd_operator(problem, z), rtol=1e-4, atol=1e-5
        )


def test_rls_small_instances():
    zero = rls_problem(np.zeros((2, 2)), np.zeros(2), 5.0)
    z = np.array([0.3, -0.2, 1.0, 2.0])
    assert zero.evaluate(z) == pytest.approx(5.0)
    np.testing.assert_allclose(zero.operator(z), [0.0, 0.0, -2.0, -4.0])
    exact = rls_problem(np.eye(2), np.array([1.0, 0.0]), 5.0)
    assert exact.evaluate([1.0, 0.0, 0.0, 0.0]) == 0.0


def test_rls_checks_inputs():
    with pytest.raises(DimensionMismatchError):
        rls_problem(np.zeros((3, 2)), np.zeros(2), 1.0)
    with pytest.raises(ConfigurationError):
        rls_problem(np.zeros((2, 2)), np.zeros(2), 0.0)


def test_rls_problem_layout():
    problem = random_rls_problem(15, 25, 5.0, seed=0)
    assert problem.dims == (25, 15)
    assert problem.contains(problem.start())
    assert problem.is_constrained


def test_rls_instance_file_round_trip(tmp_path):
    A = np.arange(6.0).reshape(3, 2) / 7.0
    y0 = np.array([0.1, -0.2, 0.3])
    A_loaded, y0_loaded = load_rls_instance(save_rls_instance(tmp_path / "rls.csv", A, y0))
    np.testing.assert_array_equal(A_loaded, A)
    np.testing.assert_array_equal(y0_loaded, y0)


def test_poisoning_dataset_shape():
    problem, dataset = poisoning_problem(seed=0)
    assert dataset.features.shape == (500, 20)
    assert set(np.unique(dataset.labels)) <= {0.0, 1.0}
    assert dataset.poisoned_count == 75
    assert problem.dims == (20, 20)
    assert problem.contains(problem.start())


def test_poisoning_without_perturbation_is_plain_regularized_loss():
    """Test that x = 0 leaves the regularized cross-entropy of both parts."""

    dataset = generate_dataset(2)
    problem = poisoning_problem_from_dataset(dataset, lam=1e-3)
    y = np.random.default_rng(0).standard_normal(20) * 0.1

    def loss(features, labels):
        s = features @ y
        return np.mean(np.logaddexp(0.0, s) - labels * s)

    expected = -(loss(*dataset.poisoned) + loss(*dataset.clean) + 1e-3 * y @ y)
    assert problem.evaluate(np.concatenate([np.zeros(20), y])) == pytest.approx(expected)


def test_poisoning_perturbation_box():
    problem = poisoning_problem_from_dataset(generate_dataset(0), zeta=10.0)
    z = np.concatenate([np.full(20, 12.0), np.full(20, 50.0)])
    projected = problem.feasible_set.project(z)
    np.testing.assert_array_equal(projected[:20], 10.0)
    np.testing.assert_array_equal(projected[20:], 50.0)


def test_reference_model_beats_chance():
    dataset = generate_dataset(0)
    assert dataset.accuracy(dataset.fit_reference_model()) > 0.5


def test_holdout_samples_are_drawn_after_the_training_set():
    plain = generate_dataset(0)
    dataset = generate_dataset(0, n_holdout=200)
    np.testing.assert_array_equal(dataset.features, plain.features)
    np.testing.assert_array_equal(dataset.labels, plain.labels)
    assert dataset.holdout_features.shape == (200, 20)
    assert plain.holdout_accuracy(np.ones(20)) is None
    assert dataset.holdout_accuracy(dataset.fit_reference_model()) > 0.8


def test_poisoning_dataset_csv_round_trip(tmp_path):
    dataset = generate_dataset(4, n_samples=40, n_features=3)
    loaded = type(dataset).load_csv(dataset.save_csv(tmp_path / "data.csv"))
    np.testing.assert_array_equal(loaded.features, dataset.features)
    np.testing.assert_array_equal(loaded.labels, dataset.labels)
    assert loaded.poisoned_count == dataset.poisoned_count


def test_rk4_step_examples():
    """Test rest, constant speed and constant acceleration steps."""

    rest = CarState(1.0, 2.0, 0.3, 0.0)
    assert rk4_step(rest, (CarInput(0.0, 0.0), CarInput(0.0, 0.0)), 0.4) == rest

    cruising = rk4_step(CarState(0.0, 0.0, 0.0, 2.0), (CarInput(0.0, 0.0),) * 2, 0.4)
    assert cruising.x == pytest.approx(0.8)
    assert (cruising.y, cruising.theta, cruising.v) == (0.0, 0.0, 2.0)

    accelerating = rk4_step(CarState(0.0, 0.0, 0.0, 0.0), (CarInput(1.0, 0.0),) * 2, 1.0)
    assert accelerating.v == pytest.approx(1.0)
    assert accelerating.x == pytest.approx(0.5)


def test_rk4_step_rejects_bad_step():
    with pytest.raises(ValueError):
        rk4_step(CarState(0.0, 0.0, 0.0, 1.0), (CarInput(0.0, 0.0),) * 2, 0.0)


def test_rk4_is_fourth_order():
    """Test that halving dt cuts the one-step error by at least 14."""

    state = np.array([0.0, 0.0, 0.2, 3.0])

    def control(t):
        return np.array([1.0 + 0.5 * t, 0.3 - 0.2 * t])

    def reference(dt):
        s = state.copy()
        substeps = 100
        h = dt / substeps
        for i in range(substeps):
            s = rk4_step(s, (control(i * h), control((i + 1) * h)), h)
        return s

    def one_step_error(dt):
        step = rk4_step(state, (control(0.0), control(dt)), dt)
        return np.linalg.norm(step - reference(dt))

    assert one_step_error(0.5) / one_step_error(0.25) >= 14.0


def test_lane_merging_dimensions_and_reproducibility():
    problem = lane_merging_problem()
    assert problem.dims == (100, 50)
    z = problem.start()
    first = problem.evaluate(z)
    assert np.isfinite(first)
    assert problem.evaluate(z) == first
    parts = problem.components(z)
    assert parts["gamma1"] + parts["gamma2"] == pytest.approx(first)


def test_lane_merging_box_bounds():
    config = LaneMergingConfig(horizon=20.0, control_points=20)
    problem = lane_merging_problem(config)
    assert config.dt == pytest.approx(1.0)
    projected = problem.feasible_set.project(np.full(60, 9.0))
    np.testing.assert_array_equal(projected[:20], 3.0)
    np.testing.assert_array_equal(projected[20:40], 0.5)
    np.testing.assert_array_equal(projected[40:], 3.0)


def test_lane_merging_proximity_decreases_with_distance():
    s1 = np.array([0.0, 5.0, 0.0, 2.0])
    near = np.array([1.0, 4.0, 0.0, 3.0])
    far = s1 + 2.0 * (near - s1)
    g1_near, g2_near = stage_costs(s1, near, 5.0)
    g1_far, g2_far = stage_costs(s1, far, 5.0)
    # car 1 gains less from proximity, car 2 is penalized less
    assert g1_far > g1_near
    assert g2_far - 10.0 * (far[1] - 5.0) ** 2 < g2_near - 10.0 * (near[1] - 5.0) ** 2


def test_lane_merging_config_rejects_empty_box():
    with pytest.raises(ValueError):
        LaneMergingConfig(accel_bounds=(1.0, -1.0))


def test_abs_diff_smoothed_operator_values():
    np.testing.assert_allclose(abs_diff_smoothed_operator(np.zeros(2), 0.1), [0.0, 0.0])
    assert abs_diff_smoothed_operator([0.1, 0.0], 0.1)[0] == pytest.approx(0.682689, abs=1e-6)
    assert abs_diff_smoothed_operator([50.0, 0.0], 0.1)[0] == pytest.approx(1.0)
    sigma = 2.0
    x = 0.1 * sigma
    expected = 1.0 - 2.0 * norm.cdf(-1.0)
    assert abs_diff_smoothed_operator([x, 0.0], 0.1, sigma)[0] == pytest.approx(expected)


def test_abs_diff_smoothed_value_matches_monte_carlo(rng):
    problem = abs_diff_problem()
    z = np.array([0.05, -0.02])
    mean, se = estimate_f_mu(problem, z, 0.1, 500_000, rng)
    assert abs(mean - abs_diff_smoothed_value(z, 0.1)) <= 4 * se


def test_abs_diff_problem_metric_follows_sigma():
    problem = abs_diff_problem(sigma=2.0)
    assert problem.metadata.metric.lambda_max == pytest.approx(0.25)
    np.testing.assert_allclose(problem.smoothed_operator(np.zeros(2), 0.1), [0.0, 0.0])
