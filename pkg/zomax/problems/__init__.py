from zomax.problems.base import (
    Ball,
    Box,
    FeasibleSet,
    MinMaxProblem,
    NonnegativeOrthant,
    ProblemMetadata,
    Product,
    Unconstrained,
    ball_on_block,
    project,
)
from zomax.problems.lane_merging import (
    CarInput,
    CarState,
    LaneMergingConfig,
    lane_merging_problem,
    rk4_step,
)
from zomax.problems.poisoning import (
    PoisoningDataset,
    generate_dataset,
    poisoning_problem,
    poisoning_problem_from_dataset,
)
from zomax.problems.rls import (
    load_rls_instance,
    random_rls_problem,
    rls_problem,
    save_rls_instance,
)
from zomax.problems.toys import (
    abs_diff_problem,
    bilinear_problem,
    linear_problem,
    quadratic_problem,
    toy_f1,
    toy_f2,
    toy_f3,
)

__all__ = [
    "Ball",
    "Box",
    "CarInput",
    "CarState",
    "FeasibleSet",
    "LaneMergingConfig",
    "MinMaxProblem",
    "NonnegativeOrthant",
    "PoisoningDataset",
    "ProblemMetadata",
    "Product",
    "Unconstrained",
    "abs_diff_problem",
    "ball_on_block",
    "bilinear_problem",
    "generate_dataset",
    "lane_merging_problem",
    "linear_problem",
    "load_rls_instance",
    "poisoning_problem",
    "poisoning_problem_from_dataset",
    "project",
    "quadratic_problem",
    "random_rls_problem",
    "rk4_step",
    "rls_problem",
    "save_rls_instance",
    "toy_f1",
    "toy_f2",
    "toy_f3",
]
