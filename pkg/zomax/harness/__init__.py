from zomax.harness.config_file import LoadedConfig, load_experiment
from zomax.harness.experiments import (
    ExperimentResult,
    MviResult,
    compare_study,
    mvi_study,
    run_config,
    run_experiment,
)

__all__ = [
    "ExperimentResult",
    "LoadedConfig",
    "MviResult",
    "compare_study",
    "load_experiment",
    "mvi_study",
    "run_config",
    "run_experiment",
]
