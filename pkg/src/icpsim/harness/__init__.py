from .cli import main
from .config import (ENVIRONMENTS, ExperimentConfig, build_env, load_config,
                     parse_config, validate_pipeline)
from .runner import (CURVE_HEADER, RunSummary, SeedRow, load_summary,
                     run_experiment, run_pipeline_seed, write_curve,
                     write_summary)

__all__ = [
    "main",
    "ENVIRONMENTS", "ExperimentConfig", "build_env", "load_config",
    "parse_config", "validate_pipeline",
    "CURVE_HEADER", "RunSummary", "SeedRow", "load_summary",
    "run_experiment", "run_pipeline_seed", "write_curve", "write_summary",
]
