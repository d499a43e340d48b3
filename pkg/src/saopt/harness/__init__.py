"""Experiment orchestration: main loops, call accounting, export and CLI."""

from .config import ExperimentConfig, load_config, save_config
from .loops import (
    GenerationRecord,
    RunResult,
    holdout_sets,
    run_direct_baseline,
    run_experiment,
    run_sa_ga,
    run_sa_nsga,
    run_single,
)
from .problems import Problem, make_problem
from .report import SpeedupReport, compute_speedup, export_results, read_numeric_csv, union_reference_front
