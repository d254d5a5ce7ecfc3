"""Experiment configs, the training driver, metrics, statistics and the CLI."""
from .config import (
    ExperimentConfig,
    RunConfig,
    config_from_dict,
    load_config,
    load_preset,
    preset_names,
    with_overrides,
)
from .metrics import CoverageTracker, MetricsLog, coverage, emit_heatmap, read_heatmap_csv, read_pgm
from .probe import ProbeReport, goal_directing_probe, probe_prior, salesman_field
from .report import format_report, report_rows
from .runner import ExperimentResult, SeedResult, build_agent, build_env, evaluate, run_experiment, run_seed
from .stats import intervals_overlap, iqm, stratified_bootstrap_ci

__all__ = [
    "CoverageTracker", "ExperimentConfig", "ExperimentResult", "MetricsLog", "ProbeReport",
    "RunConfig", "SeedResult", "build_agent", "build_env", "config_from_dict", "coverage",
    "emit_heatmap", "evaluate", "format_report", "goal_directing_probe", "intervals_overlap",
    "iqm", "load_config", "load_preset", "preset_names", "probe_prior", "read_heatmap_csv",
    "read_pgm", "report_rows", "run_experiment", "run_seed", "salesman_field",
    "stratified_bootstrap_ci", "with_overrides",
]
