"""Experiment orchestration: configs, trial runners, sweeps, and diagnostics."""

from .config import AgentConfig, ExperimentConfig, load_config, load_preset, preset_names
from .records import EpisodeRecord, aggregate, read_records, smooth_trailing, write_records
from .runner import run_experiment, run_trial
from .sweep import SweepRow, sweep_and_select

__all__ = [
    "AgentConfig",
    "EpisodeRecord",
    "ExperimentConfig",
    "SweepRow",
    "aggregate",
    "load_config",
    "load_preset",
    "preset_names",
    "read_records",
    "run_experiment",
    "run_trial",
    "smooth_trailing",
    "sweep_and_select",
    "write_records",
]
