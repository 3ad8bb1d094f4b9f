"""Experiment configuration, Monte Carlo runner and CLI."""
from .config import PRESETS, ExperimentConfig, build_config, parse_config_text, preset_config
from .runner import RunResult, collect, dump_replicate, replicate_rows, run_experiment, simulate_path

__all__ = ["PRESETS", "ExperimentConfig", "build_config", "parse_config_text", "preset_config",
           "RunResult", "collect", "dump_replicate", "replicate_rows", "run_experiment", "simulate_path"]
