"""Scenario files, the three shipped experiments, sweeps and the command line."""

from .config import (ConfigError, ScenarioConfig, build_network, load_config, load_raw,
                     parse_config, without_load)
from .runner import ScenarioResult, apply_parameter, report, run_scenario, sweep, sweep_extrema

__all__ = [
    "apply_parameter",
    "build_network",
    "ConfigError",
    "load_config",
    "load_raw",
    "parse_config",
    "report",
    "run_scenario",
    "ScenarioConfig",
    "ScenarioResult",
    "sweep",
    "sweep_extrema",
    "without_load",
]
