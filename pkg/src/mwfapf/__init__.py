"""Hybrid potential-field / wall-following navigation with trajectory memory, in a 2D simulator."""

from .scenarios import Scenario, builtin_scenario, builtin_scenarios, detect_cycle, load_scenario
from .sim import Outcome, Params, RunResult, clearance, run
from .supervisor import Mode, Policy
from .world import ConfigError, World

__all__ = [
    "ConfigError",
    "Mode",
    "Outcome",
    "Params",
    "Policy",
    "RunResult",
    "Scenario",
    "World",
    "builtin_scenario",
    "builtin_scenarios",
    "clearance",
    "detect_cycle",
    "load_scenario",
    "run",
]
