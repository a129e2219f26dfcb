"""End-to-end simulation orchestration."""

from pulseguard.scenario.spec import Scenario, load_scenario
from pulseguard.scenario.runner import run_scenario

__all__ = ["Scenario", "load_scenario", "run_scenario"]
