"""Simulation harness: scenarios, adversaries, execution, and transcripts."""

from .adversary import Context, Strategy, equivocation_against, make_strategy
from .harness import ExecutionResult, Outcome, PartyStats, run, surviving_sum
from .scenario import (
    Scenario,
    ScenarioError,
    load_config,
    sample_corruptions_and_dropouts,
    scenario_from_config,
)
from .transcript import Transcript

__all__ = [
    "Context",
    "ExecutionResult",
    "Outcome",
    "PartyStats",
    "Scenario",
    "ScenarioError",
    "Strategy",
    "Transcript",
    "equivocation_against",
    "load_config",
    "make_strategy",
    "run",
    "sample_corruptions_and_dropouts",
    "scenario_from_config",
    "surviving_sum",
]
