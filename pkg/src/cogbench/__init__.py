"""Cognitive-radio test bench: simulation harness and factor extraction."""

from .analysis import AnalysisOptions, analyze_performance, write_analysis
from .config import RunConfig
from .factors import correlation, extract, factor_scores, pca, varimax
from .harness import (
    MetricsTriple,
    PerformanceMatrix,
    read_performance_csv,
    run_cell,
    run_grid,
    write_performance_csv,
)
from .policies import Decision, Observation, PolicyKind, PolicyParams, make_policy
from .radio import RadioSpec, SlotOutcome, enumerate_grid, run_slot
from .scenarios import build_default_scenarios, load_default_scenarios, load_scenarios
from .spectrum import ChannelParams, ChannelState, PuActivityModel, Scenario

__version__ = "0.1.0"

__all__ = [
    "AnalysisOptions",
    "ChannelParams",
    "ChannelState",
    "Decision",
    "MetricsTriple",
    "Observation",
    "PerformanceMatrix",
    "PolicyKind",
    "PolicyParams",
    "PuActivityModel",
    "RadioSpec",
    "RunConfig",
    "Scenario",
    "SlotOutcome",
    "analyze_performance",
    "build_default_scenarios",
    "correlation",
    "enumerate_grid",
    "extract",
    "factor_scores",
    "load_default_scenarios",
    "load_scenarios",
    "make_policy",
    "pca",
    "read_performance_csv",
    "run_cell",
    "run_grid",
    "run_slot",
    "varimax",
    "write_analysis",
    "write_performance_csv",
]
