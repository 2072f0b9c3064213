"""Adaptive neural backstepping controllers for strict-feedback plants.

Finite-time and fixed-time variants with RBF approximators, smooth switching
to a robust law outside the approximation region, command filters with
compensation signals, and composite learning driven by a state predictor.
"""

from .config import ConfigError, ExperimentConfig, format_config, parse_config, parse_config_text
from .gains import ControllerVariant, GainSet, NeuralForm
from .learning import Timing
from .sim import RunMetrics, SimulationDiverged, TrajectoryLog, compare_runs, compute_metrics, run_experiment

__all__ = [
    "ConfigError",
    "ControllerVariant",
    "ExperimentConfig",
    "GainSet",
    "NeuralForm",
    "RunMetrics",
    "SimulationDiverged",
    "Timing",
    "TrajectoryLog",
    "compare_runs",
    "compute_metrics",
    "format_config",
    "parse_config",
    "parse_config_text",
    "run_experiment",
]
__version__ = "0.1.0"
