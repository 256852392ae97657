"""Discrete-event MANET simulator comparing AODV, DSR and DSDV under six
propagation models."""

from .config import ConfigError, ScenarioConfig, parse_scenario
from .metrics import CSV_COLUMNS, MetricsLedger
from .network import Network
from .scenario import Grid, run_scenario, sweep

__all__ = ["ConfigError", "ScenarioConfig", "parse_scenario", "CSV_COLUMNS",
           "MetricsLedger", "Network", "Grid", "run_scenario", "sweep"]
__version__ = "0.1.0"
