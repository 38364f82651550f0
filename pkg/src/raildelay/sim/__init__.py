"""Synthetic railway measurement campaigns in best-quality and packet-replication modes."""

from .config import (SCHEMA, config_digest, default_config_text, default_scenario,
                     dump_config, load_config, parse_config)
from .engine import SimulationResult, run_simulation, simulate
from .network import (CellSite, LinkState, OperatorNetwork, link_delay,
                      update_serving)
from .radio import path_rsrp
from .routing import RouterState, route_bq, route_pr
from .scenario import ScenarioConfig, ScenarioError, SiteLayout, Track, TrainRun

__all__ = [
    "CellSite", "LinkState", "OperatorNetwork", "RouterState", "SCHEMA",
    "ScenarioConfig", "ScenarioError", "SimulationResult", "SiteLayout", "Track",
    "TrainRun", "config_digest", "default_config_text", "default_scenario",
    "dump_config", "link_delay", "load_config", "parse_config", "path_rsrp",
    "route_bq", "route_pr", "run_simulation", "simulate", "update_serving",
]
