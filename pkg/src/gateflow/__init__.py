"""Agent-based simulator of reversing pedestrian flow in a corridor
with a closable gate: social groups led by a leader walk towards the
gate, stall against the crowd, and decide to queue or turn back; fixed
probes record densities and a brute-force sweep searches control-point
placements that keep the peak density down.
"""

from .model import (
    Agent,
    Cip,
    ConfigError,
    Geometry,
    Group,
    ModelParams,
    Scenario,
    Status,
    default_repulsion_matrix,
    default_scenario,
)
from .engine import NumericError, RunResult, run

__all__ = [
    "Agent",
    "Cip",
    "ConfigError",
    "Geometry",
    "Group",
    "ModelParams",
    "NumericError",
    "RunResult",
    "Scenario",
    "Status",
    "default_repulsion_matrix",
    "default_scenario",
    "run",
]

__version__ = "0.1.0"
