"""Discrete-event simulator of policy-distribution consistency in
hierarchical data centres."""

from .config import (
    ChangeMode,
    ProtocolKind,
    SimulationConfig,
    TopologyKind,
    generate_sweep,
    parse_config,
    render_config,
)
from .engine import World, initialize, run
from .stats import ProbeRecord

__version__ = "0.1.0"

__all__ = [
    "ChangeMode",
    "ProbeRecord",
    "ProtocolKind",
    "SimulationConfig",
    "TopologyKind",
    "World",
    "generate_sweep",
    "initialize",
    "parse_config",
    "render_config",
    "run",
    "__version__",
]
