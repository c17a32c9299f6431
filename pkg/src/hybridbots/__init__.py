"""Agent-based simulation of hybrid social bot networks on a microblogging platform."""

from .config import RunConfig, load_config, parse_config
from .engine import Engine, EventRecord, SimulationError
from .platform import Archetype, ContentDescriptor, Platform, PostKind
from .world import Simulation

__version__ = "0.1.0"

__all__ = [
    "Archetype",
    "ContentDescriptor",
    "Engine",
    "EventRecord",
    "Platform",
    "PostKind",
    "RunConfig",
    "Simulation",
    "SimulationError",
    "load_config",
    "parse_config",
]
