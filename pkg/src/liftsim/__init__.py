"""Deterministic simulator of hub-sampling gossip under Byzantine attack,
with a one-shot deterministic hub-redistribution countermeasure."""

from .adversary import (
    ByzantineRoster,
    coordinated_response,
    noncoord_response,
    passive_response,
    respond,
)
from .elevator import CacheResponse, elevator_step, handle_cache_request
from .engine import Network, RunResult, init_kout, run_cycle, run_scenario, run_single
from .lift import SharedPrng, bounded_draw, derive_seed, extract_hub_ids, lift_redistribute
from .metrics import (
    CycleRecord,
    aggregate,
    convergence_cycle,
    count_byzantine_hubs,
    detect_hubs,
    measure_cycle,
)
from .model import (
    Behavior,
    ConfigError,
    NodeState,
    ScenarioConfig,
    load_config,
    validate_config,
)
from .presets import CATALOG, ScenarioCatalogEntry
from .rng import RunRng, Stream

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "ByzantineRoster",
    "CATALOG",
    "CacheResponse",
    "ConfigError",
    "CycleRecord",
    "Network",
    "NodeState",
    "RunResult",
    "RunRng",
    "ScenarioCatalogEntry",
    "ScenarioConfig",
    "SharedPrng",
    "Stream",
    "aggregate",
    "bounded_draw",
    "convergence_cycle",
    "coordinated_response",
    "count_byzantine_hubs",
    "derive_seed",
    "detect_hubs",
    "elevator_step",
    "extract_hub_ids",
    "handle_cache_request",
    "init_kout",
    "lift_redistribute",
    "load_config",
    "measure_cycle",
    "noncoord_response",
    "passive_response",
    "respond",
    "run_cycle",
    "run_scenario",
    "run_single",
    "validate_config",
]
