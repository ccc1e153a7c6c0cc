"""Core domain model: node identity, caches, behaviors, scenario configuration.

A NodeId is a plain int in [0, N); identities are assigned once at network
initialization and never change. A cache is an ordered, bounded, duplicate-free
list of NodeIds (self-references allowed). Frequency maps are collections.Counter
instances keyed by NodeId.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

MASK64 = (1 << 64) - 1

#: Conventional activation cycle for the hub-redistribution countermeasure.
DEFAULT_LIFT_CYCLE = 100


class Behavior(enum.IntEnum):
    """Fixed per-node behavior for the whole run."""

    CORRECT = 0
    PASSIVE_BYZANTINE = 1
    ACTIVE_BYZANTINE = 2       # single self-promoting attacker
    NONCOORD_BYZANTINE = 3     # self-promoting, unaware of other attackers
    COORD_BYZANTINE = 4        # shares the full attacker roster


#: Config-file / CLI attack names -> Byzantine behavior assigned to the B nodes.
ATTACKS: dict[str, Behavior | None] = {
    "none": None,
    "passive": Behavior.PASSIVE_BYZANTINE,
    "active": Behavior.ACTIVE_BYZANTINE,
    "noncoord": Behavior.NONCOORD_BYZANTINE,
    "coordinated": Behavior.COORD_BYZANTINE,
}


class ConfigError(ValueError):
    """A scenario configuration violates a structural constraint."""


@dataclass(slots=True)
class NodeState:
    """Per-node protocol state.

    backward_peers records every requester that ever contacted this node, with
    multiplicity and without bound; entry order carries no meaning.
    """

    id: int
    cache: list[int]
    backward_peers: list[int] = field(default_factory=list)
    behavior: Behavior = Behavior.CORRECT
    alive: bool = True

    @property
    def correct(self) -> bool:
        return self.behavior is Behavior.CORRECT


@dataclass(slots=True, frozen=True)
class ScenarioConfig:
    """Full description of one experiment scenario."""

    n_nodes: int
    cache_size: int
    hubs: int
    byzantine_fraction: float = 0.0
    attack: str = "none"
    lift_cycle: int = 0          # 0 disables redistribution
    cycles: int = 1000
    runs: int = 100
    seed: int = 0
    hub_threshold: float = 0.5
    # Intra-cycle semantics: "current" lets responses observe caches already
    # updated earlier in the same cycle; "snapshot" answers from cycle-start
    # caches (sensitivity switch, not a config-file key).
    intra_cycle: str = "current"

    @property
    def n_byzantine(self) -> int:
        return int(round(self.byzantine_fraction * self.n_nodes))

    @property
    def byzantine_behavior(self) -> Behavior | None:
        return ATTACKS[self.attack]


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return cfg unchanged if every structural constraint holds.

    Raises ConfigError naming the first violated constraint.
    """
    if cfg.n_nodes < 1:
        raise ConfigError(f"nodes must be >= 1 (got {cfg.n_nodes})")
    if cfg.cache_size < 1:
        raise ConfigError(f"cache_size must be >= 1 (got {cfg.cache_size})")
    if cfg.hubs < 1:
        raise ConfigError(f"hubs must be >= 1 (got {cfg.hubs})")
    if cfg.hubs >= cfg.cache_size:
        raise ConfigError(f"h < c violated: hubs={cfg.hubs} >= cache_size={cfg.cache_size}")
    if cfg.cache_size > cfg.n_nodes:
        raise ConfigError(
            f"cache exceeds network: cache_size={cfg.cache_size} > nodes={cfg.n_nodes}"
        )
    if not 0.0 <= cfg.byzantine_fraction < 1.0:
        raise ConfigError(
            f"byzantine_fraction must be in [0, 1) (got {cfg.byzantine_fraction})"
        )
    if cfg.n_byzantine >= cfg.n_nodes:
        raise ConfigError(
            f"byzantine count must stay below network size "
            f"(fraction {cfg.byzantine_fraction} of {cfg.n_nodes} rounds to {cfg.n_byzantine})"
        )
    if cfg.attack not in ATTACKS:
        raise ConfigError(f"unknown attack {cfg.attack!r} (choose from {sorted(ATTACKS)})")
    if cfg.attack == "none" and cfg.n_byzantine > 0:
        raise ConfigError("attack=none requires byzantine_fraction to round to 0 nodes")
    if cfg.attack != "none" and cfg.n_byzantine == 0:
        raise ConfigError(
            f"attack={cfg.attack} needs at least one byzantine node "
            f"(fraction {cfg.byzantine_fraction} of {cfg.n_nodes} rounds to 0)"
        )
    if cfg.lift_cycle < 0:
        raise ConfigError(f"lift_cycle must be >= 0 (got {cfg.lift_cycle})")
    if cfg.cycles < 1:
        raise ConfigError(f"cycles must be >= 1 (got {cfg.cycles})")
    if cfg.runs < 1:
        raise ConfigError(f"runs must be >= 1 (got {cfg.runs})")
    if not 0.0 < cfg.hub_threshold <= 1.0:
        raise ConfigError(f"hub_threshold must be in (0, 1] (got {cfg.hub_threshold})")
    if cfg.intra_cycle not in ("current", "snapshot"):
        raise ConfigError(f"intra_cycle must be 'current' or 'snapshot' (got {cfg.intra_cycle})")
    return cfg


# Config files are plain key=value lines; these are the exact recognized keys.
_CONFIG_KEYS = {
    "nodes": ("n_nodes", int),
    "cache_size": ("cache_size", int),
    "hubs": ("hubs", int),
    "byzantine_fraction": ("byzantine_fraction", float),
    "attack": ("attack", str),
    "lift_cycle": ("lift_cycle", int),
    "cycles": ("cycles", int),
    "runs": ("runs", int),
    "seed": ("seed", int),
    "hub_threshold": ("hub_threshold", float),
}


def parse_config_text(text: str) -> dict:
    """Parse key=value configuration text into ScenarioConfig field values.

    Blank lines and lines starting with '#' are ignored. Unknown keys are an
    error: silently dropping a typoed key would silently change an experiment.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        attr, conv = _CONFIG_KEYS[key]
        try:
            values[attr] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return values


def load_config(path: str | Path, **overrides) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a file plus keyword overrides."""
    values = parse_config_text(Path(path).read_text())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return validate_config(ScenarioConfig(**values))


def config_to_text(cfg: ScenarioConfig) -> str:
    """Serialize a config back to the key=value format (round-trippable)."""
    lines = []
    for key, (attr, _) in _CONFIG_KEYS.items():
        lines.append(f"{key}={getattr(cfg, attr)}")
    return "\n".join(lines) + "\n"


def assert_cache_ok(cache: list[int], capacity: int, n_nodes: int) -> None:
    """Raise AssertionError unless cache respects the structural invariants."""
    assert len(cache) <= capacity, f"cache over capacity: {len(cache)} > {capacity}"
    assert len(set(cache)) == len(cache), f"duplicate entries in cache: {cache}"
    for entry in cache:
        assert 0 <= entry < n_nodes, f"entry {entry} outside [0, {n_nodes})"


__all__ = [
    "Behavior",
    "ATTACKS",
    "ConfigError",
    "NodeState",
    "ScenarioConfig",
    "DEFAULT_LIFT_CYCLE",
    "validate_config",
    "parse_config_text",
    "load_config",
    "config_to_text",
    "assert_cache_ok",
]
