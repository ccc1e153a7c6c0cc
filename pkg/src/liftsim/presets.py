"""Predefined scenario catalog.

Each entry pins the exact parameters of one published experiment figure so a
scenario is reproducible with a single --preset flag (the seed is still the
caller's choice). fig2 covers the single self-promoting attacker; fig2b is the
single silent attacker from the same experiment pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import DEFAULT_LIFT_CYCLE, ScenarioConfig


@dataclass(slots=True, frozen=True)
class ScenarioCatalogEntry:
    name: str
    cfg: ScenarioConfig
    figure: str


def _base(**kw) -> ScenarioConfig:
    defaults = dict(
        n_nodes=1000, cache_size=20, hubs=10,
        byzantine_fraction=0.0, attack="none", lift_cycle=0,
        cycles=1000, runs=100, seed=0, hub_threshold=0.5,
    )
    defaults.update(kw)
    return ScenarioConfig(**defaults)


CATALOG: dict[str, ScenarioCatalogEntry] = {
    entry.name: entry
    for entry in [
        ScenarioCatalogEntry("fig1", _base(), "clean run, no attack"),
        ScenarioCatalogEntry(
            "fig2", _base(attack="active", byzantine_fraction=0.001),
            "single self-promoting attacker"),
        ScenarioCatalogEntry(
            "fig2b", _base(attack="passive", byzantine_fraction=0.001),
            "single silent attacker"),
        ScenarioCatalogEntry(
            "fig3", _base(attack="coordinated", byzantine_fraction=0.01),
            "coordinated attack, 1%"),
        ScenarioCatalogEntry(
            "fig4", _base(attack="coordinated", byzantine_fraction=0.02),
            "coordinated attack, 2% (capture threshold)"),
        ScenarioCatalogEntry(
            "fig5", _base(attack="coordinated", byzantine_fraction=0.05),
            "coordinated attack, 5% (full capture)"),
        ScenarioCatalogEntry(
            "fig6", _base(attack="coordinated", byzantine_fraction=0.05,
                          lift_cycle=DEFAULT_LIFT_CYCLE),
            "redistribution vs 5% coordinated"),
        ScenarioCatalogEntry(
            "fig7", _base(attack="coordinated", byzantine_fraction=0.10,
                          lift_cycle=DEFAULT_LIFT_CYCLE),
            "redistribution vs 10% coordinated"),
        ScenarioCatalogEntry(
            "fig8", _base(attack="coordinated", byzantine_fraction=0.15,
                          lift_cycle=DEFAULT_LIFT_CYCLE),
            "redistribution vs 15% coordinated"),
        ScenarioCatalogEntry(
            "fig9", _base(attack="noncoord", byzantine_fraction=0.05),
            "uncoordinated attack, 5%"),
    ]
}
