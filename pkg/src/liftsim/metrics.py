"""Hub detection, infiltration accounting, convergence, aggregation, CSV IO.

A node id counts as a hub when it sits in the first h cache positions of at
least ceil(tau * n) of the n correct alive nodes. Byzantine caches never vote:
their contents are fabricated. Every cycle is measured at the configured
threshold and once more at a stricter fixed threshold so results can be read
side by side.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import Behavior, ScenarioConfig

#: Secondary vote threshold always reported alongside the configured one.
ALT_HUB_THRESHOLD = 0.9

RAW_HEADER = ["run", "cycle", "total_hubs", "byzantine_hubs", "correct_hubs",
              "converged", "mean_hub_indegree"]
AGG_HEADER = ["cycle", "metric", "mean", "std", "ci95", "runs"]


@dataclass(slots=True)
class CycleRecord:
    """One measured cycle of one run; the unit of raw CSV output.

    hub_ids and the *_alt fields ride along for analysis but are not part of
    the raw CSV schema.
    """

    run_index: int
    cycle: int
    total_hubs: int
    byzantine_hubs: int
    correct_hubs: int
    converged: bool
    mean_hub_indegree: float
    hub_ids: tuple[int, ...] = ()
    total_hubs_alt: int = 0
    byzantine_hubs_alt: int = 0
    correct_hubs_alt: int = 0


def vote_threshold(tau: float, n_correct_alive: int) -> int:
    return int(math.ceil(tau * n_correct_alive))


def prefix_votes(net, h: int) -> tuple[Counter, int]:
    """Count, per id, how many correct alive nodes hold it in their prefix."""
    votes: Counter = Counter()
    n_correct_alive = 0
    for node in net.nodes:
        if node.alive and node.behavior is Behavior.CORRECT:
            n_correct_alive += 1
            votes.update(node.cache[:h])
    return votes, n_correct_alive


def detect_hubs(net, h: int, tau: float) -> set[int]:
    """Ids present in the h-prefix of at least ceil(tau * correct-alive) correct
    alive nodes."""
    votes, n_correct_alive = prefix_votes(net, h)
    if n_correct_alive == 0:
        return set()
    threshold = vote_threshold(tau, n_correct_alive)
    return {entry for entry, count in votes.items() if count >= threshold}


def count_byzantine_hubs(hubs: Iterable[int], net) -> int:
    return sum(1 for entry in hubs if net.nodes[entry].behavior is not Behavior.CORRECT)


def mean_hub_indegree(net, hubs: set[int]) -> float:
    """Mean number of correct alive full-cache slots holding each hub id."""
    if not hubs:
        return 0.0
    total = 0
    for node in net.nodes:
        if node.alive and node.behavior is Behavior.CORRECT:
            for entry in node.cache:
                if entry in hubs:
                    total += 1
    return total / len(hubs)


def measure_cycle(net, cfg: ScenarioConfig, run_index: int, cycle: int) -> CycleRecord:
    """Build the record for the network's current state."""
    votes, n_correct_alive = prefix_votes(net, cfg.hubs)
    record = CycleRecord(
        run_index=run_index, cycle=cycle, total_hubs=0, byzantine_hubs=0,
        correct_hubs=0, converged=False, mean_hub_indegree=0.0,
    )
    if n_correct_alive == 0:
        return record

    thr_main = vote_threshold(cfg.hub_threshold, n_correct_alive)
    thr_alt = vote_threshold(ALT_HUB_THRESHOLD, n_correct_alive)
    hubs_main = {e for e, n in votes.items() if n >= thr_main}
    hubs_alt = {e for e, n in votes.items() if n >= thr_alt}

    byz_main = count_byzantine_hubs(hubs_main, net)
    byz_alt = count_byzantine_hubs(hubs_alt, net)
    record.total_hubs = len(hubs_main)
    record.byzantine_hubs = byz_main
    record.correct_hubs = len(hubs_main) - byz_main
    record.mean_hub_indegree = mean_hub_indegree(net, hubs_main)
    record.hub_ids = tuple(sorted(hubs_main))
    record.total_hubs_alt = len(hubs_alt)
    record.byzantine_hubs_alt = byz_alt
    record.correct_hubs_alt = len(hubs_alt) - byz_alt
    return record


def convergence_cycle(records: Sequence[CycleRecord], h: int) -> int | None:
    """First cycle whose hub set has size h and stays identical for the next
    three cycles; None if that never happens."""
    for i in range(len(records) - 3):
        if records[i].total_hubs != h:
            continue
        ids = records[i].hub_ids
        if all(records[i + k].hub_ids == ids for k in (1, 2, 3)):
            return records[i].cycle
    return None


def backfill_converged(records: Sequence[CycleRecord], h: int) -> int | None:
    """Set each record's converged flag to 'convergence reached by this cycle'."""
    conv = convergence_cycle(records, h)
    for record in records:
        record.converged = conv is not None and record.cycle >= conv
    return conv


# --- CSV emission ---------------------------------------------------------

def _alt_suffix() -> str:
    return f"tau{int(round(ALT_HUB_THRESHOLD * 100))}"


#: Metric-name -> record attribute, in aggregated-CSV row order.
AGG_METRICS = {
    "total_hubs": "total_hubs",
    "byzantine_hubs": "byzantine_hubs",
    "correct_hubs": "correct_hubs",
    "converged": "converged",
    "mean_hub_indegree": "mean_hub_indegree",
    f"total_hubs_{_alt_suffix()}": "total_hubs_alt",
    f"byzantine_hubs_{_alt_suffix()}": "byzantine_hubs_alt",
    f"correct_hubs_{_alt_suffix()}": "correct_hubs_alt",
}


def write_raw_csv(runs: Sequence[Sequence[CycleRecord]], path: str | Path) -> None:
    """One row per (run, cycle), sorted, with the exact raw schema."""
    ordered = sorted((rec for run in runs for rec in run),
                     key=lambda r: (r.run_index, r.cycle))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RAW_HEADER)
        for r in ordered:
            writer.writerow([
                r.run_index, r.cycle, r.total_hubs, r.byzantine_hubs,
                r.correct_hubs, int(r.converged), f"{r.mean_hub_indegree:.6f}",
            ])


def aggregate(runs: Sequence[Sequence[CycleRecord]]) -> list[tuple]:
    """Per-cycle mean/std/95% CI over runs for every metric.

    Returns (cycle, metric, mean, std, ci95, n_runs) tuples; std and ci95 are
    None when only one run exists. Run order does not matter.
    """
    if not runs:
        return []
    by_cycle: dict[int, list[CycleRecord]] = {}
    for run in runs:
        for rec in run:
            by_cycle.setdefault(rec.cycle, []).append(rec)
    rows: list[tuple] = []
    for cycle in sorted(by_cycle):
        group = by_cycle[cycle]
        n = len(group)
        for metric, attr in AGG_METRICS.items():
            values = [float(getattr(r, attr)) for r in group]
            mean = sum(values) / n
            if n >= 2:
                var = sum((v - mean) ** 2 for v in values) / (n - 1)
                std = math.sqrt(var)
                ci95 = 1.96 * std / math.sqrt(n)
            else:
                std = None
                ci95 = None
            rows.append((cycle, metric, mean, std, ci95, n))
    return rows


def write_agg_csv(rows: Sequence[tuple], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGG_HEADER)
        for cycle, metric, mean, std, ci95, n in rows:
            writer.writerow([
                cycle, metric, f"{mean:.10g}",
                "" if std is None else f"{std:.10g}",
                "" if ci95 is None else f"{ci95:.10g}",
                n,
            ])


def read_agg_csv(path: str | Path) -> list[dict]:
    """Read an aggregated CSV back into dict rows with numeric fields."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "cycle": int(row["cycle"]),
                "metric": row["metric"],
                "mean": float(row["mean"]),
                "std": float(row["std"]) if row["std"] else None,
                "ci95": float(row["ci95"]) if row["ci95"] else None,
                "runs": int(row["runs"]),
            })
    return out
