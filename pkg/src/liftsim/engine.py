"""Deterministic cycle-driven scheduler.

One run is single-threaded: nodes take their active steps in a fresh random
permutation each cycle, responses are answered from responders' current state
(or from a cycle-start snapshot under snapshot semantics), and a node's new
cache is installed as soon as its own step finishes. Hub redistribution, when
configured, happens at the top of its activation cycle against the pre-cycle
state, before any step of that cycle runs.

Records are indexed so that cycle 0 is the freshly initialized network and
cycle k (k >= 1) is the state after the k-th executed cycle; a run configured
for `cycles` therefore executes cycles 1 .. cycles-1 and yields exactly
`cycles` records.

Two interchangeable executors exist: this module's readable reference loop and
a compiled fast path (fastpath module) that reproduces it bit for bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

from .adversary import ByzantineRoster, respond
from .elevator import elevator_step
from .lift import lift_redistribute
from .metrics import CycleRecord, backfill_converged, measure_cycle
from .model import Behavior, NodeState, ScenarioConfig, validate_config
from .rng import RunRng


@dataclass(slots=True)
class Network:
    """All node states of one run plus the completed-cycle counter."""

    nodes: list[NodeState]
    roster: ByzantineRoster | None = None
    cycle: int = 0

    @property
    def n(self) -> int:
        return len(self.nodes)

    def liveness(self, node_id: int) -> bool:
        return self.nodes[node_id].alive

    def caches(self) -> list[list[int]]:
        return [list(node.cache) for node in self.nodes]


@dataclass(slots=True)
class RunResult:
    """Everything one run produces."""

    run_index: int
    records: list[CycleRecord]
    convergence_cycle: int | None
    final_caches: list[list[int]]
    trace: list[list[list[int]]] | None = None


def init_kout(cfg: ScenarioConfig, rng: RunRng) -> Network:
    """Random k-out start (k = cache size): every node begins with c distinct
    uniformly random ids (itself allowed); Byzantine nodes are placed uniformly
    at random, independently of id."""
    ids = list(range(cfg.n_nodes))
    nodes = [
        NodeState(id=i, cache=rng.engine.sample(ids, cfg.cache_size))
        for i in range(cfg.n_nodes)
    ]
    roster = None
    n_byz = cfg.n_byzantine
    if n_byz > 0:
        byz_behavior = cfg.byzantine_behavior
        members = sorted(rng.engine.sample(ids, n_byz))
        for entry in members:
            nodes[entry].behavior = byz_behavior
        roster = ByzantineRoster(members=tuple(members))
    return Network(nodes=nodes, roster=roster)


def _apply_lift(net: Network, cfg: ScenarioConfig, rng: RunRng) -> None:
    """Redistribute hubs for every correct alive node, atomically.

    Each node reads only its own cache prefix, so per-node computation against
    the live network equals computation against the pre-cycle snapshot; new
    caches are still installed only after all are computed.
    """
    new_caches: dict[int, list[int]] = {}
    for node in net.nodes:
        if node.alive and node.behavior is Behavior.CORRECT:
            new_caches[node.id] = lift_redistribute(
                node, net.n, cfg.hubs, cfg.cache_size, net.liveness, rng
            )
    for node_id, cache in new_caches.items():
        net.nodes[node_id].cache = cache


def run_cycle(net: Network, cfg: ScenarioConfig, rng: RunRng) -> Network:
    """Execute one full cycle in place and advance the cycle counter."""
    executing = net.cycle + 1
    if cfg.lift_cycle and executing == cfg.lift_cycle:
        _apply_lift(net, cfg, rng)

    snapshot = net.caches() if cfg.intra_cycle == "snapshot" else None

    order = list(range(net.n))
    rng.engine.shuffle(order)
    for u in order:
        node = net.nodes[u]
        if not node.alive:
            continue
        responses = []
        for peer in node.cache:
            responder = net.nodes[peer]
            if not responder.alive:
                continue
            view = snapshot[peer] if snapshot is not None else None
            responses.append(respond(responder, u, net.roster, cfg.cache_size, rng, view))
        node.cache = elevator_step(node, responses, cfg.hubs, cfg.cache_size, rng)

    net.cycle = executing
    return net


def run_single(
    cfg: ScenarioConfig,
    run_index: int,
    *,
    engine: str = "fast",
    kill_at: dict[int, int] | None = None,
    on_cycle: Callable[[Network, int], None] | None = None,
    trace: bool = False,
) -> RunResult:
    """Execute one run and return its records.

    engine="reference" runs the pure-Python loop above; engine="fast" runs the
    compiled equivalent. on_cycle (reference only) is called after every
    executed cycle. kill_at maps node id -> cycle at whose start it dies.
    """
    validate_config(cfg)
    if engine == "fast":
        if on_cycle is not None:
            raise ValueError("on_cycle hooks require engine='reference'")
        from . import fastpath

        if cfg.n_nodes >= fastpath.MAX_FAST_NODES:
            raise ValueError(
                f"fast engine supports n_nodes < {fastpath.MAX_FAST_NODES}; "
                "use engine='reference'"
            )
    elif engine != "reference":
        raise ValueError(f"unknown engine {engine!r}")

    rng = RunRng(cfg.seed, run_index, cfg.n_nodes)
    net = init_kout(cfg, rng)

    if engine == "fast":
        from . import fastpath

        return fastpath.run_single_fast(cfg, run_index, net, rng, kill_at, trace)

    records = [measure_cycle(net, cfg, run_index, 0)]
    traced: list[list[list[int]]] | None = [] if trace else None
    kill_at = kill_at or {}
    for cycle in range(1, cfg.cycles):
        for node_id, kill_cycle in kill_at.items():
            if kill_cycle == cycle:
                net.nodes[node_id].alive = False
        run_cycle(net, cfg, rng)
        records.append(measure_cycle(net, cfg, run_index, cycle))
        if traced is not None:
            traced.append(net.caches())
        if on_cycle is not None:
            on_cycle(net, cycle)
    conv = backfill_converged(records, cfg.hubs)
    return RunResult(
        run_index=run_index,
        records=records,
        convergence_cycle=conv,
        final_caches=net.caches(),
        trace=traced,
    )


def _run_for_pool(args: tuple) -> RunResult:
    cfg, run_index, engine = args
    return run_single(cfg, run_index, engine=engine)


def default_workers() -> int:
    env = os.environ.get("LIFTSIM_WORKERS")
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


def run_scenario(
    cfg: ScenarioConfig,
    *,
    engine: str = "fast",
    workers: int | None = None,
) -> list[RunResult]:
    """Execute cfg.runs independent runs; output is identical for any worker
    count because each run depends only on (seed, run_index)."""
    validate_config(cfg)
    if workers is None:
        workers = default_workers()
    indices = list(range(cfg.runs))
    if workers <= 1 or cfg.runs == 1:
        results = [run_single(cfg, i, engine=engine) for i in indices]
    else:
        jobs = [(cfg, i, engine) for i in indices]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_for_pool, jobs, chunksize=1))
    results.sort(key=lambda r: r.run_index)
    return results
