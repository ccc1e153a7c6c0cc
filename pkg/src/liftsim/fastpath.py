"""Compiled executor that replays the reference engine bit for bit.

Every random draw here mirrors the pure-Python implementation exactly: same
splitmix64 recurrence, same rejection tests, same Fisher-Yates loop shapes,
same iteration order. The equivalence suite asserts identical per-cycle cache
trajectories and records between both executors, so any drift is a test
failure, not a silent statistical bias.

The per-step frequency map is a dense count array plus a first-touch order
list, which reproduces Python dict insertion order. Top-h selection packs
(count, id) into a single integer key, count descending then id ascending,
which requires n_nodes < 2**20.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, types
from numba.typed import List as TypedList

from . import elevator as _elevator
from .metrics import ALT_HUB_THRESHOLD, CycleRecord, backfill_converged, measure_cycle
from .model import ScenarioConfig

MAX_FAST_NODES = 1 << 20

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4B9FE)
_MIX2 = U64(0x94D049BB133111EB)
_MASK64 = U64(0xFFFFFFFFFFFFFFFF)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_U1 = U64(1)
_U0 = U64(0)

_LCG_MULT = U64(25214903917)
_LCG_ADD = U64(11)
_MASK48 = U64((1 << 48) - 1)


@njit(cache=True, inline="always")
def _next64(states, i):
    states[i] = states[i] + _GAMMA
    z = states[i]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _randbelow(states, i, n):
    un = U64(n)
    rem = ((_MASK64 % un) + _U1) % un
    while True:
        r = _next64(states, i)
        if rem == _U0 or r <= _MASK64 - rem:
            return np.int64(r % un)


@njit(cache=True)
def _stream_draws(seed, bounds):
    """Test hook: successive bounded draws from one stream."""
    states = np.empty(1, dtype=np.uint64)
    states[0] = U64(seed)
    out = np.empty(len(bounds), dtype=np.int64)
    for i in range(len(bounds)):
        out[i] = _randbelow(states, 0, bounds[i])
    return out


@njit(cache=True, inline="always")
def _lcg_next31(state):
    state = (state * _LCG_MULT + _LCG_ADD) & _MASK48
    return state, np.int64(state >> U64(17))


@njit(cache=True, inline="always")
def _lcg_seed(seed):
    return (U64(seed) ^ _LCG_MULT) & _MASK48


@njit(cache=True, inline="always")
def _lcg_draw(state, n):
    """Bounded draw matching lift.bounded_draw; returns (state, value)."""
    if n & (n - 1) == 0:
        state, r = _lcg_next31(state)
        return state, (n * r) >> 31
    while True:
        state, r = _lcg_next31(state)
        candidate = r % n
        if r - candidate + (n - 1) <= np.int64(2147483647):
            return state, candidate


@njit(cache=True)
def _lcg_draws(seed, n, count):
    """Test hook: successive shared-generator draws in [0, n)."""
    state = _lcg_seed(seed)
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        state, out[i] = _lcg_draw(state, n)
    return out


@njit(cache=True)
def _run_kernel(
    caches, clens, behaviors, roster, alive, kill_cycle,
    node_states, engine_state,
    first_cycle, last_cycle, h, c, lift_cycle, tau_main, tau_alt,
    snapshot_mode, weighted_fill, trace,
    bw_data, bw_len,
):
    n = caches.shape[0]
    n_cycles = last_cycle - first_cycle + 1
    n_roster = len(roster)

    # per-step scratch
    counts = np.zeros(n, dtype=np.int32)
    touched = np.empty(c * c, dtype=np.int32)
    cand_buf = np.empty(c * c, dtype=np.int32)
    wgt_buf = np.empty(c * c, dtype=np.int64)
    pool = np.empty(c, dtype=np.int32)
    sel_keys = np.empty(h, dtype=np.int64)
    in_cache = np.zeros(n, dtype=np.uint8)
    new_cache = np.empty(c, dtype=np.int32)
    order = np.empty(n, dtype=np.int64)
    reported = np.empty(c, dtype=np.int32)

    snap_caches = np.empty((n, c), dtype=np.int32)
    snap_lens = np.empty(n, dtype=np.int32)

    # lift scratch
    lift_caches = np.empty((n, c), dtype=np.int32)
    lift_lens = np.full(n, -1, dtype=np.int32)
    lift_mask = np.zeros(n, dtype=np.uint8)
    hub_prefix = np.empty(h, dtype=np.int32)

    # per-cycle metric outputs
    tot_main = np.zeros(n_cycles, dtype=np.int32)
    byz_main = np.zeros(n_cycles, dtype=np.int32)
    tot_alt = np.zeros(n_cycles, dtype=np.int32)
    byz_alt = np.zeros(n_cycles, dtype=np.int32)
    indegree = np.zeros(n_cycles, dtype=np.float64)
    hub_mask = np.zeros((n_cycles, n), dtype=np.uint8)
    votes = np.zeros(n, dtype=np.int32)
    is_hub = np.zeros(n, dtype=np.uint8)

    if trace:
        trace_caches = np.zeros((n_cycles, n, c), dtype=np.int32)
        trace_lens = np.zeros((n_cycles, n), dtype=np.int32)
    else:
        trace_caches = np.zeros((0, n, c), dtype=np.int32)
        trace_lens = np.zeros((0, n), dtype=np.int32)

    for cycle in range(first_cycle, last_cycle + 1):
        ci = cycle - first_cycle

        for i in range(n):
            if kill_cycle[i] == cycle:
                alive[i] = 0

        # --- hub redistribution, before any step of this cycle ---
        if lift_cycle > 0 and cycle == lift_cycle:
            alive_total = 0
            for i in range(n):
                if alive[i] != 0:
                    alive_total += 1
            for u in range(n):
                lift_lens[u] = -1
                if alive[u] == 0 or behaviors[u] != 0:
                    continue
                if alive_total < h:
                    continue  # keep old cache
                # sorted prefix of up to h entries
                np_pref = min(h, clens[u])
                for k in range(np_pref):
                    entry = caches[u, k]
                    pos = k
                    while pos > 0 and hub_prefix[pos - 1] > entry:
                        hub_prefix[pos] = hub_prefix[pos - 1]
                        pos -= 1
                    hub_prefix[pos] = entry
                # 32-bit signed polynomial fold
                v = np.int64(1)
                for k in range(np_pref):
                    v = (v * 31 + hub_prefix[k]) & np.int64(0xFFFFFFFF)
                if v >= np.int64(1) << 31:
                    v -= np.int64(1) << 32
                state = _lcg_seed(v)
                nsel = 0
                while nsel < h:
                    state, cand = _lcg_draw(state, n)
                    if lift_mask[cand] != 0:
                        continue
                    if alive[cand] == 0:
                        continue
                    lift_caches[u, nsel] = cand
                    lift_mask[cand] = 1
                    nsel += 1
                fill_target = min(c - nsel, n - nsel)
                filled = 0
                total = nsel
                while filled < fill_target:
                    cand = np.int32(_randbelow(node_states, u, n))
                    if lift_mask[cand] != 0:
                        continue
                    lift_caches[u, total] = cand
                    lift_mask[cand] = 1
                    total += 1
                    filled += 1
                lift_lens[u] = total
                for k in range(total):
                    lift_mask[lift_caches[u, k]] = 0
            for u in range(n):
                if lift_lens[u] >= 0:
                    for k in range(lift_lens[u]):
                        caches[u, k] = lift_caches[u, k]
                    clens[u] = lift_lens[u]

        if snapshot_mode:
            for i in range(n):
                snap_lens[i] = clens[i]
                for k in range(clens[i]):
                    snap_caches[i, k] = caches[i, k]

        # --- fresh processing permutation from the engine stream ---
        for i in range(n):
            order[i] = i
        for i in range(n - 1, 0, -1):
            j = _randbelow(engine_state, 0, i + 1)
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp

        for oi in range(n):
            u = order[oi]
            if alive[u] == 0:
                continue
            n_touched = 0
            n_pool = 0
            cl = clens[u]
            for pi in range(cl):
                p = caches[u, pi]
                if alive[p] == 0:
                    continue
                # backward bookkeeping: record requester, uniform head swap
                blen = bw_len[p]
                arr = bw_data[p]
                if blen >= arr.shape[0]:
                    bigger = np.empty(arr.shape[0] * 2, dtype=np.int32)
                    bigger[:blen] = arr[:blen]
                    bw_data[p] = bigger
                    arr = bigger
                arr[blen] = u
                blen += 1
                bw_len[p] = blen
                j = _randbelow(node_states, p, blen)
                tmp = arr[0]
                arr[0] = arr[j]
                arr[j] = tmp
                head = arr[0]

                beh = behaviors[p]
                if beh == 0:  # correct: report cache, send head
                    if snapshot_mode:
                        pl = snap_lens[p]
                        for k in range(pl):
                            e = snap_caches[p, k]
                            if counts[e] == 0:
                                touched[n_touched] = e
                                n_touched += 1
                            counts[e] += 1
                    else:
                        pl = clens[p]
                        for k in range(pl):
                            e = caches[p, k]
                            if counts[e] == 0:
                                touched[n_touched] = e
                                n_touched += 1
                            counts[e] += 1
                    pool[n_pool] = head
                    n_pool += 1
                elif beh == 1:  # passive: empty reply, no backward peer
                    pass
                elif beh == 2 or beh == 3:  # self-promoting
                    if snapshot_mode:
                        pl = snap_lens[p]
                        for k in range(pl):
                            reported[k] = snap_caches[p, k]
                    else:
                        pl = clens[p]
                        for k in range(pl):
                            reported[k] = caches[p, k]
                    has_self = False
                    for k in range(pl):
                        if reported[k] == p:
                            has_self = True
                            break
                    rl = pl
                    if not has_self:
                        if pl == 0:
                            reported[0] = p
                            rl = 1
                        else:
                            j2 = _randbelow(node_states, p, pl)
                            reported[j2] = p
                    for k in range(rl):
                        e = reported[k]
                        if counts[e] == 0:
                            touched[n_touched] = e
                            n_touched += 1
                        counts[e] += 1
                    pool[n_pool] = p
                    n_pool += 1
                else:  # coordinated: agreed roster sublist, random roster backward
                    take = min(c, n_roster)
                    for k in range(take):
                        e = roster[k]
                        if counts[e] == 0:
                            touched[n_touched] = e
                            n_touched += 1
                        counts[e] += 1
                    pool[n_pool] = roster[_randbelow(node_states, p, n_roster)]
                    n_pool += 1

            # --- rebuild u's cache ---
            # top-h by count desc then id asc, via packed key (count<<20)-id
            n_sel = 0
            for k in range(n_touched):
                e = touched[k]
                key = (np.int64(counts[e]) << 20) - np.int64(e)
                if n_sel < h:
                    pos = n_sel
                    while pos > 0 and sel_keys[pos - 1] < key:
                        sel_keys[pos] = sel_keys[pos - 1]
                        pos -= 1
                    sel_keys[pos] = key
                    n_sel += 1
                elif key > sel_keys[h - 1]:
                    pos = h - 1
                    while pos > 0 and sel_keys[pos - 1] < key:
                        sel_keys[pos] = sel_keys[pos - 1]
                        pos -= 1
                    sel_keys[pos] = key

            n_new = 0
            for k in range(n_sel):
                key = sel_keys[k]
                cnt = (key + (np.int64(1) << 20) - 1) >> 20
                e = np.int32((cnt << 20) - key)
                new_cache[n_new] = e
                n_new += 1
                in_cache[e] = 1
                counts[e] = 0  # removed from the frequency map

            for k in range(n_pool - 1, 0, -1):
                j2 = _randbelow(node_states, u, k + 1)
                tmp2 = pool[k]
                pool[k] = pool[j2]
                pool[j2] = tmp2

            taken_backward = 0
            for k in range(n_pool):
                if n_new >= c or taken_backward >= c - h:
                    break
                e = pool[k]
                if in_cache[e] == 0:
                    new_cache[n_new] = e
                    n_new += 1
                    in_cache[e] = 1
                    taken_backward += 1

            if n_new < c:
                n_cand = 0
                total_w = np.int64(0)
                for k in range(n_touched):
                    e = touched[k]
                    if counts[e] > 0:
                        cand_buf[n_cand] = e  # keeps first-touch order
                        wgt_buf[n_cand] = counts[e]
                        total_w += counts[e]
                        n_cand += 1
                    counts[e] = 0
                if weighted_fill:
                    while n_new < c and n_cand > 0:
                        r = _randbelow(node_states, u, total_w)
                        j2 = 0
                        acc = wgt_buf[0]
                        while acc <= r:
                            j2 += 1
                            acc += wgt_buf[j2]
                        e = cand_buf[j2]
                        total_w -= wgt_buf[j2]
                        cand_buf[j2] = cand_buf[n_cand - 1]
                        wgt_buf[j2] = wgt_buf[n_cand - 1]
                        n_cand -= 1
                        if in_cache[e] == 0:
                            new_cache[n_new] = e
                            n_new += 1
                            in_cache[e] = 1
                else:
                    while n_new < c and n_cand > 0:
                        j2 = _randbelow(node_states, u, n_cand)
                        e = cand_buf[j2]
                        cand_buf[j2] = cand_buf[n_cand - 1]
                        n_cand -= 1
                        if in_cache[e] == 0:
                            new_cache[n_new] = e
                            n_new += 1
                            in_cache[e] = 1
            else:
                for k in range(n_touched):
                    counts[touched[k]] = 0

            for k in range(n_new):
                in_cache[new_cache[k]] = 0
                caches[u, k] = new_cache[k]
            clens[u] = n_new

        # --- measure the completed cycle ---
        n_correct_alive = 0
        for i in range(n):
            votes[i] = 0
        for i in range(n):
            if alive[i] != 0 and behaviors[i] == 0:
                n_correct_alive += 1
                for k in range(min(h, clens[i])):
                    votes[caches[i, k]] += 1
        if n_correct_alive > 0:
            thr_main = np.int64(math.ceil(tau_main * n_correct_alive))
            thr_alt = np.int64(math.ceil(tau_alt * n_correct_alive))
            tm = 0
            bm = 0
            ta = 0
            ba = 0
            for i in range(n):
                is_hub[i] = 0
                if votes[i] >= thr_main:
                    is_hub[i] = 1
                    hub_mask[ci, i] = 1
                    tm += 1
                    if behaviors[i] != 0:
                        bm += 1
                if votes[i] >= thr_alt:
                    ta += 1
                    if behaviors[i] != 0:
                        ba += 1
            tot_main[ci] = tm
            byz_main[ci] = bm
            tot_alt[ci] = ta
            byz_alt[ci] = ba
            if tm > 0:
                total_in = 0
                for i in range(n):
                    if alive[i] != 0 and behaviors[i] == 0:
                        for k in range(clens[i]):
                            if is_hub[caches[i, k]] != 0:
                                total_in += 1
                indegree[ci] = np.float64(total_in) / np.float64(tm)

        if trace:
            for i in range(n):
                trace_lens[ci, i] = clens[i]
                for k in range(clens[i]):
                    trace_caches[ci, i, k] = caches[i, k]

    return (tot_main, byz_main, tot_alt, byz_alt, indegree, hub_mask,
            trace_caches, trace_lens)


def _make_backward_lists(n: int) -> tuple[TypedList, np.ndarray]:
    data = TypedList.empty_list(types.int32[:])
    for _ in range(n):
        data.append(np.empty(8, dtype=np.int32))
    return data, np.zeros(n, dtype=np.int64)


def run_single_fast(cfg: ScenarioConfig, run_index: int, net, rng,
                    kill_at: dict[int, int] | None, trace: bool):
    """Drive the kernel for one already-initialized run; see engine.run_single."""
    from .engine import RunResult

    n = cfg.n_nodes
    c = cfg.cache_size

    caches = np.full((n, c), -1, dtype=np.int32)
    clens = np.zeros(n, dtype=np.int32)
    behaviors = np.zeros(n, dtype=np.int8)
    alive = np.ones(n, dtype=np.uint8)
    for node in net.nodes:
        clens[node.id] = len(node.cache)
        caches[node.id, : len(node.cache)] = node.cache
        behaviors[node.id] = int(node.behavior)
        alive[node.id] = 1 if node.alive else 0
    roster = (np.asarray(net.roster.members, dtype=np.int32)
              if net.roster is not None else np.empty(0, dtype=np.int32))

    kill_cycle = np.full(n, -1, dtype=np.int32)
    for node_id, cycle in (kill_at or {}).items():
        kill_cycle[node_id] = cycle

    node_states = np.array([s.state for s in rng.nodes], dtype=np.uint64)
    engine_state = np.array([rng.engine.state], dtype=np.uint64)

    bw_data, bw_len = _make_backward_lists(n)

    first_cycle, last_cycle = 1, cfg.cycles - 1
    records = [measure_cycle(net, cfg, run_index, 0)]

    if last_cycle >= first_cycle:
        (tot_main, byz_main, tot_alt, byz_alt, indegree, hub_mask,
         trace_caches, trace_lens) = _run_kernel(
            caches, clens, behaviors, roster, alive, kill_cycle,
            node_states, engine_state,
            first_cycle, last_cycle, cfg.hubs, c, cfg.lift_cycle,
            cfg.hub_threshold, ALT_HUB_THRESHOLD,
            cfg.intra_cycle == "snapshot", _elevator.WEIGHTED_MAP_FILL, trace,
            bw_data, bw_len,
        )
        for ci in range(last_cycle - first_cycle + 1):
            hubs = tuple(int(x) for x in np.flatnonzero(hub_mask[ci]))
            records.append(CycleRecord(
                run_index=run_index,
                cycle=first_cycle + ci,
                total_hubs=int(tot_main[ci]),
                byzantine_hubs=int(byz_main[ci]),
                correct_hubs=int(tot_main[ci] - byz_main[ci]),
                converged=False,
                mean_hub_indegree=float(indegree[ci]),
                hub_ids=hubs,
                total_hubs_alt=int(tot_alt[ci]),
                byzantine_hubs_alt=int(byz_alt[ci]),
                correct_hubs_alt=int(tot_alt[ci] - byz_alt[ci]),
            ))

    conv = backfill_converged(records, cfg.hubs)
    final_caches = [
        [int(x) for x in caches[i, : clens[i]]] for i in range(n)
    ]
    traced = None
    if trace:
        traced = [
            [[int(x) for x in trace_caches[ci, i, : trace_lens[ci, i]]] for i in range(n)]
            for ci in range(trace_caches.shape[0])
        ]
    return RunResult(
        run_index=run_index,
        records=records,
        convergence_cycle=conv,
        final_caches=final_caches,
        trace=traced,
    )
