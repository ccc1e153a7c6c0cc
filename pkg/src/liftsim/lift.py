"""One-shot deterministic hub redistribution.

At the activation cycle every correct node derives the same seed from the
(sorted) hub ids in its cache prefix, runs the same shared generator, and
therefore lands on the same h replacement hubs. Node ids cannot be chosen by
attackers, so the replacements are uniform over the whole network regardless
of who had captured the hub positions.
"""

from __future__ import annotations

import logging
from typing import Callable

from .model import NodeState
from .rng import RunRng

log = logging.getLogger(__name__)

MASK48 = (1 << 48) - 1
MASK32 = (1 << 32) - 1
_LCG_MULT = 25214903917
_LCG_ADD = 11
_INT31_MAX = (1 << 31) - 1


class SharedPrng:
    """48-bit linear congruential generator shared by all correct nodes.

    state' = (state * 25214903917 + 11) mod 2^48, seeded by XORing a 64-bit
    seed with the multiplier. next(bits) returns the top `bits` bits of the
    freshly advanced state.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = (seed ^ _LCG_MULT) & MASK48

    def next(self, bits: int) -> int:
        self.state = (self.state * _LCG_MULT + _LCG_ADD) & MASK48
        return self.state >> (48 - bits)


def bounded_draw(prng: SharedPrng, n: int) -> int:
    """Unbiased integer in [0, n) from the shared generator.

    Powers of two use the top bits directly; otherwise a modulo draw with
    rejection of the biased tail (reject when r - r%n + (n-1) would exceed
    31 bits).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1 (got {n})")
    if n & (n - 1) == 0:
        return (n * prng.next(31)) >> 31
    while True:
        r = prng.next(31)
        candidate = r % n
        if r - candidate + (n - 1) <= _INT31_MAX:
            return candidate


def extract_hub_ids(cache: list[int], h: int) -> list[int]:
    """The hub candidates in a cache: its first h entries, sorted ascending.

    Sorting makes the result identical across nodes whose prefixes hold the
    same ids in different orders. A cache shorter than h (possible under heavy
    attack) contributes everything it has and is logged.
    """
    if len(cache) < h:
        log.warning("cache shorter than hub prefix: %d < %d", len(cache), h)
    return sorted(cache[:h])


def derive_seed(hub_ids: list[int]) -> int:
    """Fold sorted hub ids into a 32-bit signed seed.

    v starts at 1; each id folds in as v = 31*v + id with 32-bit wraparound.
    Equal id lists give equal seeds, which is all the redistribution needs.
    """
    v = 1
    for entry in hub_ids:
        v = (31 * v + entry) & MASK32
    if v >= 1 << 31:
        v -= 1 << 32
    return v


def select_new_hubs(
    seed: int,
    n_nodes: int,
    h: int,
    liveness: Callable[[int], bool],
) -> list[int]:
    """Draw h distinct live node ids from the shared generator, in draw order."""
    prng = SharedPrng(seed)
    selected: list[int] = []
    chosen: set[int] = set()
    while len(selected) < h:
        candidate = bounded_draw(prng, n_nodes)
        if candidate in chosen:
            continue
        if not liveness(candidate):
            continue
        selected.append(candidate)
        chosen.add(candidate)
    return selected


def lift_redistribute(
    node: NodeState,
    n_nodes: int,
    h: int,
    c: int,
    liveness: Callable[[int], bool],
    rng: RunRng,
) -> list[int]:
    """Build the node's post-redistribution cache.

    The prefix holds the h shared replacement hubs in draw order; the rest is
    filled with distinct random non-hub ids from the node's own stream, so
    local filler draws never desynchronize the shared generator. If fewer than
    h nodes are alive the old cache is kept unchanged.
    """
    live_seen = 0
    for candidate in range(n_nodes):
        if liveness(candidate):
            live_seen += 1
            if live_seen >= h:
                break
    if live_seen < h:
        log.warning("node %d: only %d live nodes, redistribution skipped", node.id, live_seen)
        return list(node.cache)

    hub_ids = extract_hub_ids(node.cache, h)
    seed = derive_seed(hub_ids)
    new_cache = select_new_hubs(seed, n_nodes, h, liveness)

    stream = rng.node_stream(node.id)
    taken = set(new_cache)
    fill_target = min(c - len(new_cache), n_nodes - len(new_cache))
    filled = 0
    while filled < fill_target:
        candidate = stream.randbelow(n_nodes)
        if candidate in taken:
            continue
        new_cache.append(candidate)
        taken.add(candidate)
        filled += 1
    return new_cache
