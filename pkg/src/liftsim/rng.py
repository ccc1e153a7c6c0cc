"""Deterministic randomness for simulation runs.

Everything random in a run flows from a single 64-bit master seed through
splitmix64 streams: one engine-level stream per run plus one substream per
node. The generator is deliberately tiny and self-contained so the compiled
fast path can reproduce the exact same draw sequence bit for bit.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4B9FE
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer; a bijective scramble of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, index: int) -> int:
    """Derive the seed of substream `index` from a parent seed.

    Used for master_seed -> run_seed and run_seed -> per-node streams.
    """
    return mix64((seed + _GAMMA * (index + 1)) & MASK64)


class Stream:
    """splitmix64 generator with the handful of draw shapes the engine needs.

    All bounded draws are rejection-based and unbiased; the rejection test is
    written the same way in the compiled kernel so both sides consume the
    stream identically.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n). Requires n >= 1."""
        rem = ((MASK64 % n) + 1) % n  # 2**64 mod n
        while True:
            r = self.next64()
            if rem == 0 or r <= MASK64 - rem:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, high index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population, k: int) -> list:
        """k distinct elements in random order (partial Fisher-Yates)."""
        pool = list(population)
        if k > len(pool):
            raise ValueError("sample larger than population")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]


class RunRng:
    """Per-run randomness: an engine stream plus one substream per node.

    Node substreams make a node's own draws independent of how often other
    nodes draw, which keeps trajectories stable under refactorings of the
    engine loop.
    """

    __slots__ = ("run_seed", "engine", "nodes")

    def __init__(self, master_seed: int, run_index: int, n_nodes: int):
        self.run_seed = substream_seed(master_seed, run_index)
        self.engine = Stream(substream_seed(self.run_seed, 0))
        self.nodes = [Stream(substream_seed(self.run_seed, i + 1)) for i in range(n_nodes)]

    def node_stream(self, node_id: int) -> Stream:
        return self.nodes[node_id]
