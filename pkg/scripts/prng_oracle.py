#!/usr/bin/env python3
"""Standalone oracle for the shared 48-bit generator.

Implements the recurrence directly, with no imports from the package, to
produce golden values for the test suite. Usage:

    python scripts/prng_oracle.py SEED N COUNT    # bounded draws in [0, N)
    python scripts/prng_oracle.py SEED raw COUNT  # raw top-31-bit outputs
"""
import sys

MULT, ADD, MASK = 25214903917, 11, (1 << 48) - 1


def draws(seed, n, count):
    state = (seed ^ MULT) & MASK
    out = []
    while len(out) < count:
        state = (state * MULT + ADD) & MASK
        r = state >> 17
        if n == "raw":
            out.append(r)
        elif n & (n - 1) == 0:
            out.append((n * r) >> 31)
        elif r - (r % n) + (n - 1) <= (1 << 31) - 1:
            out.append(r % n)
    return out


if __name__ == "__main__":
    seed = int(sys.argv[1])
    n = sys.argv[2] if sys.argv[2] == "raw" else int(sys.argv[2])
    count = int(sys.argv[3])
    print(draws(seed, n, count))
