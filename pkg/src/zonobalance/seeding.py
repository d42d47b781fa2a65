"""Deterministic seed derivation for benchmark sweeps.

Per-run seeds come from a single splitmix64 evaluation so that another
implementation can reproduce any individual run from the master seed and
the run index alone: run_seed = splitmix64(master + (index + 1) * GOLDEN)
with all arithmetic modulo 2^64.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One output of the splitmix64 mixing function."""
    z = (state + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def run_seed(master: int, index: int) -> int:
    """Seed for run `index` of a sweep driven by `master`."""
    return splitmix64((master + index * GOLDEN) & MASK64)
