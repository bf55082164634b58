"""Deterministic corpus generation.

Randomness comes from SplitMix64 (Steele, Lea, Burke's 64-bit mix), chosen
because the full algorithm fits in a dozen lines and is reproducible in any
language: same seed, bit-identical corpora.  Generated tables always carry
true settling certificates.

Settle modes:

* ``early``: every change of column x happens at a stage <= max(x - 1, 0),
  so columns 0 and 1 are constant and the prefix below x is settled before
  stage x.  This is the regime in which the staged certificate provably
  reaches the transfer output.
* ``uniform``: change stages are drawn anywhere in [1, stages - 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .density import beatty_set
from .errors import InputError
from .tables import ApproxTable, SetPrefix

EARLY = "early"
UNIFORM = "uniform"

_MASK = (1 << 64) - 1


class SplitMix64:
    """Tiny deterministic PRNG; the constants are the standard SplitMix64
    increments and mix multipliers."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, so the distribution is
        exact and implementation-independent."""
        if n <= 0:
            raise InputError(f"range must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise InputError(f"empty range [{lo}, {hi}]")
        return lo + self.below(hi - lo + 1)

    def sample(self, population: int, k: int) -> list[int]:
        """k distinct values from [0, population), sorted."""
        if k > population:
            raise InputError(f"cannot sample {k} from {population}")
        chosen: set[int] = set()
        while len(chosen) < k:
            chosen.add(self.below(population))
        return sorted(chosen)


def splitmix64_array(seed: int, n: int) -> np.ndarray:
    """First n outputs of SplitMix64(seed) as a uint64 vector (bit-identical
    to the scalar generator)."""
    i = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + i * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def random_bits(seed: int, n: int, percent: int) -> np.ndarray:
    """Deterministic membership bits: output i is set when the i-th
    SplitMix64 word mod 100 falls below ``percent``.  (The mod-100 bias is
    below 1e-17 and irrelevant at desk scale.)"""
    if not 0 <= percent <= 100:
        raise InputError(f"percent must be in [0, 100], got {percent}")
    words = splitmix64_array(seed, n)
    return (words % np.uint64(100)) < np.uint64(percent)


@dataclass(frozen=True)
class GeneratorSpec:
    """Reproducible recipe for one table or set."""

    kind: str  # delta2 | nce | ce | oscblocks | beatty
    universe: int
    stages: int = 1
    seed: int = 0
    settle: str = EARLY
    budget: int | None = None  # max mind changes per element (nce/delta2)
    q: Fraction | None = None  # beatty density
    block_ratio: int = 4  # oscblocks geometry

    def validate(self) -> None:
        if self.universe < 1:
            raise InputError("universe must be >= 1")
        if self.kind in ("delta2", "nce", "ce", "oscblocks") and self.stages < 1:
            raise InputError("stages must be >= 1")
        if self.settle not in (EARLY, UNIFORM):
            raise InputError(f"unknown settle mode {self.settle!r}")
        if self.kind in ("delta2", "nce"):
            budget = self.budget if self.budget is not None else 3
            if budget < 0:
                raise InputError("budget must be nonnegative")
            if budget > self.stages - 1:
                raise InputError(
                    f"infeasible: budget {budget} exceeds stages-1 = {self.stages - 1}"
                )
        if self.kind == "beatty":
            if self.q is None:
                raise InputError("beatty generation needs a density q")
            if not 0 <= self.q <= 1:
                raise InputError(f"beatty density must be in [0, 1], got {self.q}")
        if self.kind == "oscblocks" and self.block_ratio < 2:
            raise InputError("block ratio must be >= 2")


def _change_room(x: int, stages: int, settle: str) -> int:
    """Largest stage at which column x may still flip."""
    if settle == EARLY:
        return min(max(x - 1, 0), stages - 1)
    return stages - 1


def _random_table(spec: GeneratorSpec, budget: int) -> ApproxTable:
    rng = SplitMix64(spec.seed)
    flips = np.zeros((spec.universe, spec.stages), dtype=np.int8)
    settled: dict[int, int] = {}
    for x in range(spec.universe):
        room = _change_room(x, spec.stages, spec.settle)
        cap = min(budget, room)
        c = rng.randint(0, cap) if cap > 0 else 0
        stages = [s + 1 for s in rng.sample(room, c)]
        for s in stages:
            flips[x, s] = 1
        settled[x] = stages[-1] if stages else 0
    entries = (np.cumsum(flips, axis=1) % 2).astype(bool)
    return ApproxTable(spec.universe, spec.stages, entries, settled)


def _ce_table(spec: GeneratorSpec) -> ApproxTable:
    rng = SplitMix64(spec.seed)
    entries = np.zeros((spec.universe, spec.stages), dtype=bool)
    settled: dict[int, int] = {}
    for x in range(spec.universe):
        room = _change_room(x, spec.stages, spec.settle)
        enters = room >= 1 and rng.below(2) == 1
        if enters:
            stage = rng.randint(1, room)
            entries[x, stage:] = True
            settled[x] = stage
        else:
            settled[x] = 0
    return ApproxTable(spec.universe, spec.stages, entries, settled)


def oscillating_blocks_set(universe: int, ratio: int = 4) -> SetPrefix:
    """Alternating full/empty blocks [ratio^k, ratio^(k+1)): full for even k.
    The partial densities oscillate forever, so the set has no density."""
    if ratio < 2:
        raise InputError("block ratio must be >= 2")
    bits = np.zeros(universe, dtype=bool)
    k = 0
    lo = 1
    while lo < universe:
        hi = min(lo * ratio, universe)
        if k % 2 == 0:
            bits[lo:hi] = True
        lo *= ratio
        k += 1
    return SetPrefix(universe, bits)


def _oscblocks_table(spec: GeneratorSpec) -> ApproxTable:
    """The oscillating-blocks set as a table: member x enters at stage
    min(x + 1, stages - 1) -- settled by stage x + 1, certified."""
    target = oscillating_blocks_set(spec.universe, spec.block_ratio)
    entries = np.zeros((spec.universe, spec.stages), dtype=bool)
    settled: dict[int, int] = {}
    for x in range(spec.universe):
        if target.member(x):
            stage = min(x + 1, spec.stages - 1)
            if stage < 1:
                raise InputError("oscblocks table needs stages >= 2")
            entries[x, stage:] = True
            settled[x] = stage
        else:
            settled[x] = 0
    return ApproxTable(spec.universe, spec.stages, entries, settled)


def generate(spec: GeneratorSpec) -> ApproxTable | SetPrefix:
    """Produce the table or set described by the spec, deterministically."""
    spec.validate()
    if spec.kind == "delta2":
        return _random_table(spec, spec.budget if spec.budget is not None else 3)
    if spec.kind == "nce":
        if spec.budget is None:
            raise InputError("nce generation needs a budget (the level)")
        return _random_table(spec, spec.budget)
    if spec.kind == "ce":
        return _ce_table(spec)
    if spec.kind == "oscblocks":
        return _oscblocks_table(spec)
    if spec.kind == "beatty":
        assert spec.q is not None
        return beatty_set(spec.q, spec.universe)
    raise InputError(f"unknown generator kind {spec.kind!r}")
