"""Finite-horizon stage approximations and mind-change classification.

The central object is :class:`ApproxTable`: a boolean matrix ``g(x, s)``
over a finite universe of elements ``x < N`` and stages ``s < S``, with
``g(x, 0) = 0`` for every element.  Column ``x`` approximates the limit
membership of ``x``; the number of adjacent flips in a column is its
mind-change count, which drives the classification operations below.

Settling is only *certified* when a table carries ``settled_by`` stages
(generators emit them); tables loaded from external files without them are
classified "within the recorded horizon" and reports must say so.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class SetPrefix:
    """Membership bits for the elements below a finite universe bound."""

    __slots__ = ("universe", "_bits", "_cum")

    def __init__(self, universe: int, bits: np.ndarray):
        if universe < 0:
            raise InputError(f"universe must be nonnegative, got {universe}")
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (universe,):
            raise InputError(
                f"bit vector has shape {bits.shape}, expected ({universe},)"
            )
        self.universe = universe
        self._bits = _freeze(bits.copy())
        cum = np.zeros(universe + 1, dtype=np.int64)
        np.cumsum(bits, out=cum[1:])
        self._cum = _freeze(cum)

    @classmethod
    def from_elements(cls, universe: int, elements: Iterable[int]) -> "SetPrefix":
        bits = np.zeros(universe, dtype=bool)
        for x in elements:
            if not 0 <= x < universe:
                raise InputError(f"element {x} outside universe [0, {universe})")
            bits[x] = True
        return cls(universe, bits)

    @classmethod
    def empty(cls, universe: int) -> "SetPrefix":
        return cls(universe, np.zeros(universe, dtype=bool))

    @classmethod
    def full(cls, universe: int) -> "SetPrefix":
        return cls(universe, np.ones(universe, dtype=bool))

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def member(self, x: int) -> bool:
        if not 0 <= x < self.universe:
            raise InputError(f"element {x} outside universe [0, {self.universe})")
        return bool(self._bits[x])

    def count(self, n: int) -> int:
        """Number of members strictly below ``n``."""
        if not 0 <= n <= self.universe:
            raise InputError(f"prefix length {n} outside [0, {self.universe}]")
        return int(self._cum[n])

    @property
    def size(self) -> int:
        return int(self._cum[self.universe])

    def members(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.flatnonzero(self._bits))

    def density(self, n: int) -> Fraction:
        if n <= 0:
            raise InputError(f"prefix density needs n >= 1, got {n}")
        return Fraction(self.count(n), n)

    def complement(self) -> "SetPrefix":
        return SetPrefix(self.universe, ~self._bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SetPrefix):
            return NotImplemented
        return self.universe == other.universe and bool(
            np.array_equal(self._bits, other._bits)
        )

    def __hash__(self) -> int:
        return hash((self.universe, self._bits.tobytes()))

    def __repr__(self) -> str:
        if self.universe <= 16:
            return f"SetPrefix({self.universe}, {{{', '.join(map(str, self.members()))}}})"
        return f"SetPrefix(universe={self.universe}, size={self.size})"


class ApproxTable:
    """Stage-by-stage boolean approximation ``g(x, s)`` with ``g(x, 0) = 0``.

    ``settled_by`` maps an element to a stage from which its column is
    certified constant; consistency with the recorded entries is enforced,
    and generators are expected to certify true settling.
    """

    __slots__ = ("universe", "stages", "_entries", "settled_by")

    def __init__(
        self,
        universe: int,
        stages: int,
        entries: np.ndarray,
        settled_by: Mapping[int, int] | None = None,
    ):
        if universe < 1:
            raise InputError(f"universe must be >= 1, got {universe}")
        if stages < 1:
            raise InputError(f"stage count must be >= 1, got {stages}")
        entries = np.asarray(entries, dtype=bool)
        if entries.shape != (universe, stages):
            raise InputError(
                f"entry matrix has shape {entries.shape}, expected ({universe}, {stages})"
            )
        if entries[:, 0].any():
            bad = int(np.flatnonzero(entries[:, 0])[0])
            raise InputError(f"g(x, 0) must be 0 for every x; violated at x={bad}")
        self.universe = universe
        self.stages = stages
        self._entries = _freeze(entries.copy())
        checked: dict[int, int] = {}
        if settled_by:
            last = entries[:, stages - 1]
            for x, s in sorted(settled_by.items()):
                if not 0 <= x < universe:
                    raise InputError(f"settled element {x} outside universe")
                if not 0 <= s < stages:
                    raise InputError(
                        f"settling stage {s} for element {x} outside [0, {stages})"
                    )
                if not (entries[x, s:] == last[x]).all():
                    raise InputError(
                        f"settling claim contradicted: column {x} changes at or after stage {s}"
                    )
                checked[x] = int(s)
        self.settled_by = checked

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def column(self, x: int) -> np.ndarray:
        if not 0 <= x < self.universe:
            raise InputError(f"element {x} outside universe [0, {self.universe})")
        return self._entries[x]

    def snapshot(self, s: int) -> SetPrefix:
        """Stage-``s`` approximation as a set; stages beyond the horizon
        repeat the final column."""
        s = min(s, self.stages - 1)
        if s < 0:
            raise InputError("stage must be nonnegative")
        return SetPrefix(self.universe, self._entries[:, s])

    def limit_bits(self) -> np.ndarray:
        return self._entries[:, self.stages - 1]

    def uncertified(self) -> tuple[int, ...]:
        return tuple(x for x in range(self.universe) if x not in self.settled_by)

    @property
    def fully_certified(self) -> bool:
        return len(self.settled_by) == self.universe

    def settle_stage_of_prefix(self, k: int) -> int:
        """Stage from which the restriction to ``[0, k)`` is certified constant."""
        if not 1 <= k <= self.universe:
            raise InputError(f"prefix length {k} outside [1, {self.universe}]")
        missing = [x for x in range(k) if x not in self.settled_by]
        if missing:
            raise InputError(
                f"prefix {k} not certified: no settling stage for x={missing[0]}"
            )
        return max(self.settled_by[x] for x in range(k))

    def change_counts(self) -> np.ndarray:
        flips = self._entries[:, 1:] != self._entries[:, :-1]
        return flips.sum(axis=1, dtype=np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ApproxTable):
            return NotImplemented
        return (
            self.universe == other.universe
            and self.stages == other.stages
            and bool(np.array_equal(self._entries, other._entries))
            and self.settled_by == other.settled_by
        )

    def __repr__(self) -> str:
        return (
            f"ApproxTable(universe={self.universe}, stages={self.stages}, "
            f"certified={len(self.settled_by)}/{self.universe})"
        )


@dataclass(frozen=True)
class BoundFunction:
    """Nondecreasing mind-change budget.

    ``kind`` is one of ``identity``, ``constant``, ``table``.  Explicit
    tables are finite; evaluating one beyond its domain is an input error
    rather than a silent extrapolation.
    """

    kind: str
    value: int | None = None
    values: tuple[int, ...] | None = None

    @classmethod
    def identity(cls) -> "BoundFunction":
        return cls("identity")

    @classmethod
    def constant(cls, n: int) -> "BoundFunction":
        if n < 0:
            raise InputError(f"constant bound must be nonnegative, got {n}")
        return cls("constant", value=n)

    @classmethod
    def from_table(cls, values: Iterable[int]) -> "BoundFunction":
        vals = tuple(int(v) for v in values)
        if not vals:
            raise InputError("bound table must be nonempty")
        if any(v < 0 for v in vals):
            raise InputError("bound table entries must be nonnegative")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise InputError("bound table must be nondecreasing")
        return cls("table", values=vals)

    def __call__(self, z: int) -> int:
        if z < 0:
            raise InputError(f"bound function argument must be nonnegative, got {z}")
        if self.kind == "identity":
            return z
        if self.kind == "constant":
            return self.value  # type: ignore[return-value]
        assert self.values is not None
        if z >= len(self.values):
            raise InputError(
                f"bound table has {len(self.values)} entries; f({z}) undefined"
            )
        return self.values[z]

    def values_array(self, n: int) -> np.ndarray:
        """Vector of f(0..n-1); explicit tables must cover the whole range."""
        if n < 0:
            raise InputError(f"length must be nonnegative, got {n}")
        if self.kind == "identity":
            return np.arange(n, dtype=np.int64)
        if self.kind == "constant":
            return np.full(n, self.value, dtype=np.int64)
        assert self.values is not None
        if n > len(self.values):
            raise InputError(
                f"bound table has {len(self.values)} entries; need {n}"
            )
        return np.array(self.values[:n], dtype=np.int64)

    def first_stage_exceeding(self, v: int, start: int) -> int | None:
        """Least stage ``s >= start`` with ``f(s) > v``, or None if none exists."""
        if self.kind == "identity":
            return max(start, v + 1)
        if self.kind == "constant":
            return start if self.value > v else None  # type: ignore[operator]
        assert self.values is not None
        idx = bisect.bisect_right(self.values, v)
        s = max(start, idx)
        return s if s < len(self.values) else None

    @property
    def is_unbounded(self) -> bool:
        """Desk-scale unboundedness: identity always; explicit tables only
        when they attain every value up to their maximum."""
        if self.kind == "identity":
            return True
        if self.kind == "constant":
            return False
        assert self.values is not None
        attained = set(self.values)
        return all(v in attained for v in range(self.values[-1] + 1))

    @property
    def name(self) -> str:
        if self.kind == "identity":
            return "id"
        if self.kind == "constant":
            return f"const:{self.value}"
        return f"table[{len(self.values or ())}]"


@dataclass(frozen=True)
class MindChangeProfile:
    """Per-element adjacent-flip counts of a table."""

    counts: tuple[int, ...]
    maximum: int
    monotone: tuple[bool, ...]


@dataclass(frozen=True)
class LimitSet:
    """Limit membership (final column) plus the uncertified elements."""

    prefix: SetPrefix
    uncertified: tuple[int, ...]


@dataclass(frozen=True)
class Classification:
    """Mind-change classification of a table within its horizon."""

    minimal_level: int
    is_ce: bool
    bound_name: str | None = None
    is_f_ce: bool | None = None
    f_violations: tuple[int, ...] = field(default=())
    certified: bool = False
    universe: int = 0
    stages: int = 0

    def describe(self) -> str:
        scope = "certified" if self.certified else "within recorded horizon"
        parts = [f"minimal level {self.minimal_level} ({scope})"]
        parts.append("c.e." if self.is_ce else "not c.e.")
        if self.is_f_ce is not None:
            verdict = "yes" if self.is_f_ce else f"no (violated at x={self.f_violations[0]})"
            parts.append(f"{self.bound_name}-c.e.: {verdict}")
        return "; ".join(parts)


def mind_change_profile(table: ApproxTable) -> MindChangeProfile:
    """Exact adjacent-disagreement counts per column."""
    counts = table.change_counts()
    ent = table.entries
    monotone = (ent[:, 1:] >= ent[:, :-1]).all(axis=1)
    return MindChangeProfile(
        counts=tuple(int(c) for c in counts),
        maximum=int(counts.max(initial=0)),
        monotone=tuple(bool(m) for m in monotone),
    )


def limit_set(table: ApproxTable) -> LimitSet:
    """Final-column membership; elements without settling certificates are
    flagged uncertified."""
    return LimitSet(
        prefix=SetPrefix(table.universe, table.limit_bits()),
        uncertified=table.uncertified(),
    )


def classify(table: ApproxTable, bound: BoundFunction | None = None) -> Classification:
    """Minimal mind-change level, c.e. flag, and optional f-bounded check."""
    profile = mind_change_profile(table)
    is_f = None
    violations: tuple[int, ...] = ()
    if bound is not None:
        bad = tuple(
            x for x, c in enumerate(profile.counts) if c > bound(x)
        )
        violations = bad
        is_f = not bad
    return Classification(
        minimal_level=profile.maximum,
        is_ce=all(profile.monotone),
        bound_name=bound.name if bound is not None else None,
        is_f_ce=is_f,
        f_violations=violations,
        certified=table.fully_certified,
        universe=table.universe,
        stages=table.stages,
    )
