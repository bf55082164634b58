"""Reals represented as limsups of rational sequences, and formal differences.

A :class:`LimsupReal` never claims a rational value for the real it stands
for; every query returns finite evidence together with the window that
produced it.  A :class:`DiffReal` is a formal pair (no arithmetic is
provided on these: limsup is not additive, so sums and products of the
represented reals are out of scope).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .density import RationalSequence
from .errors import InputError
from .tables import ApproxTable


@dataclass(frozen=True)
class LimsupReal:
    """A computable rational sequence standing for the limsup of its values."""

    seq: RationalSequence
    name: str = "r"

    @classmethod
    def constant(cls, value, length: int = 16, name: str = "r") -> "LimsupReal":
        return cls(RationalSequence.constant(value, length), name=name)


@dataclass(frozen=True)
class DiffReal:
    """Formal difference limsup(a) - limsup(b)."""

    a: LimsupReal
    b: LimsupReal


@dataclass(frozen=True)
class TailMax:
    value: Fraction
    index: int
    window: tuple[int, int]


def cut_evidence(r: LimsupReal, q: Fraction, window: tuple[int, int] | None = None) -> int:
    """How many indices in the window witness q < q_n.

    This is the finite-evidence count for "q lies below the limsup"; it is
    antitone in q by construction.
    """
    lo, hi = r.seq.window(*(window or (None, None)))
    q = Fraction(q)
    return sum(1 for i in range(lo, hi + 1) if r.seq.values[i] > q)


def limsup_estimate(r: LimsupReal, window: tuple[int, int] | None = None) -> TailMax:
    """Tail-window max of the sequence, with the first index attaining it."""
    lo, hi = r.seq.window(*(window or (None, None)))
    best_i = lo
    best = r.seq.values[lo]
    for i in range(lo + 1, hi + 1):
        if r.seq.values[i] > best:
            best, best_i = r.seq.values[i], i
    return TailMax(value=best, index=best_i, window=(lo, hi))


@dataclass(frozen=True)
class DiffRepRow:
    s: int
    rho_a: Fraction
    u: Fraction
    v: Fraction
    residual: Fraction


@dataclass(frozen=True)
class DiffRepResult:
    """Difference-of-limsups form of a table's limit set.

    ``diff.a`` carries u_s = sum of odd-layer partial densities and
    ``diff.b`` carries v_s = sum of even-layer partial densities, where the
    layers come from the nested monotone decomposition of the table.  The
    audit rows certify rho_s(limit set) = u_s - v_s exactly at every prefix
    length s.
    """

    diff: DiffReal
    rows: tuple[DiffRepRow, ...]
    layer_count: int

    @property
    def exact(self) -> bool:
        return all(row.residual == 0 for row in self.rows)


def diff_representation(table: ApproxTable) -> DiffRepResult:
    """Decompose the table into nested monotone layers and emit the
    odd/even layer density sums as a formal difference, padded with an
    empty final layer when the level is odd."""
    from .constructions import decompose_nce

    dec = decompose_nce(table)
    n = table.universe
    layer_counts = []
    for layer in dec.layers:
        bits = layer.limit_bits()
        prefix = [0] * (n + 1)
        acc = 0
        for i in range(n):
            acc += int(bits[i])
            prefix[i + 1] = acc
        layer_counts.append(prefix)
    if len(layer_counts) % 2 == 1:
        layer_counts.append([0] * (n + 1))

    a_bits = table.limit_bits()
    rows = []
    u_vals = []
    v_vals = []
    acc = 0
    for s in range(1, n + 1):
        acc += int(a_bits[s - 1])
        u_cnt = sum(layer_counts[j][s] for j in range(0, len(layer_counts), 2))
        v_cnt = sum(layer_counts[j][s] for j in range(1, len(layer_counts), 2))
        rho_a = Fraction(acc, s)
        u = Fraction(u_cnt, s)
        v = Fraction(v_cnt, s)
        u_vals.append(u)
        v_vals.append(v)
        rows.append(DiffRepRow(s=s, rho_a=rho_a, u=u, v=v, residual=abs(rho_a - (u - v))))
    if not rows:
        raise InputError("difference representation needs universe >= 1")
    diff = DiffReal(
        a=LimsupReal(RationalSequence(u_vals), name="odd-layer density sum"),
        b=LimsupReal(RationalSequence(v_vals), name="even-layer density sum"),
    )
    return DiffRepResult(diff=diff, rows=tuple(rows), layer_count=len(layer_counts))
