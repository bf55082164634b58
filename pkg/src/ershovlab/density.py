"""Exact asymptotic-density functionals over finite set prefixes.

Every density here is a :class:`fractions.Fraction`; no floating point is
used anywhere in this module.  True upper/lower densities are limits and
cannot be read off a finite prefix, so the desk-scale surrogate is the
max/min of the partial densities over an explicit tail window, and every
report records the window that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError
from .tables import SetPrefix


def default_tail_window(n: int) -> tuple[int, int]:
    """Default window for upper/lower estimates: the inclusive tail [n//2, n]."""
    if n < 1:
        raise InputError(f"cannot window a series of length {n}")
    return (max(1, n // 2), n)


class DensitySeries:
    """Partial densities |X restricted below n| / n for n = 1..N.

    Values are produced lazily from integer prefix counts so that long
    series stay cheap; every produced value is an exact rational.
    """

    __slots__ = ("source", "universe", "_cum")

    def __init__(self, source: str, universe: int, cumulative: np.ndarray):
        if universe < 1:
            raise InputError("density series needs universe >= 1")
        if cumulative.shape != (universe + 1,):
            raise InputError("cumulative count vector has wrong length")
        self.source = source
        self.universe = universe
        self._cum = cumulative

    @classmethod
    def of_set(cls, sp: SetPrefix, universe: int | None = None, source: str = "set") -> "DensitySeries":
        n = sp.universe if universe is None else universe
        if not 1 <= n <= sp.universe:
            raise InputError(f"series length {n} outside [1, {sp.universe}]")
        cum = np.array([sp.count(i) for i in range(n + 1)], dtype=np.int64)
        return cls(source, n, cum)

    def count(self, n: int) -> int:
        if not 0 <= n <= self.universe:
            raise InputError(f"index {n} outside [0, {self.universe}]")
        return int(self._cum[n])

    def rho(self, n: int) -> Fraction:
        if not 1 <= n <= self.universe:
            raise InputError(f"partial density needs 1 <= n <= {self.universe}, got {n}")
        return Fraction(self.count(n), n)

    def values(self):
        for n in range(1, self.universe + 1):
            yield Fraction(self.count(n), n)

    def __len__(self) -> int:
        return self.universe


def check_series_invariants(series: DensitySeries) -> list[str]:
    """Structural sanity of a density series; returns violation messages."""
    issues = []
    prev = 0
    for n in range(1, series.universe + 1):
        c = series.count(n)
        if not 0 <= c <= n:
            issues.append(f"count {c} at n={n} outside [0, {n}]")
        if c - prev not in (0, 1):
            issues.append(f"count step {c - prev} at n={n} not in {{0, 1}}")
        prev = c
    return issues


@dataclass(frozen=True)
class WindowExtrema:
    """Max/min of a rational series over an inclusive index window, with the
    first indices attaining them."""

    lo: int
    hi: int
    max_value: Fraction
    argmax: int
    min_value: Fraction
    argmin: int

    def describe(self) -> str:
        return (
            f"window [{self.lo}, {self.hi}]: "
            f"max {self.max_value} at {self.argmax}, min {self.min_value} at {self.argmin}"
        )


def prefix_density(sp: SetPrefix, n: int) -> Fraction:
    """Exact |X restricted below n| / n in lowest terms."""
    if not 1 <= n <= sp.universe:
        raise InputError(f"prefix density needs 1 <= n <= {sp.universe}, got {n}")
    return Fraction(sp.count(n), n)


def density_series(sp: SetPrefix, universe: int | None = None, source: str = "set") -> DensitySeries:
    return DensitySeries.of_set(sp, universe, source)


def window_extrema(series: DensitySeries, lo: int, hi: int) -> WindowExtrema:
    """Exact max/min of rho_n over the inclusive window [lo, hi]."""
    if not 1 <= lo <= hi <= series.universe:
        raise InputError(
            f"window [{lo}, {hi}] is empty or outside [1, {series.universe}]"
        )
    # Track best as integer pairs; comparisons are exact cross-multiplications.
    max_c, max_n = series.count(lo), lo
    min_c, min_n = max_c, lo
    for n in range(lo + 1, hi + 1):
        c = series.count(n)
        if c * max_n > max_c * n:
            max_c, max_n = c, n
        if c * min_n < min_c * n:
            min_c, min_n = c, n
    return WindowExtrema(
        lo=lo,
        hi=hi,
        max_value=Fraction(max_c, max_n),
        argmax=max_n,
        min_value=Fraction(min_c, min_n),
        argmin=min_n,
    )


class RationalSequence:
    """Finite sequence of exact rationals with optional declared bounds."""

    __slots__ = ("values", "lower", "upper")

    def __init__(
        self,
        values,
        lower: Fraction | None = None,
        upper: Fraction | None = None,
    ):
        vals = tuple(Fraction(v) for v in values)
        if not vals:
            raise InputError("rational sequence must be nonempty")
        if (lower is None) != (upper is None):
            raise InputError("declare both bounds or neither")
        if lower is not None and upper is not None:
            if lower > upper:
                raise InputError(f"bounds reversed: {lower} > {upper}")
            for i, v in enumerate(vals):
                if not lower <= v <= upper:
                    raise InputError(
                        f"entry {v} at index {i} violates declared bounds [{lower}, {upper}]"
                    )
        self.values = vals
        self.lower = lower
        self.upper = upper

    @classmethod
    def constant(cls, value, length: int, bounded: bool = True) -> "RationalSequence":
        v = Fraction(value)
        if length < 1:
            raise InputError("constant sequence needs length >= 1")
        lo, hi = (v, v) if bounded else (None, None)
        return cls((v,) * length, lower=lo, upper=hi)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def window(self, lo: int | None, hi: int | None) -> tuple[int, int]:
        """Resolve an inclusive index window, defaulting to the tail half."""
        t = len(self.values)
        if lo is None and hi is None:
            return (t // 2, t - 1) if t > 1 else (0, 0)
        if lo is None or hi is None or not 0 <= lo <= hi < t:
            raise InputError(f"window [{lo}, {hi}] invalid for length {t}")
        return lo, hi


@dataclass(frozen=True)
class LimsupDifferenceReport:
    """Finite evidence for the limit of a dominated difference of sequences.

    ``difference_estimate`` is the midpoint of the difference sequence's
    range over the window; ``oscillation`` (max - min over the window) is
    the limit-existence proxy compared against the caller's tolerance.
    ``residual`` is |estimate - (limsup-est a - limsup-est b)|, which the
    dominated-difference identity predicts to vanish.
    """

    window: tuple[int, int]
    difference_estimate: Fraction
    oscillation: Fraction
    limsup_a: Fraction
    limsup_a_index: int
    limsup_b: Fraction
    limsup_b_index: int
    residual: Fraction
    tolerance: Fraction
    limit_plausible: bool


def check_limsup_difference(
    a: RationalSequence,
    b: RationalSequence,
    window: tuple[int, int] | None = None,
    tolerance: Fraction = Fraction(0),
) -> LimsupDifferenceReport:
    """Tail-window estimates for lim (a_n - b_n) vs limsup a - limsup b.

    Requires both sequences bounded and ``a`` dominating ``b`` pointwise;
    violated domination is an input error because the identity's hypothesis
    fails outright.
    """
    if len(a) != len(b):
        raise InputError(f"sequence lengths differ: {len(a)} vs {len(b)}")
    if a.lower is None or b.lower is None:
        raise InputError("both sequences must declare bounds")
    for i, (x, y) in enumerate(zip(a.values, b.values)):
        if x < y:
            raise InputError(f"domination a_n >= b_n violated at index {i}: {x} < {y}")
    lo, hi = a.window(*(window or (None, None)))
    diff = [a.values[i] - b.values[i] for i in range(lo, hi + 1)]
    dmax, dmin = max(diff), min(diff)
    est = (dmax + dmin) / 2
    osc = dmax - dmin
    a_max = max(range(lo, hi + 1), key=lambda i: (a.values[i], -i))
    b_max = max(range(lo, hi + 1), key=lambda i: (b.values[i], -i))
    la, lb = a.values[a_max], b.values[b_max]
    residual = abs(est - (la - lb))
    return LimsupDifferenceReport(
        window=(lo, hi),
        difference_estimate=est,
        oscillation=osc,
        limsup_a=la,
        limsup_a_index=a_max,
        limsup_b=lb,
        limsup_b_index=b_max,
        residual=residual,
        tolerance=Fraction(tolerance),
        limit_plausible=osc <= tolerance,
    )


def beatty_set(q: Fraction, universe: int) -> SetPrefix:
    """Computable set of density exactly ``q``: n is a member exactly when
    floor((n+1)q) > floor(nq), so the prefix count below n is floor(nq) and
    |rho_n - q| < 1/n for every n >= 1."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise InputError(f"beatty density must lie in [0, 1], got {q}")
    p, r = q.numerator, q.denominator
    marks = np.arange(0, universe + 1, dtype=object) * p // r
    bits = np.array([marks[n + 1] > marks[n] for n in range(universe)], dtype=bool)
    return SetPrefix(universe, bits)


@dataclass(frozen=True)
class Embedding:
    """Strictly increasing enumeration ``h`` of a range set ``R`` together
    with ``g(u)`` = least k with h(k) >= u (equivalently |R below u|)."""

    range_set: SetPrefix
    h: tuple[int, ...]

    def g(self, u: int) -> int:
        return self.range_set.count(u)


@dataclass(frozen=True)
class EmbedAudit:
    """Outcome of the exact conditional-density identity scan."""

    checked: int
    skipped: int
    mismatches: tuple[int, ...]

    @property
    def exact(self) -> bool:
        return not self.mismatches


@dataclass(frozen=True)
class EmbedResult:
    image: SetPrefix
    embedding: Embedding
    audit: EmbedAudit


def embed(range_set: SetPrefix, x: SetPrefix, audit: bool = True) -> EmbedResult:
    """Push ``x`` through the increasing enumeration of ``range_set``.

    The audit verifies, for every u in [1, N] with g(u) >= 1 and g(u)
    within x's universe, the exact identity

        rho_u(h(X)) == rho_{g(u)}(X) * rho_u(R)

    as a rational equality (integer cross-multiplication; no tolerance).
    """
    h = np.flatnonzero(range_set.bits)
    members = [m for m in x.members()]
    if members and members[-1] >= len(h):
        raise InputError(
            f"embedding needs h({members[-1]}) but range has only {len(h)} members"
        )
    image_bits = np.zeros(range_set.universe, dtype=bool)
    for m in members:
        image_bits[h[m]] = True
    image = SetPrefix(range_set.universe, image_bits)

    checked = skipped = 0
    mismatches: list[int] = []
    if audit:
        for u in range(1, range_set.universe + 1):
            g_u = range_set.count(u)
            if g_u < 1:
                skipped += 1
                continue
            if g_u > x.universe:
                skipped += 1
                continue
            lhs = image.count(u) * g_u
            rhs = x.count(g_u) * range_set.count(u)
            checked += 1
            if lhs != rhs:
                mismatches.append(u)
    return EmbedResult(
        image=image,
        embedding=Embedding(range_set=range_set, h=tuple(int(v) for v in h)),
        audit=EmbedAudit(checked=checked, skipped=skipped, mismatches=tuple(mismatches)),
    )
