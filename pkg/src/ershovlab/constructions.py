"""Executable constructions: layer decomposition, c.e. density builders,
the modulus recursion, the greedy density transfer, and its staged
mind-change certificate.

Conventions shared by the transfer machinery:

* Stages are naturals.  A table records entries for stages below its
  horizon; settling certificates extend columns as constants beyond it,
  which is what lets the modulus recursion quote stages past the recorded
  horizon.
* ``m`` denotes a modulus prefix: ``m[0]`` is the least stage where the
  bound function becomes positive, and each next level is the least stage
  past ``(x+1) * m[x]`` where the bound exceeds ``x+1`` and the limit set's
  restriction to ``x+1`` elements is certified stable.
* The greedy rule is strict: a fresh element joins the built set only when
  the running density is strictly below the current target; ties stay out.
* The empty-prefix density ``rho_0`` is taken to be 0 in the greedy rule
  (it can only come up when the bound is already positive at stage 0).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .density import (
    DensitySeries,
    RationalSequence,
    WindowExtrema,
    beatty_set,
    default_tail_window,
    window_extrema,
)
from .errors import BoundTooWeakError, InputError
from .reals import LimsupReal, TailMax, limsup_estimate
from .tables import ApproxTable, BoundFunction, SetPrefix


# ---------------------------------------------------------------------------
# Nested monotone decomposition


@dataclass(frozen=True)
class Decomposition:
    """Nested monotone layers of a table: layer j holds the elements whose
    column changes at least j times, entered at the stage of the j-th
    change.  Layers are themselves valid monotone tables."""

    layers: tuple[ApproxTable, ...]
    source_level: int

    @property
    def level(self) -> int:
        return len(self.layers)


def decompose_nce(table: ApproxTable) -> Decomposition:
    """Split a table into nested monotone layers whose alternating
    difference reassembles the original at every stage."""
    ent = table.entries
    n, s = table.universe, table.stages
    flips = ent[:, 1:] != ent[:, :-1]
    cum = np.zeros((n, s), dtype=np.int64)
    if s > 1:
        np.cumsum(flips, axis=1, out=cum[:, 1:])
    level = int(cum[:, -1].max(initial=0))
    layers = []
    for j in range(1, level + 1):
        bits = cum >= j
        member = bits[:, -1]
        entry = np.argmax(bits, axis=1)
        settled = {
            x: (int(entry[x]) if member[x] else 0) for x in range(n)
        }
        layers.append(ApproxTable(n, s, bits, settled))
    return Decomposition(layers=tuple(layers), source_level=level)


def verify_decomposition(table: ApproxTable, dec: Decomposition) -> list[str]:
    """Re-check layer monotonicity, stagewise nesting, and exact stagewise
    reassembly against the source table."""
    issues: list[str] = []
    for j, layer in enumerate(dec.layers, start=1):
        ent = layer.entries
        if not (ent[:, 1:] >= ent[:, :-1]).all():
            bad = np.argwhere(ent[:, 1:] < ent[:, :-1])[0]
            issues.append(f"layer {j} not monotone at x={bad[0]}, s={bad[1] + 1}")
    for j in range(len(dec.layers) - 1):
        hi, lo = dec.layers[j].entries, dec.layers[j + 1].entries
        if (lo & ~hi).any():
            bad = np.argwhere(lo & ~hi)[0]
            issues.append(
                f"nesting violated between layers {j + 1}, {j + 2} at x={bad[0]}, s={bad[1]}"
            )
    alt = np.zeros_like(table.entries, dtype=np.int64)
    for j, layer in enumerate(dec.layers, start=1):
        alt += layer.entries if j % 2 == 1 else -layer.entries.astype(np.int64)
    if not (alt == table.entries).all():
        bad = np.argwhere(alt != table.entries)[0]
        issues.append(f"stagewise reassembly differs at x={bad[0]}, s={bad[1]}")
    return issues


# ---------------------------------------------------------------------------
# Monotone builders


def geometric_schedule(universe: int, base: int = 64, ratio: int = 2) -> tuple[int, ...]:
    """Geometric block lengths covering [0, universe); the last block is
    truncated to fit.  Block lengths must tend to infinity for the weighted
    average argument, and geometric growth keeps them inside any horizon."""
    if universe < 1:
        raise InputError("schedule needs universe >= 1")
    if base < 1 or ratio < 2:
        raise InputError("geometric schedule needs base >= 1 and ratio >= 2")
    lengths = []
    remaining = universe
    block = base
    while remaining > 0:
        take = min(block, remaining)
        lengths.append(take)
        remaining -= take
        block *= ratio
    return tuple(lengths)


def van_der_corput_order(length: int) -> tuple[int, ...]:
    """Offsets 0..length-1 in bit-reversal priority: earlier offsets spread
    uniformly, so every priority prefix is a low-discrepancy subset."""
    if length < 1:
        raise InputError("block length must be >= 1")
    width = max(1, (length - 1).bit_length())
    order = []
    for k in range(1 << width):
        rev = 0
        v = k
        for _ in range(width):
            rev = (rev << 1) | (v & 1)
            v >>= 1
        if rev < length:
            order.append(rev)
    return tuple(order)


def _ceil_mul(q: Fraction, n: int) -> int:
    return -((-q.numerator * n) // q.denominator)


def _clamp_unit(q: Fraction) -> Fraction:
    return min(Fraction(1), max(Fraction(0), q))


def build_ce_density(
    target: LimsupReal,
    schedule: tuple[int, ...],
    universe: int,
) -> ApproxTable:
    """Monotone table whose limit set chases the target sequence blockwise.

    Block n fills its first ceil(tau_n * |I_n|) offsets in bit-reversal
    priority order, where tau_n is the running max of the remaining target
    entries (blocks past the target's length reuse its final entry).  The
    stagewise targets only grow, so columns are monotone; the final block
    density is within 1/|I_n| of tau_n.
    """
    if sum(schedule) != universe:
        raise InputError(
            f"schedule covers {sum(schedule)} elements, universe is {universe}"
        )
    if any(l < 1 for l in schedule):
        raise InputError("schedule blocks must be nonempty")
    vals = [_clamp_unit(v) for v in target.seq.values]
    t = len(vals)
    stages = t + 1
    entries = np.zeros((universe, stages), dtype=bool)
    settled: dict[int, int] = {}
    start = 0
    for n, length in enumerate(schedule):
        order = van_der_corput_order(length)
        rank = np.empty(length, dtype=np.int64)
        for i, off in enumerate(order):
            rank[off] = i
        lo_idx = min(n, t - 1)
        counts = np.zeros(stages, dtype=np.int64)
        running = Fraction(0)
        for s in range(1, stages):
            m = s - 1
            if m >= lo_idx:
                running = max(running, vals[m])
            counts[s] = _ceil_mul(running, length)
        block = rank[:, None] < counts[None, :]
        entries[start : start + length, :] = block
        member = block[:, -1]
        first = np.argmax(block, axis=1)
        for off in range(length):
            settled[start + off] = int(first[off]) if member[off] else 0
        start += length
    return ApproxTable(universe, stages, entries, settled)


@dataclass(frozen=True)
class DifferencePair:
    """Nested monotone pair built around a computable base set of rational
    density: the outer table expands the base through its complement, the
    inner one shrinks it from inside."""

    outer: ApproxTable
    inner: ApproxTable
    base: SetPrefix
    base_density: Fraction
    outer_estimate: TailMax
    inner_estimate: TailMax


def _embed_monotone(
    carrier_positions: np.ndarray,
    inner: ApproxTable,
    universe: int,
    always: SetPrefix | None,
) -> ApproxTable:
    """Push a monotone table through an increasing enumeration, optionally
    joining a fixed set from stage 1 on; stage 0 stays empty."""
    s_inner = inner.stages
    stages = s_inner + 1
    entries = np.zeros((universe, stages), dtype=bool)
    base_bits = always.bits if always is not None else None
    for s in range(1, stages):
        col = np.zeros(universe, dtype=bool)
        if base_bits is not None:
            col |= base_bits
        col[carrier_positions[inner.entries[:, s - 1]]] = True
        entries[:, s] = col
    settled: dict[int, int] = {x: 0 for x in range(universe)}
    if base_bits is not None:
        for x in np.flatnonzero(base_bits):
            settled[int(x)] = 1
    for x1, stage in inner.settled_by.items():
        pos = int(carrier_positions[x1])
        if inner.entries[x1, -1]:
            settled[pos] = stage + 1
        else:
            settled[pos] = max(settled[pos], 0)
    return ApproxTable(universe, stages, entries, settled)


def build_difference_pair(
    a: LimsupReal,
    b: LimsupReal,
    q: Fraction,
    universe: int,
    schedule_base: int = 64,
    window: tuple[int, int] | None = None,
) -> DifferencePair:
    """Build nested monotone tables whose limit densities chase the two
    target reals, separated by the rational ``q``.

    The base is the exact-density computable set for ``q``; the outer set
    adds a built set of relative density (a - q)/(1 - q) inside the base's
    complement, the inner set keeps relative density b/q inside the base.
    Requires tail estimates with inner < q < outer, strictly.
    """
    q = Fraction(q)
    if not 0 < q < 1:
        raise InputError(f"separator must satisfy 0 < q < 1, got {q}")
    a_est = limsup_estimate(a, window)
    b_est = limsup_estimate(b, window)
    if not b_est.value < q < a_est.value:
        raise InputError(
            f"separator {q} not strictly between tail estimates "
            f"{b_est.value} and {a_est.value}"
        )
    base = beatty_set(q, universe)
    co = base.complement()
    outer_universe = co.size
    inner_universe = base.size
    if outer_universe < 1 or inner_universe < 1:
        raise InputError("base set or complement vanishes at this universe")

    outer_target = LimsupReal(
        RationalSequence([_clamp_unit((v - q) / (1 - q)) for v in a.seq.values]),
        name="outer relative target",
    )
    inner_target = LimsupReal(
        RationalSequence([_clamp_unit(v / q) for v in b.seq.values]),
        name="inner relative target",
    )
    outer_small = build_ce_density(
        outer_target, geometric_schedule(outer_universe, schedule_base), outer_universe
    )
    inner_small = build_ce_density(
        inner_target, geometric_schedule(inner_universe, schedule_base), inner_universe
    )
    outer = _embed_monotone(np.flatnonzero(co.bits), outer_small, universe, base)
    inner = _embed_monotone(np.flatnonzero(base.bits), inner_small, universe, None)
    return DifferencePair(
        outer=outer,
        inner=inner,
        base=base,
        base_density=q,
        outer_estimate=a_est,
        inner_estimate=b_est,
    )


# ---------------------------------------------------------------------------
# Modulus recursion


@dataclass(frozen=True)
class LevelRecord:
    level: int
    stage: int
    settle_floor: int
    bound_at_stage: int


@dataclass(frozen=True)
class ModulusPrefix:
    """Certified stability stages: m[x] is a stage from which the limit
    set's first x elements (and, at level 0, the bound's positivity) are
    locked in.  Computation stops at the first level whose stage reaches
    the requested horizon; that level is included because the transfer's
    last, truncated interval still needs its target."""

    values: tuple[int, ...]
    bound: BoundFunction
    records: tuple[LevelRecord, ...]
    horizon: int

    @property
    def top_level(self) -> int:
        return len(self.values) - 1

    def levels_within(self, horizon: int) -> int:
        """Largest x with m[x] <= horizon, or -1."""
        k = -1
        for x, v in enumerate(self.values):
            if v <= horizon:
                k = x
        return k


def modulus(table: ApproxTable, bound: BoundFunction, horizon: int) -> ModulusPrefix:
    """Run the modulus recursion against certified settling stages.

    Level 0 is the least stage with a positive bound; level x+1 is the
    least stage past (x+1)*m[x] where the bound exceeds x+1 and the first
    x+1 columns are certified settled.  Fails loudly when the bound cannot
    reach a requested level or certificates are missing.
    """
    if horizon < 1:
        raise InputError(f"horizon must be >= 1, got {horizon}")
    m0 = bound.first_stage_exceeding(0, 0)
    if m0 is None:
        raise BoundTooWeakError(
            f"insufficient bound function: {bound.name} never exceeds 0"
        )
    values = [m0]
    records = [LevelRecord(level=0, stage=m0, settle_floor=0, bound_at_stage=bound(m0))]
    while values[-1] < horizon:
        nxt = len(values)
        if nxt > table.universe:
            raise InputError(
                f"universe {table.universe} too small: level {nxt} needs that many columns"
            )
        settle = table.settle_stage_of_prefix(nxt)
        start = max(nxt * values[-1] + 1, settle)
        stage = bound.first_stage_exceeding(nxt, start)
        if stage is None:
            raise BoundTooWeakError(
                f"insufficient bound function: {bound.name} cannot exceed {nxt} "
                f"(needed for level {nxt} at stage >= {start})"
            )
        values.append(stage)
        records.append(
            LevelRecord(
                level=nxt,
                stage=stage,
                settle_floor=settle,
                bound_at_stage=bound(stage),
            )
        )
    return ModulusPrefix(
        values=tuple(values), bound=bound, records=tuple(records), horizon=horizon
    )


def verify_modulus(mp: ModulusPrefix) -> list[str]:
    """Growth and bound conditions re-checked directly on the output."""
    issues = []
    m = mp.values
    if mp.bound(m[0]) <= 0:
        issues.append(f"bound not positive at m[0]={m[0]}")
    for x in range(len(m) - 1):
        if not m[x + 1] > (x + 1) * m[x]:
            issues.append(f"growth m[{x + 1}]={m[x + 1]} <= {(x + 1)}*m[{x}]")
        if not mp.bound(m[x + 1]) > x + 1:
            issues.append(f"bound at m[{x + 1}] not above {x + 1}")
    return issues


# ---------------------------------------------------------------------------
# Greedy density transfer


@dataclass(frozen=True)
class TrackingRow:
    level: int
    stage: int
    rho_a: Fraction
    rho_b: Fraction
    error: Fraction
    bound: Fraction
    ok: bool


@dataclass(frozen=True)
class TransferResult:
    """Built set plus the ledger comparing its sampled densities against
    the source's prefix densities at the modulus stages."""

    b: SetPrefix
    modulus: ModulusPrefix
    horizon: int
    tracking: tuple[TrackingRow, ...]
    targets: tuple[Fraction, ...]
    intervals: tuple[tuple[int, int, int, int], ...]
    window: tuple[int, int]
    b_extrema: WindowExtrema
    active_targets: tuple[Fraction, ...]

    @property
    def tracking_ok(self) -> bool:
        return all(row.ok for row in self.tracking)

    @property
    def active_max(self) -> Fraction:
        return max(self.active_targets)

    @property
    def active_min(self) -> Fraction:
        return min(self.active_targets)


def transfer(
    table: ApproxTable,
    bound: BoundFunction,
    horizon: int,
    window: tuple[int, int] | None = None,
) -> TransferResult:
    """Build a set of length ``horizon`` whose density chases the source
    limit set's prefix densities along the modulus.

    Below m[0] nothing enters.  On [m[x], m[x+1]) a fresh element enters
    exactly when the running density is strictly below the target
    rho_{x+1} of the settled limit set.  The tracking ledger records
    |rho_{m[x]}(B) - rho_x(A)| against 1/x for every level with
    m[x] <= horizon.
    """
    if horizon < 1:
        raise InputError(f"horizon must be >= 1, got {horizon}")
    mp = modulus(table, bound, horizon)
    m = mp.values
    a_bits = table.limit_bits()
    top = mp.top_level
    a_counts = [0] * (top + 1)
    acc = 0
    for k in range(1, top + 1):
        if k <= table.universe:
            acc += int(a_bits[k - 1])
        a_counts[k] = acc

    bits = bytearray(horizon)
    count = 0
    boundary_counts: dict[int, int] = {}
    intervals: list[tuple[int, int, int, int]] = []
    targets: list[Fraction] = []
    if m[0] <= horizon:
        boundary_counts[m[0]] = 0
    for x in range(top):
        lo = m[x]
        hi = min(m[x + 1], horizon)
        if lo >= horizon:
            break
        p = a_counts[x + 1]
        dq = x + 1
        intervals.append((lo, hi, p, dq))
        targets.append(Fraction(p, dq))
        for y in range(lo, hi):
            if y == 0:
                member = 0 < p
            else:
                member = count * dq < p * y
            if member:
                bits[y] = 1
                count += 1
        if m[x + 1] <= horizon:
            boundary_counts[m[x + 1]] = count

    b = SetPrefix(horizon, np.frombuffer(bytes(bits), dtype=np.uint8).astype(bool))

    tracking = []
    for x in range(1, top + 1):
        if m[x] > horizon:
            break
        bc = boundary_counts[m[x]]
        rho_b = Fraction(bc, m[x])
        rho_a = Fraction(a_counts[x], x)
        err = abs(rho_b - rho_a)
        bnd = Fraction(1, x)
        tracking.append(
            TrackingRow(
                level=x,
                stage=m[x],
                rho_a=rho_a,
                rho_b=rho_b,
                error=err,
                bound=bnd,
                ok=err <= bnd,
            )
        )

    w = window or default_tail_window(horizon)
    series = DensitySeries.of_set(b, source="transfer output")
    extrema = window_extrema(series, w[0], w[1])
    active = [
        Fraction(p, dq)
        for (lo, hi, p, dq) in intervals
        if lo <= w[1] and hi > w[0]
    ]
    if w[0] < min(m[0], horizon):
        active.append(Fraction(0))
    if not active:
        active.append(Fraction(0))
    return TransferResult(
        b=b,
        modulus=mp,
        horizon=horizon,
        tracking=tuple(tracking),
        targets=tuple(targets),
        intervals=tuple(intervals),
        window=w,
        b_extrema=extrema,
        active_targets=tuple(active),
    )


def check_interval_property(result: TransferResult) -> list[tuple[int, int]]:
    """Per-element case property inside every modulus interval: the running
    density either sits weakly between its value at the interval's left
    endpoint and the target, or is within 1/(x+1) of the target.  Exact
    rational comparisons; returns (level, y) violations."""
    bits = result.b.bits
    cum = np.zeros(result.horizon + 1, dtype=np.int64)
    np.cumsum(bits, out=cum[1:])
    violations = []
    for x, (lo, hi, p, dq) in enumerate(result.intervals):
        anchor_c = int(cum[lo])
        anchor_d = lo if lo > 0 else 1
        for y in range(lo, hi):
            c = int(cum[y])
            d = y if y > 0 else 1
            ge_anchor = c * anchor_d >= anchor_c * d
            le_anchor = c * anchor_d <= anchor_c * d
            ge_target = c * dq >= p * d
            le_target = c * dq <= p * d
            between = (ge_anchor and le_target) or (le_anchor and ge_target)
            near = abs(c * dq - p * d) <= d
            if not (between or near):
                violations.append((x, y))
    return violations


# ---------------------------------------------------------------------------
# Staged mind-change certificate


@dataclass(frozen=True)
class TransferCertificate:
    """Staged approximation of the transfer output under the freeze rule.

    The per-element level estimate starts at the bound's value and only
    ever decreases (each decrease is backed by an observed stability
    window), and the staged set is recomputed exactly when the estimate
    changes.  That caps the staged set's mind changes at f(z); whether the
    staged limit agrees with the true transfer output is verified, not
    assumed, and reported per element.
    """

    horizon: int
    bound: BoundFunction
    modulus: ModulusPrefix
    f_values: np.ndarray
    g_changes: np.ndarray
    b_changes: np.ndarray
    g_final: np.ndarray
    b_limit: SetPrefix
    transfer_b: SetPrefix
    tracking: tuple[TrackingRow, ...]
    limit_agrees: np.ndarray
    monotone_ok: bool
    anchor_violations: tuple[int, ...]
    event_stages: int

    @property
    def bound_ok(self) -> np.ndarray:
        return self.b_changes <= self.f_values

    @property
    def all_bounded(self) -> bool:
        return bool((self.b_changes <= self.f_values).all())

    @property
    def all_agree(self) -> bool:
        return bool(self.limit_agrees.all())

    @property
    def disagreements(self) -> tuple[int, ...]:
        return tuple(int(z) for z in np.flatnonzero(~self.limit_agrees))

    def rows(self):
        for z in range(self.horizon):
            yield (
                z,
                int(self.f_values[z]),
                int(self.g_changes[z]),
                int(self.b_changes[z]),
                bool(self.b_changes[z] <= self.f_values[z]),
                bool(self.limit_agrees[z]),
            )


def _observed_modulus(
    stage: int,
    bound: BoundFunction,
    m0: int,
    last_change_of: np.ndarray,
    max_levels: int,
) -> list[int]:
    """Stage-``stage`` modulus estimate from observed data only.

    Level 0 needs no observation (it is a property of the bound alone).
    Higher levels are admitted only when a nonempty observed stability
    window exists, i.e. a candidate stage <= the current one.
    """
    values = [m0]
    prefix_last = 0
    while len(values) <= max_levels:
        nxt = len(values)
        if nxt - 1 < len(last_change_of):
            prefix_last = max(prefix_last, int(last_change_of[nxt - 1]))
        start = max(nxt * values[-1] + 1, prefix_last)
        cand = bound.first_stage_exceeding(nxt, start)
        if cand is None or cand > stage:
            break
        values.append(cand)
    return values


def certify_fce(
    table: ApproxTable,
    bound: BoundFunction,
    horizon: int,
) -> TransferCertificate:
    """Simulate the staged transfer approximation and certify its
    mind-change discipline.

    The simulation is event-driven: while the table still changes, the
    observed modulus estimate is recomputed each stage; once the table has
    settled, the only events left are the stages at which a new true
    modulus level first becomes observable, and those are exactly the
    modulus values themselves.  Elements are touched only when their level
    estimate drops, so the total work stays near ``horizon``.
    """
    result = transfer(table, bound, horizon)
    mp = result.modulus
    m = mp.values
    top = mp.top_level

    f_vals = bound.values_array(horizon)
    g_cur = f_vals.astype(np.int64).copy()
    g_changes = np.zeros(horizon, dtype=np.int64)
    b_changes = np.zeros(horizon, dtype=np.int64)
    b_cur = np.zeros(horizon, dtype=bool)
    monotone_ok = True
    events = 0

    a_ent = table.entries
    universe, s_table = table.universe, table.stages
    need = min(top, universe)
    # last_change_of[x] = final stage at which column x flips (0 if constant)
    flips = a_ent[:, 1:] != a_ent[:, :-1]
    last_change_full = np.zeros(universe, dtype=np.int64)
    if s_table > 1:
        any_flip = flips.any(axis=1)
        last_change_full[any_flip] = (
            s_table - 1 - np.argmax(flips[any_flip][:, ::-1], axis=1)
        )

    def snapshot_counts(stage: int) -> list[int]:
        col = a_ent[:, min(stage, s_table - 1)]
        counts = [0] * (top + 1)
        acc = 0
        for k in range(1, top + 1):
            if k <= universe:
                acc += int(col[k - 1])
            counts[k] = acc
        return counts

    def recompute_range(zs: range, hvals: list[int], counts_a: list[int]) -> None:
        if len(zs) == 0:
            return
        prefix = int(np.count_nonzero(b_cur[: zs.start]))
        for z in zs:
            h = hvals[0] if len(hvals) == 1 else hvals[z - zs.start]
            old = int(g_cur[z])
            new = min(old, h)
            if new < old:
                g_cur[z] = new
                g_changes[z] += 1
                if new == 0:
                    member = False
                else:
                    p = counts_a[new]
                    member = (prefix * new < p * z) if z > 0 else (0 < p)
                if member != bool(b_cur[z]):
                    b_cur[z] = member
                    b_changes[z] += 1
            if b_cur[z]:
                prefix += 1

    # Phase 1: stages recorded in the table, observed estimates per stage.
    m0 = m[0]
    observed_last = np.zeros(need, dtype=np.int64)
    prev_defined: list[int] = [m0]
    for s in range(1, s_table):
        changed = np.flatnonzero(a_ent[:, s] != a_ent[:, s - 1])
        for x in changed:
            if x < need:
                observed_last[x] = s
        defined = _observed_modulus(s, bound, m0, observed_last, need)
        if defined == prev_defined:
            continue
        events += 1
        counts_a = snapshot_counts(s)
        topval = min(defined[-1], horizon)
        hvals = [bisect.bisect_right(defined, z) for z in range(topval)]
        recompute_range(range(0, topval), hvals, counts_a)
        prev_defined = defined

    # Phase 2: the table is settled, so each remaining level becomes
    # observable exactly at its own stage; visit them in stage order.
    counts_final = snapshot_counts(s_table - 1)
    for x in range(len(prev_defined), top + 1):
        events += 1
        lo = m[x - 1] if x >= 1 else 0
        hi = min(m[x], horizon)
        if lo < hi:
            recompute_range(range(lo, hi), [x], counts_final)

    b_limit = SetPrefix(horizon, b_cur)
    agrees = b_cur == result.b.bits

    anchor_bad: list[int] = []
    if bound.kind == "identity":
        for z in range(min(horizon, top + 1)):
            if not z < m[z]:
                anchor_bad.append(z)
    else:
        for z in range(horizon):
            fz = int(f_vals[z])
            if fz <= top and not z < m[fz]:
                anchor_bad.append(z)

    return TransferCertificate(
        horizon=horizon,
        bound=bound,
        modulus=mp,
        f_values=f_vals,
        g_changes=g_changes,
        b_changes=b_changes,
        g_final=g_cur,
        b_limit=b_limit,
        transfer_b=result.b,
        tracking=result.tracking,
        limit_agrees=agrees,
        monotone_ok=monotone_ok,
        anchor_violations=tuple(anchor_bad),
        event_stages=events,
    )
