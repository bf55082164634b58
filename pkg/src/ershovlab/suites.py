"""End-to-end verification suites.

Each suite re-verifies one headline property of the pipeline on a seeded
corpus, at the scale the acceptance tests use by default.  Failures name
the violated invariant and the witness index.  Where a suite promises an
independent cross-check (modulus, decomposition), the second code path
lives here and is deliberately written from the defining recursion rather
than by calling the construction under test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constructions import (
    build_difference_pair,
    check_interval_property,
    certify_fce,
    decompose_nce,
    modulus,
    transfer,
    verify_decomposition,
    verify_modulus,
)
from .density import (
    RationalSequence,
    beatty_set,
    check_limsup_difference,
    embed,
    window_extrema,
    DensitySeries,
)
from .errors import InputError, VerificationError
from .generate import GeneratorSpec, SplitMix64, generate, random_bits
from .reals import LimsupReal, diff_representation
from .tables import ApproxTable, BoundFunction, SetPrefix


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    window: str = ""
    runtime: float = 0.0


@dataclass
class VerificationReport:
    name: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str, window: str = "", started: float | None = None) -> None:
        runtime = time.perf_counter() - started if started is not None else 0.0
        self.checks.append(CheckResult(name, passed, detail, window, runtime))

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            mark = "ok " if c.passed else "FAIL"
            win = f" ({c.window})" if c.window else ""
            out.append(f"[{mark}] {self.name}/{c.name}: {c.detail}{win} [{c.runtime:.2f}s]")
        return out


# ---------------------------------------------------------------------------
# 1. Conditional-density identity


def suite_conditional_identity(seed: int = 1, pairs: int = 100, universe: int = 10_000) -> VerificationReport:
    report = VerificationReport("conditional-identity")
    rng = SplitMix64(seed)
    t0 = time.perf_counter()
    total_checked = 0
    bad: list[str] = []
    for i in range(pairs):
        pct_r = rng.randint(10, 90)
        pct_x = rng.randint(10, 90)
        r_bits = random_bits(rng.next_u64(), universe, pct_r)
        range_set = SetPrefix(universe, r_bits)
        k = range_set.size
        if k == 0:
            bad.append(f"pair {i}: empty range set")
            continue
        x_bits = random_bits(rng.next_u64(), k, pct_x)
        x = SetPrefix(k, x_bits)
        res = embed(range_set, x)
        total_checked += res.audit.checked
        if not res.audit.exact:
            bad.append(f"pair {i}: identity fails at u={res.audit.mismatches[0]}")
    report.add(
        "exact-identity",
        not bad,
        bad[0] if bad else f"{pairs} pairs, {total_checked} u-points, all exact",
        window=f"u in [1, {universe}]",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 2. Beatty bound


def suite_beatty(max_n: int = 100_000, qs: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(3, 7), Fraction(113, 355))) -> VerificationReport:
    report = VerificationReport("beatty-bound")
    for q in qs:
        t0 = time.perf_counter()
        c = beatty_set(q, max_n)
        p, r = q.numerator, q.denominator
        witness = None
        count = 0
        for n in range(1, max_n + 1):
            count += int(c.bits[n - 1])
            if count != (n * p) // r:
                witness = (n, "count")
                break
            # |count/n - p/r| < 1/n  <=>  |count*r - n*p| < r
            if abs(count * r - n * p) >= r:
                witness = (n, "bound")
                break
        report.add(
            f"q={q}",
            witness is None,
            "floor-count and 1/n bound exact for all n"
            if witness is None
            else f"violated ({witness[1]}) at n={witness[0]}",
            window=f"n in [1, {max_n}]",
            started=t0,
        )
    return report


# ---------------------------------------------------------------------------
# 3. Dominated-difference checker


def _alternating_pair(length: int) -> tuple[RationalSequence, RationalSequence]:
    a_vals = [Fraction(3, 4) if n % 2 == 0 else Fraction(1, 4) for n in range(length)]
    b_vals = [v - Fraction(1, 3) for v in a_vals]
    a = RationalSequence(a_vals, lower=Fraction(-1), upper=Fraction(1))
    b = RationalSequence(b_vals, lower=Fraction(-1), upper=Fraction(1))
    return a, b


def suite_limsup_checker(seed: int = 3, pairs: int = 100, length: int = 64) -> VerificationReport:
    report = VerificationReport("limsup-checker")
    t0 = time.perf_counter()
    a, b = _alternating_pair(length)
    bad: list[str] = []
    for cutoff in range(2, length + 1, 2):
        rep = check_limsup_difference(a, b, window=(0, cutoff - 1))
        if rep.residual != 0:
            bad.append(f"cutoff {cutoff}: residual {rep.residual}")
        if rep.limsup_a != Fraction(3, 4) or rep.limsup_b != Fraction(5, 12):
            bad.append(f"cutoff {cutoff}: estimates {rep.limsup_a}, {rep.limsup_b}")
    report.add(
        "alternating-pair",
        not bad,
        bad[0] if bad else "residual exactly 0 and estimates 3/4, 5/12 at every even cutoff",
        window=f"cutoffs 2..{length}",
        started=t0,
    )

    t0 = time.perf_counter()
    rng = SplitMix64(seed)
    bad = []
    for i in range(pairs):
        n = rng.randint(4, 40)
        den = rng.randint(2, 12)
        b_vals = [Fraction(rng.randint(-den, den), den) for _ in range(n)]
        c = Fraction(rng.randint(0, 2 * den), den)
        a_vals = [v + c for v in b_vals]
        lo = min(b_vals)
        hi = max(a_vals)
        rep = check_limsup_difference(
            RationalSequence(a_vals, lower=lo, upper=hi),
            RationalSequence(b_vals, lower=lo, upper=hi),
        )
        if rep.residual != 0:
            bad.append(f"pair {i}: residual {rep.residual}")
            break
    report.add(
        "constant-difference",
        not bad,
        bad[0] if bad else f"{pairs} random dominated pairs, residual exactly 0",
        window="tail half",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 4. Decomposition


def nce_corpus(seed: int, tables: int, universe: int, stages: int, max_level: int, settle: str = "uniform") -> list[ApproxTable]:
    rng = SplitMix64(seed)
    out = []
    for i in range(tables):
        budget = 1 + i % max_level
        out.append(
            generate(
                GeneratorSpec(
                    kind="nce",
                    universe=universe,
                    stages=stages,
                    seed=rng.next_u64(),
                    settle=settle,
                    budget=budget,
                )
            )
        )
    return out


def suite_decomposition(seed: int = 4, tables: int = 500, universe: int = 512, stages: int = 64, max_level: int = 6) -> VerificationReport:
    report = VerificationReport("decomposition")
    corpus = nce_corpus(seed, tables, universe, stages, max_level)
    t0 = time.perf_counter()
    bad: list[str] = []
    for i, table in enumerate(corpus):
        dec = decompose_nce(table)
        issues = verify_decomposition(table, dec)
        if issues:
            bad.append(f"table {i}: {issues[0]}")
            break
        # Exact difference identity on integer prefix counts: for every s,
        # |A restricted below s| equals the alternating sum of layer counts.
        a_counts = np.cumsum(table.limit_bits().astype(np.int64))
        alt = np.zeros(universe, dtype=np.int64)
        for j, layer in enumerate(dec.layers, start=1):
            cnt = np.cumsum(layer.limit_bits().astype(np.int64))
            alt += cnt if j % 2 == 1 else -cnt
        if not (alt == a_counts).all():
            s_bad = int(np.flatnonzero(alt != a_counts)[0]) + 1
            bad.append(f"table {i}: density identity fails at s={s_bad}")
            break
        if i % 20 == 0:
            rep = diff_representation(table)
            if not rep.exact:
                bad.append(f"table {i}: rational residual nonzero")
                break
    report.add(
        "layers-and-identity",
        not bad,
        bad[0]
        if bad
        else f"{tables} tables: nesting, monotonicity, stagewise reassembly, density identity all exact",
        window=f"s in [1, {universe}]",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 5. Modulus


def _brute_modulus(table: ApproxTable, bound: BoundFunction, horizon: int) -> list[int]:
    """Literal mu-recursion, scanning stability over the recorded matrix
    (columns are certified constant beyond it)."""
    ent = table.entries
    s_count = table.stages

    def stable_from(s: int, k: int) -> bool:
        if s >= s_count:
            return True
        tail = ent[:k, s:]
        last = ent[:k, -1:]
        return bool((tail == last).all())

    def f(s: int) -> int:
        return bound(s)

    s = 0
    while True:
        try:
            if f(s) > 0:
                break
        except InputError:
            raise VerificationError("bound exhausted before level 0")
        s += 1
    values = [s]
    while values[-1] < horizon:
        x1 = len(values)
        s = x1 * values[-1] + 1
        while True:
            try:
                ok = f(s) > x1 and stable_from(s, x1)
            except InputError:
                raise VerificationError(f"bound exhausted at level {x1}")
            if ok:
                break
            s += 1
        values.append(s)
    return values


def early_corpus(seed: int, tables: int, universe: int, stages: int, budget: int = 6) -> list[ApproxTable]:
    rng = SplitMix64(seed)
    return [
        generate(
            GeneratorSpec(
                kind="delta2",
                universe=universe,
                stages=stages,
                seed=rng.next_u64(),
                settle="early",
                budget=budget,
            )
        )
        for _ in range(tables)
    ]


def suite_modulus(seed: int = 5, tables: int = 50, universe: int = 512, stages: int = 64, horizon: int = 100_000) -> VerificationReport:
    report = VerificationReport("modulus")
    identity = BoundFunction.identity()

    t0 = time.perf_counter()
    empty = ApproxTable(16, 2, np.zeros((16, 2), dtype=bool), {x: 0 for x in range(16)})
    mp = modulus(empty, identity, 65)
    expected = (1, 2, 5, 16, 65)
    report.add(
        "empty-table-prefix",
        mp.values == expected,
        f"m = {mp.values} (expected {expected})",
        window="horizon 65",
        started=t0,
    )

    t0 = time.perf_counter()
    corpus = early_corpus(seed, tables, universe, stages)
    bad: list[str] = []
    for i, table in enumerate(corpus):
        mp = modulus(table, identity, horizon)
        brute = _brute_modulus(table, identity, horizon)
        if list(mp.values) != brute:
            bad.append(f"table {i}: recursion mismatch {mp.values} vs {brute}")
            break
        issues = verify_modulus(mp)
        if issues:
            bad.append(f"table {i}: {issues[0]}")
            break
    report.add(
        "corpus-vs-brute-force",
        not bad,
        bad[0] if bad else f"{tables} tables: level-for-level match, growth and bound conditions hold",
        window=f"horizon {horizon}",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 6. Transfer tracking


def suite_transfer_tracking(seed: int = 6, tables: int = 50, universe: int = 512, stages: int = 64, horizon: int = 100_000) -> VerificationReport:
    report = VerificationReport("transfer-tracking")
    identity = BoundFunction.identity()
    corpus = early_corpus(seed, tables, universe, stages)

    t0 = time.perf_counter()
    bad: list[str] = []
    levels_seen = set()
    for i, table in enumerate(corpus):
        res = transfer(table, identity, horizon)
        levels_seen.add(len(res.tracking))
        for row in res.tracking:
            if not row.ok:
                bad.append(
                    f"table {i}: |rho_m({row.level})(B) - rho_{row.level}(A)| = {row.error} > 1/{row.level}"
                )
                break
        if bad:
            break
        violations = check_interval_property(res)
        if violations:
            x, y = violations[0]
            bad.append(f"table {i}: interval case property fails at level {x}, y={y}")
            break
    report.add(
        "tracking-bound",
        not bad,
        bad[0]
        if bad
        else f"{tables} tables: tracking error <= 1/x at every level (levels per table: {sorted(levels_seen)}), interval property exact",
        window=f"horizon {horizon}",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 7. Certificate


def suite_certificate(seed: int = 6, tables: int = 50, universe: int = 512, stages: int = 64, horizon: int = 100_000) -> VerificationReport:
    report = VerificationReport("certificate")
    identity = BoundFunction.identity()
    corpus = early_corpus(seed, tables, universe, stages)

    t0 = time.perf_counter()
    bad: list[str] = []
    for i, table in enumerate(corpus):
        cert = certify_fce(table, identity, horizon)
        if not cert.monotone_ok:
            bad.append(f"table {i}: level estimate increased")
            break
        if not cert.all_bounded:
            z = int(np.flatnonzero(cert.b_changes > cert.f_values)[0])
            bad.append(f"table {i}: staged changes exceed f at z={z}")
            break
        if cert.anchor_violations:
            bad.append(f"table {i}: z >= m(f(z)) at z={cert.anchor_violations[0]}")
            break
        if not cert.all_agree:
            bad.append(f"table {i}: staged limit differs at z={cert.disagreements[0]}")
            break
    report.add(
        "freeze-rule-certificate",
        not bad,
        bad[0]
        if bad
        else f"{tables} tables: changes <= f(z), anchors hold, staged limit equals transfer output",
        window=f"horizon {horizon}",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 8. Nested pair


def suite_ce_pair(universe: int = 100_000, length: int = 16) -> VerificationReport:
    report = VerificationReport("ce-pair")
    t0 = time.perf_counter()
    a = LimsupReal.constant(Fraction(2, 3), length, name="outer target")
    b = LimsupReal.constant(Fraction(1, 3), length, name="inner target")
    pair = build_difference_pair(a, b, Fraction(1, 2), universe)
    issues: list[str] = []
    if (pair.inner.entries & ~pair.outer.entries).any():
        x, s = np.argwhere(pair.inner.entries & ~pair.outer.entries)[0]
        issues.append(f"inner not inside outer at x={x}, s={s}")
    inner_limit = pair.inner.limit_bits()
    if (inner_limit & ~pair.base.bits).any():
        issues.append("inner set leaves the base set")
    outer_limit = pair.outer.limit_bits()
    if (pair.base.bits & ~outer_limit).any():
        issues.append("outer set does not contain the base set")
    rho_a = Fraction(int(outer_limit.sum()), universe)
    rho_b = Fraction(int(inner_limit.sum()), universe)
    tol = Fraction(1, 100)
    if abs(rho_a - Fraction(2, 3)) > tol:
        issues.append(f"outer density {rho_a} off 2/3 by more than 1/100")
    if abs(rho_b - Fraction(1, 3)) > tol:
        issues.append(f"inner density {rho_b} off 1/3 by more than 1/100")
    report.add(
        "nested-pair",
        not issues,
        issues[0]
        if issues
        else f"B inside A at every stage; rho_N(A)={rho_a} ~ 2/3, rho_N(B)={rho_b} ~ 1/3 within 1/100",
        window=f"N={universe}",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# 9. Upper/lower preservation through the transfer


def suite_upper_lower(universe: int = 512, stages: int = 64, horizon: int = 100_000) -> VerificationReport:
    report = VerificationReport("upper-lower")
    identity = BoundFunction.identity()
    t0 = time.perf_counter()
    table = generate(GeneratorSpec(kind="oscblocks", universe=universe, stages=stages))
    res = transfer(table, identity, horizon)
    tol = Fraction(1, 20)
    issues: list[str] = []

    rows = res.tracking
    if not rows:
        issues.append("no tracked levels")
    else:
        top = rows[-1].level
        lo_lvl = max(1, (top + 1) // 2)
        tail = [r for r in rows if r.level >= lo_lvl]
        for r in tail:
            if abs(r.rho_b - r.rho_a) > tol:
                issues.append(
                    f"sampled density at level {r.level} off by {abs(r.rho_b - r.rho_a)}"
                )
        samp_max = max(r.rho_b for r in tail)
        samp_min = min(r.rho_b for r in tail)
        targ_max = max(r.rho_a for r in tail)
        targ_min = min(r.rho_a for r in tail)
        if abs(samp_max - targ_max) > tol or abs(samp_min - targ_min) > tol:
            issues.append("sampled window extrema drift from source extrema")

    act_max, act_min = res.active_max, res.active_min
    e = res.b_extrema
    if abs(e.max_value - act_max) > tol or abs(e.min_value - act_min) > tol:
        issues.append(
            f"output tail extrema ({e.max_value}, {e.min_value}) off active targets ({act_max}, {act_min})"
        )

    # Same-index-window comparison is reported but not asserted: the output's
    # tail sits inside a single modulus interval, so it is near one target
    # value, not near the source's same-index extrema.
    a_series = DensitySeries.of_set(table.snapshot(stages - 1), source="source")
    a_ext = window_extrema(a_series, universe // 2, universe)
    literal = (
        f"literal same-window: A [{a_ext.min_value},{a_ext.max_value}] vs "
        f"B [{e.min_value},{e.max_value}]"
    )
    report.add(
        "upper-lower-preservation",
        not issues,
        issues[0]
        if issues
        else f"sampled and windowed extrema within 1/20 of targets; {literal}",
        window=f"levels tail + [{e.lo},{e.hi}]",
        started=t0,
    )
    return report


# ---------------------------------------------------------------------------
# Registry

SUITES = {
    "conditional-identity": suite_conditional_identity,
    "beatty-bound": suite_beatty,
    "limsup-checker": suite_limsup_checker,
    "decomposition": suite_decomposition,
    "modulus": suite_modulus,
    "transfer-tracking": suite_transfer_tracking,
    "certificate": suite_certificate,
    "ce-pair": suite_ce_pair,
    "upper-lower": suite_upper_lower,
}

QUICK_OVERRIDES: dict[str, dict] = {
    "conditional-identity": {"pairs": 10, "universe": 1000},
    "beatty-bound": {"max_n": 5000},
    "limsup-checker": {"pairs": 20},
    "decomposition": {"tables": 40},
    "modulus": {"tables": 10, "horizon": 5000},
    "transfer-tracking": {"tables": 5, "horizon": 20_000},
    "certificate": {"tables": 5, "horizon": 20_000},
    "ce-pair": {"universe": 20_000},
    "upper-lower": {"horizon": 20_000},
}


def run_suite(name: str, quick: bool = False, **kwargs) -> VerificationReport:
    """Run a named suite (or 'all'); unknown names are input errors."""
    if name == "all":
        combined = VerificationReport("all")
        for key in SUITES:
            sub = run_suite(key, quick=quick)
            combined.checks.extend(
                CheckResult(f"{key}/{c.name}", c.passed, c.detail, c.window, c.runtime)
                for c in sub.checks
            )
        return combined
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 'all'")
    if quick:
        merged = dict(QUICK_OVERRIDES.get(name, {}))
        merged.update(kwargs)
        kwargs = merged
    return SUITES[name](**kwargs)
