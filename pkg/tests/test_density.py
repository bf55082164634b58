"""Density functionals: exactness of counts, windows, the dominated
difference checker, Beatty sets, and the embedding identity."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ershovlab import (
    DensitySeries,
    InputError,
    RationalSequence,
    SetPrefix,
    beatty_set,
    check_limsup_difference,
    embed,
    prefix_density,
    window_extrema,
)
from ershovlab.density import check_series_invariants
from ershovlab.generate import oscillating_blocks_set, random_bits


def sets(max_universe=40):
    return st.integers(1, max_universe).flatmap(
        lambda n: st.lists(st.booleans(), min_size=n, max_size=n).map(
            lambda bits: SetPrefix(n, np.array(bits, dtype=bool))
        )
    )


class TestPrefixDensity:
    def test_direct_count(self):
        assert prefix_density(SetPrefix.from_elements(6, [0, 2]), 4) == Fraction(1, 2)

    def test_empty(self):
        sp = SetPrefix.empty(9)
        for n in range(1, 10):
            assert prefix_density(sp, n) == 0

    def test_beatty_exact_at_denominator(self):
        c = beatty_set(Fraction(3, 7), 7)
        assert prefix_density(c, 7) == Fraction(3, 7)

    def test_range_errors(self):
        sp = SetPrefix.empty(3)
        with pytest.raises(InputError):
            prefix_density(sp, 0)
        with pytest.raises(InputError):
            prefix_density(sp, 4)


class TestSeriesInvariants:
    @settings(max_examples=60, deadline=None)
    @given(sets())
    def test_structural(self, sp):
        series = DensitySeries.of_set(sp)
        assert check_series_invariants(series) == []
        for n in range(1, sp.universe + 1):
            rho = series.rho(n)
            assert 0 <= rho <= 1
            assert (n * rho).denominator == 1

    @settings(max_examples=60, deadline=None)
    @given(sets())
    def test_step_size(self, sp):
        series = DensitySeries.of_set(sp)
        for n in range(1, sp.universe):
            step = (n + 1) * series.rho(n + 1) - n * series.rho(n)
            assert step in (0, 1)


class TestWindowExtrema:
    def test_evens_closed_form(self):
        n = 1000
        evens = SetPrefix(n + 1, np.array([x % 2 == 0 for x in range(n + 1)], dtype=bool))
        series = DensitySeries.of_set(evens)
        ext = window_extrema(series, 100, 1000)
        # |evens below n| = ceil(n/2): max (1/2 + 1/2n) at the first odd
        # index, min 1/2 at even indices.
        assert ext.max_value == Fraction(51, 101) and ext.argmax == 101
        assert ext.min_value == Fraction(1, 2) and ext.argmin == 100

    def test_odds_closed_form(self):
        n = 1000
        odds = SetPrefix(n + 1, np.array([x % 2 == 1 for x in range(n + 1)], dtype=bool))
        ext = window_extrema(DensitySeries.of_set(odds), 100, 1000)
        assert ext.max_value == Fraction(1, 2) and ext.argmax == 100
        assert ext.min_value == Fraction(50, 101) and ext.argmin == 101

    def test_empty_set(self):
        ext = window_extrema(DensitySeries.of_set(SetPrefix.empty(10)), 1, 10)
        assert ext.max_value == 0 and ext.min_value == 0

    def test_oscillating_blocks_approach_extremes(self):
        # Blocks [4^k, 4^(k+1)) full for even k.  At the end of a full block
        # the density approaches 4/5; at the end of an empty one, 1/5.
        # Oracle: block-boundary counts summed directly.
        def boundary_count(k_top):
            total = 0
            for k in range(0, k_top + 1, 2):
                total += 3 * 4**k
            return total

        n_hi = 4**7
        x = oscillating_blocks_set(n_hi)
        assert x.count(n_hi) == boundary_count(6)
        ext_hi = window_extrema(DensitySeries.of_set(x), n_hi // 2, n_hi)
        assert abs(ext_hi.max_value - Fraction(4, 5)) < Fraction(1, 1000)

        n_lo = 4**8
        y = oscillating_blocks_set(n_lo)
        assert y.count(n_lo) == boundary_count(6)
        ext_lo = window_extrema(DensitySeries.of_set(y), n_lo // 2, n_lo)
        assert abs(ext_lo.min_value - Fraction(1, 5)) < Fraction(1, 1000)

    def test_empty_window_rejected(self):
        series = DensitySeries.of_set(SetPrefix.empty(5))
        with pytest.raises(InputError):
            window_extrema(series, 3, 2)
        with pytest.raises(InputError):
            window_extrema(series, 0, 5)

    @settings(max_examples=40, deadline=None)
    @given(sets(max_universe=30))
    def test_subadditivity_with_complement(self, sp):
        series = DensitySeries.of_set(sp)
        co = DensitySeries.of_set(sp.complement())
        lo, hi = max(1, sp.universe // 2), sp.universe
        assert (
            window_extrema(series, lo, hi).max_value
            + window_extrema(co, lo, hi).max_value
            >= 1
        )


class TestLimsupChecker:
    def test_constant_pair(self):
        a = RationalSequence([Fraction(1, 3)] * 8, lower=Fraction(0), upper=Fraction(1))
        rep = check_limsup_difference(a, a)
        assert rep.difference_estimate == 0
        assert rep.residual == 0
        assert rep.oscillation == 0 and rep.limit_plausible

    def test_domination_violation(self):
        a = RationalSequence([Fraction(0), Fraction(1)], lower=Fraction(-2), upper=Fraction(2))
        b = RationalSequence([Fraction(1), Fraction(0)], lower=Fraction(-2), upper=Fraction(2))
        with pytest.raises(InputError, match="domination"):
            check_limsup_difference(a, b)

    def test_missing_bounds(self):
        a = RationalSequence([Fraction(1)] * 4)
        with pytest.raises(InputError, match="bounds"):
            check_limsup_difference(a, a)

    def test_alternating_analytic_values(self):
        a_vals = [Fraction(3, 4) if n % 2 == 0 else Fraction(1, 4) for n in range(12)]
        b_vals = [v - Fraction(1, 3) for v in a_vals]
        a = RationalSequence(a_vals, lower=Fraction(-1), upper=Fraction(1))
        b = RationalSequence(b_vals, lower=Fraction(-1), upper=Fraction(1))
        rep = check_limsup_difference(a, b, window=(0, 11))
        assert rep.difference_estimate == Fraction(1, 3)
        assert rep.limsup_a == Fraction(3, 4)
        assert rep.limsup_b == Fraction(5, 12)
        assert rep.residual == 0


class TestBeatty:
    def test_half(self):
        assert beatty_set(Fraction(1, 2), 6).members() == (1, 3, 5)

    def test_full(self):
        assert beatty_set(Fraction(1), 5).members() == (0, 1, 2, 3, 4)

    def test_out_of_range(self):
        with pytest.raises(InputError):
            beatty_set(Fraction(7, 5), 5)

    @settings(max_examples=40, deadline=None)
    @given(st.fractions(min_value=0, max_value=1), st.integers(1, 300))
    def test_error_bound(self, q, n_max):
        c = beatty_set(q, n_max)
        count = 0
        for n in range(1, n_max + 1):
            count += int(c.bits[n - 1])
            assert count == (n * q.numerator) // q.denominator
            assert abs(Fraction(count, n) - q) < Fraction(1, n)


class TestEmbed:
    def test_odds_evens_example(self):
        r = SetPrefix(12, np.array([x % 2 == 1 for x in range(12)], dtype=bool))
        x = SetPrefix(6, np.array([v % 2 == 0 for v in range(6)], dtype=bool))
        res = embed(r, x)
        assert res.image.members() == (1, 5, 9)
        assert res.image.density(12) == Fraction(1, 4)
        # u = 6: g(6) = 3 and the identity multiplies out exactly.
        assert res.embedding.g(6) == 3
        assert res.image.density(6) == Fraction(1, 3)
        assert x.density(3) * r.density(6) == Fraction(1, 3)
        assert res.audit.exact

    def test_identity_range(self):
        x = SetPrefix.from_elements(8, [1, 5])
        res = embed(SetPrefix.full(8), x)
        assert res.image == x
        assert res.audit.exact

    def test_demands_beyond_range(self):
        r = SetPrefix.from_elements(8, [0, 1])
        x = SetPrefix.from_elements(8, [5])
        with pytest.raises(InputError, match="range has only"):
            embed(r, x)

    def test_seeded_pairs_exact(self):
        for i in range(25):
            r = SetPrefix(500, random_bits(1000 + i, 500, 35))
            k = r.size
            if k == 0:
                continue
            x = SetPrefix(k, random_bits(2000 + i, k, 60))
            res = embed(r, x)
            assert res.audit.exact and res.audit.checked > 0

    @settings(max_examples=40, deadline=None)
    @given(sets(max_universe=24), st.data())
    def test_identity_always_exact(self, r, data):
        k = r.size
        if k == 0:
            return
        bits = data.draw(st.lists(st.booleans(), min_size=k, max_size=k))
        x = SetPrefix(k, np.array(bits, dtype=bool))
        assert embed(r, x).audit.exact
