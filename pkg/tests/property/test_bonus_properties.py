"""Property-based tests for exploration bonuses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from scal_plus.bonus import (
    BonusParams,
    BonusVariant,
    HolderParams,
    bernstein_reward_beta,
    beta,
    bonus_continuous,
    bonus_discrete,
    bonus_vector,
    diagnostic_d,
    phi,
    smoothness_term,
)
from scal_plus.errors import MissingHolderParamsError

counts = st.integers(min_value=0, max_value=10**6)
steps = st.integers(min_value=1, max_value=10**7)
caps = st.floats(min_value=0.0, max_value=10.0)


def params(**overrides) -> BonusParams:
    base = {"span_cap": 2.0, "r_max": 1.0, "delta": 0.05, "num_states": 6, "num_actions": 2}
    base.update(overrides)
    return BonusParams(**base)


class TestBeta:
    def test_unit_width(self) -> None:
        p = params()
        n = 7.0 * math.log(2 * 12 * 100 / 0.05)
        assert beta(n, 100, p) == pytest.approx(1.0)

    def test_zero_count_uses_floor(self) -> None:
        p = params()
        assert beta(0, 50, p) == beta(1, 50, p)

    def test_array_input(self) -> None:
        out = beta(np.array([[1, 4], [9, 16]]), 10, params())
        assert out.shape == (2, 2)
        assert out[0, 0] == pytest.approx(2 * out[0, 1])


class TestBonusDiscrete:
    def test_caps_bind_without_data(self) -> None:
        p = params(span_cap=3.0)
        assert bonus_discrete(0, 1, p) == pytest.approx(2 * 3.0 + 1.0)

    def test_vanishes_with_data(self) -> None:
        assert bonus_discrete(10**12, 10, params()) < 1e-3

    def test_closed_form(self) -> None:
        p = params(span_cap=2.0)
        n, t_k = 100, 1000
        b = math.sqrt(7.0 * math.log(2 * 6 * 2 * t_k / 0.05) / n)
        expected = 2.0 * min(b + 1.0 / (n + 1), 2.0) + min(b, 1.0)
        assert bonus_discrete(n, t_k, p) == pytest.approx(expected, rel=1e-12)

    def test_uncapped_dominates_capped(self) -> None:
        capped = bonus_discrete(0, 10, params())
        uncapped = bonus_discrete(0, 10, params(capped=False))
        assert uncapped > capped

    @given(counts, counts, steps, caps)
    @settings(max_examples=200)
    def test_monotone_in_counts(self, n1: int, n2: int, t_k: int, c: float) -> None:
        p = params(span_cap=c)
        low, high = sorted((n1, n2))
        assert bonus_discrete(high, t_k, p) <= bonus_discrete(low, t_k, p) + 1e-12

    @given(counts, steps, steps, caps)
    @settings(max_examples=200)
    def test_monotone_in_time(self, n: int, t1: int, t2: int, c: float) -> None:
        p = params(span_cap=c)
        early, late = sorted((t1, t2))
        assert bonus_discrete(n, early, p) <= bonus_discrete(n, late, p) + 1e-12

    @given(counts, steps, caps)
    @settings(max_examples=200)
    def test_within_caps(self, n: int, t_k: int, c: float) -> None:
        p = params(span_cap=c)
        assert 0.0 <= bonus_discrete(n, t_k, p) <= 2 * c + p.r_max + 1e-12

    def test_invalid_delta(self) -> None:
        with pytest.raises(ValidationError):
            params(delta=1.5)


class TestBernsteinReward:
    def test_zero_variance_keeps_linear_term(self) -> None:
        p = params(variant=BonusVariant.BERNSTEIN_REWARD)
        b = math.log(2 * 12 * 1000 / 0.05)
        assert bernstein_reward_beta(11, 1000, 0.0, p) == pytest.approx(49.0 / 3.0 * b / 10)

    def test_single_sample_floor(self) -> None:
        p = params()
        b = math.log(2 * 12 * 1000 / 0.05)
        assert bernstein_reward_beta(1, 1000, 0.0, p) == pytest.approx(49.0 / 3.0 * b)

    @given(st.integers(min_value=1000, max_value=10**7))
    @settings(max_examples=100)
    def test_tighter_than_hoeffding_with_many_samples(self, n: int) -> None:
        p = params()
        assert bernstein_reward_beta(n, 1000, 0.0, p) < p.r_max * beta(n, 1000, p)

    def test_variant_selects_reward_width(self) -> None:
        n, t_k = 5000, 1000
        hoeffding = bonus_discrete(n, t_k, params())
        bernstein = bonus_discrete(n, t_k, params(variant=BonusVariant.BERNSTEIN_REWARD))
        assert bernstein < hoeffding


class TestBonusContinuous:
    holder = HolderParams(L=1.0, alpha=1.0)

    def test_degenerate_holder_matches_discrete(self) -> None:
        p = params(holder=HolderParams(L=0.0, alpha=1.0))
        assert bonus_continuous(7, 100, p) == bonus_discrete(7, 100, p)

    def test_irreducible_term(self) -> None:
        p = params(holder=self.holder, num_states=10)
        expected = (p.span_cap + p.r_max) * 1.0 / 10
        assert bonus_continuous(10**15, 10, p) == pytest.approx(expected, abs=1e-5)

    def test_doubling_intervals_halves_smoothness(self) -> None:
        coarse = smoothness_term(params(holder=self.holder, num_states=8))
        fine = smoothness_term(params(holder=self.holder, num_states=16))
        assert fine == pytest.approx(coarse / 2)

    def test_missing_holder(self) -> None:
        with pytest.raises(MissingHolderParamsError):
            bonus_continuous(1, 1, params())

    @given(counts, steps, caps)
    @settings(max_examples=100)
    def test_adds_exactly_the_smoothness_term(self, n: int, t_k: int, c: float) -> None:
        p = params(span_cap=c, holder=HolderParams(L=0.7, alpha=0.5))
        gap = bonus_continuous(n, t_k, p) - bonus_discrete(n, t_k, p)
        assert gap == pytest.approx(smoothness_term(p), abs=1e-12)


class TestDiagnosticBonus:
    @given(counts, steps, st.integers(min_value=2, max_value=6), caps)
    @settings(max_examples=200)
    def test_dominates_bonus(self, n: int, t_k: int, gamma: int, c: float) -> None:
        p = params(span_cap=c)
        assert diagnostic_d(n, t_k, gamma, p) >= bonus_discrete(n, t_k, p) - 1e-12

    def test_caps_bind_without_data(self) -> None:
        p = params(span_cap=1.5)
        assert diagnostic_d(0, 1, 3, p) == pytest.approx(bonus_discrete(0, 1, p))

    def test_continuous_adds_smoothness(self) -> None:
        p = params(holder=HolderParams(L=1.0, alpha=1.0), num_states=4)
        assert diagnostic_d(10**6, 10, 4, p, continuous=True) > smoothness_term(p)

    def test_closed_form_widths(self) -> None:
        p = params(holder=HolderParams(L=1.0, alpha=1.0), num_states=4)
        log3 = math.log(3 * 4 * 2 * 500 / 0.05)
        continuous = math.sqrt(7 * 4 * log3 / 50) + 14 * 4 * log3 / 50
        discrete = math.sqrt(7 * 2 * log3 / 50) + 14 * 4 * log3 / 50
        assert phi(50, 500, 4, p, continuous=True) == pytest.approx(continuous, rel=1e-12)
        assert phi(50, 500, 3, p, continuous=False) == pytest.approx(discrete, rel=1e-12)

        reward = math.sqrt(7 * math.log(2 * 4 * 2 * 500 / 0.05) / 50)
        smooth = (2.0 + 1.0) * 1.0 * 4**-1.0
        capped = 2.0 * min(continuous + 1 / 51, 2.0) + min(reward, 1.0) + smooth
        assert diagnostic_d(50, 500, 4, p, continuous=True) == pytest.approx(capped, rel=1e-12)

        loose = params(holder=HolderParams(L=1.0, alpha=1.0), num_states=4, capped=False)
        uncapped = 2.0 * (continuous + 1 / 51) + reward + smooth
        d = diagnostic_d(50, 500, 4, loose, continuous=True)
        assert d == pytest.approx(uncapped, rel=1e-12)
        assert diagnostic_d(50, 500, 3, loose) == pytest.approx(
            2.0 * (discrete + 1 / 51) + reward, rel=1e-12
        )


class TestBonusVector:
    def test_shape_and_continuous_switch(self) -> None:
        n = np.array([[0, 3], [10, 100]])
        discrete = bonus_vector(n, 10, np.zeros((2, 2)), params(num_states=2))
        continuous = bonus_vector(
            n, 10, np.zeros((2, 2)), params(num_states=2, holder=HolderParams(L=1.0, alpha=1.0))
        )
        assert discrete.shape == continuous.shape == (2, 2)
        assert np.all(continuous > discrete)
        assert discrete[0, 0] >= discrete[1, 1]
