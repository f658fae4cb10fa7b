"""Ordering, proportional prominence, optimal welfare, and word rounding."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsum.allocation import (
    compute_ecpm,
    gpa_allocate,
    optimal_welfare,
    rank_ads,
    words_from_prominence,
)
from adsum.model import EcpmVector, EvalParams, ProminenceVector

from conftest import WORKED_PRODUCTS_A, ads_from_products, grid_welfare_max

ecpm_lists = st.lists(
    st.floats(1e-6, 1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6
)


class TestRankAds:
    def test_sorts_by_product(self):
        ads = ads_from_products((1.0, 2.0, 3.0), (1.0, 1.0, 1.0))
        assert rank_ads(ads, 2) == (2, 1)

    def test_tie_breaks_to_lower_index(self):
        ads = ads_from_products((0.2, 0.2), (0.4, 0.4))
        assert rank_ads(ads, 4) == (0, 1)

    def test_mixed_products(self):
        # products 0.6, 0.9, 0.8
        ads = ads_from_products((0.6, 0.9, 0.8), (0.3, 0.9, 0.2))
        assert rank_ads(ads, 3) == (1, 2, 0)

    def test_empty_list_raises(self):
        with pytest.raises(ValueError, match="no candidates"):
            rank_ads((), 4)


class TestComputeEcpm:
    def test_position_discounts_applied(self, params_half):
        ads = ads_from_products(WORKED_PRODUCTS_A, (0.86, 0.82, 0.80))
        ecpm = compute_ecpm(ads, rank_ads(ads, 4), params_half)
        assert list(ecpm) == pytest.approx([0.645, 0.5769, 0.49977], abs=1e-12)

    def test_single_ad_no_discount(self, params_half):
        ads = ads_from_products((0.37,), (0.5,))
        ecpm = compute_ecpm(ads, (0,), params_half)
        assert ecpm[0] == pytest.approx(0.37)

    def test_unshown_beyond_k_gets_zero(self):
        params = EvalParams(beta=0.5, word_limit=60, max_slots=2)
        ads = ads_from_products((0.9, 0.8, 0.1), (1.0, 1.0, 1.0))
        ecpm = compute_ecpm(ads, rank_ads(ads, 2), params)
        assert ecpm[2] == 0.0

    def test_shown_ecpms_nonincreasing_along_slots(self, params_half):
        # Products sort descending and slot discounts decay, so the shown
        # ecpms can never increase down the slot order.
        rng = random.Random(13)
        for _ in range(25):
            n = rng.randint(1, 4)
            products = [rng.uniform(0.01, 3.0) for _ in range(n)]
            ctrs = [rng.uniform(0.05, 1.0) for _ in range(n)]
            ads = ads_from_products(products, ctrs)
            ordering = rank_ads(ads, params_half.max_slots)
            ecpm = compute_ecpm(ads, ordering, params_half)
            slot_values = [ecpm[i] for i in ordering]
            assert all(a >= b for a, b in zip(slot_values, slot_values[1:]))


class TestGpaAllocate:
    def test_worked_example(self, params_half):
        ads = ads_from_products(WORKED_PRODUCTS_A, (0.86, 0.82, 0.80))
        ecpm = compute_ecpm(ads, rank_ads(ads, 4), params_half)
        prom = gpa_allocate(ecpm, alpha=2.0)
        assert list(prom) == pytest.approx([0.417, 0.333, 0.250], abs=1e-3)

    def test_symmetric_entries_split_evenly(self):
        prom = gpa_allocate(EcpmVector((0.3, 0.3, 0.3)), alpha=1.7)
        assert list(prom) == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_hand_computed_squares(self):
        prom = gpa_allocate(EcpmVector((0.6, 0.3, 0.1)), alpha=2.0)
        assert list(prom) == pytest.approx([36 / 46, 9 / 46, 1 / 46], abs=1e-12)

    def test_infinite_alpha_winner_take_all(self):
        prom = gpa_allocate(EcpmVector((0.2, 0.9, 0.5)), alpha=math.inf)
        assert list(prom) == [0.0, 1.0, 0.0]

    def test_infinite_alpha_splits_exact_ties(self):
        prom = gpa_allocate(EcpmVector((0.9, 0.9, 0.5)), alpha=math.inf)
        assert list(prom) == [0.5, 0.5, 0.0]

    def test_all_zero_is_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            gpa_allocate(EcpmVector((0.0, 0.0)), alpha=2.0)

    def test_alpha_at_most_one_rejected(self):
        with pytest.raises(ValueError, match="alpha"):
            gpa_allocate(EcpmVector((0.5,)), alpha=1.0)

    @given(values=ecpm_lists, c=st.floats(1e-3, 1e3), beta=st.sampled_from([0.25, 1 / 3, 0.5]))
    def test_scale_free(self, values, c, beta):
        alpha = 1.0 / (1.0 - beta)
        base = gpa_allocate(EcpmVector(tuple(values)), alpha)
        scaled = gpa_allocate(EcpmVector(tuple(v * c for v in values)), alpha)
        for x, y in zip(base, scaled):
            assert abs(x - y) <= 1e-12

    @given(values=ecpm_lists)
    def test_weights_form_distribution(self, values):
        prom = gpa_allocate(EcpmVector(tuple(values)), alpha=2.0)
        assert abs(sum(prom.weights) - 1.0) <= 1e-12


class TestOptimalWelfare:
    def test_alpha_norm_value(self):
        w = optimal_welfare(EcpmVector((0.6, 0.3, 0.1)), beta=0.5)
        assert w == pytest.approx(math.sqrt(0.46), abs=1e-12)

    def test_single_entry_is_itself(self):
        assert optimal_welfare(EcpmVector((0.37,)), beta=0.25) == pytest.approx(0.37)

    def test_equal_entries_closed_form(self):
        # n equal entries e: norm = e * n**(1/alpha) = e * n**(1-beta)
        beta = 1 / 3
        w = optimal_welfare(EcpmVector((0.2,) * 4), beta=beta)
        assert w == pytest.approx(0.2 * 4 ** (1 - beta), rel=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 1.0, 1.5, -0.2])
    def test_beta_bounds(self, beta):
        with pytest.raises(ValueError):
            optimal_welfare(EcpmVector((0.5,)), beta=beta)

    @given(values=ecpm_lists, beta=st.sampled_from([0.25, 1 / 3, 0.5]))
    @settings(max_examples=50)
    def test_attained_by_proportional_allocation(self, values, beta):
        ecpm = EcpmVector(tuple(values))
        prom = gpa_allocate(ecpm, 1.0 / (1.0 - beta))
        attained = sum(e * p**beta for e, p in zip(ecpm, prom))
        assert attained == pytest.approx(optimal_welfare(ecpm, beta), abs=1e-9)

    def test_beats_dense_grid(self):
        rng = random.Random(7)
        for n in (2, 3, 4):
            values = tuple(rng.uniform(0.05, 2.0) for _ in range(n))
            for beta in (0.25, 0.5):
                best = optimal_welfare(EcpmVector(values), beta)
                grid_best = grid_welfare_max(values, beta, target_points=20_000)
                assert best >= grid_best - 1e-4


class TestWordsFromProminence:
    def test_worked_example_a(self):
        prom = ProminenceVector((0.417, 0.333, 0.250))
        assert words_from_prominence(prom, 60) == (25, 20, 15)

    def test_worked_example_b_drops_subword_ad(self):
        prom = ProminenceVector((0.583, 0.409, 0.008))
        assert words_from_prominence(prom, 60) == (35, 25, 0)

    def test_single_ad_takes_everything(self):
        assert words_from_prominence(ProminenceVector((1.0,)), 60) == (60,)

    def test_zero_prominence_means_zero_words(self):
        prom = ProminenceVector((0.7, 0.3, 0.0))
        budgets = words_from_prominence(prom, 50)
        assert budgets[2] == 0
        assert sum(budgets) == 50

    def test_tiny_budget_goes_to_top_ad(self):
        prom = ProminenceVector((0.4, 0.35, 0.25))
        assert words_from_prominence(prom, 1) == (1, 0, 0)

    def test_zero_word_limit(self):
        assert words_from_prominence(ProminenceVector((0.6, 0.4)), 0) == (0, 0)

    @given(
        weights=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
        word_limit=st.integers(0, 400),
    )
    @settings(max_examples=200)
    def test_totals_and_caps(self, weights, word_limit):
        total = sum(weights)
        if total > 1.0:
            weights = [w / total for w in weights]
        prom = ProminenceVector(tuple(weights))
        budgets = words_from_prominence(prom, word_limit)
        assert all(b >= 0 for b in budgets)
        assert sum(budgets) == math.floor(word_limit * sum(prom.weights) + 0.5)
        assert sum(budgets) <= word_limit
        for w, b in zip(prom, budgets):
            if w == 0.0:
                assert b == 0
