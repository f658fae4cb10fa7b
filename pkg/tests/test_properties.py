"""Property checkers: clean mechanisms pass, rigged fixtures get caught."""

import json
import random
from dataclasses import replace

import pytest

from adsum.mechanisms import MechanismSpec, run
from adsum.model import AuctionOutcome, ProminenceVector
from adsum.properties import (
    check_ic,
    check_monotone,
    check_scale_free,
    deviation_bids,
    multiplier_grid,
    reports_to_jsonl,
)

from conftest import random_query


@pytest.fixture
def sample():
    rng = random.Random(2024)
    return [random_query(rng, query_id=f"pq{t}") for t in range(15)]


def gpa_mechanism(params, payments=True):
    spec = MechanismSpec(kind="gpa_dwls", params=params, compute_payments=payments)
    return lambda query: run(query, spec)


def first_price_mechanism(params):
    """Rigged fixture: charges bid * CTR outright instead of the truthful
    own-bid integral; overbidding the true value is never optimal here, so
    the IC checker must flag it."""
    spec = MechanismSpec(kind="gpa_dwls", params=params)

    def mechanism(query):
        outcome = run(query, spec)
        payments = tuple(
            ad.bid * q for ad, q in zip(query.ads, outcome.internal_pctr)
        )
        return replace(outcome, payments=payments)

    return mechanism


def inverted_mechanism(params):
    """Rigged fixture: prominence decreases as the own bid grows."""

    def mechanism(query):
        total = sum(ad.bid for ad in query.ads)
        weights = tuple((total - ad.bid) / (total * max(len(query.ads) - 1, 1)) for ad in query.ads)
        return AuctionOutcome(
            ordering=tuple(range(len(query.ads))),
            prominence=ProminenceVector(weights),
            word_budgets=tuple(0 for _ in query.ads),
            payments=tuple(0.0 for _ in query.ads),
            internal_pctr=tuple(0.0 for _ in query.ads),
        )

    return mechanism


def constant_mechanism(params):
    def mechanism(query):
        n = len(query.ads)
        return AuctionOutcome(
            ordering=tuple(range(n)),
            prominence=ProminenceVector(tuple(1.0 / n for _ in range(n))),
            word_budgets=tuple(0 for _ in query.ads),
            payments=tuple(0.0 for _ in query.ads),
            internal_pctr=tuple(0.5 for _ in query.ads),
        )

    return mechanism


class TestCheckIC:
    def test_proportional_auction_is_truthful(self, sample, params_half):
        violations = check_ic(gpa_mechanism(params_half), sample, 10, tol=1e-5)
        assert violations == []

    def test_single_bidder_never_violates(self, params_half):
        rng = random.Random(8)
        queries = [random_query(rng, n_ads=1, query_id=f"solo{t}") for t in range(5)]
        assert check_ic(gpa_mechanism(params_half), queries, 12, tol=1e-5) == []

    def test_first_price_fixture_is_caught(self, sample, params_half):
        violations = check_ic(first_price_mechanism(params_half), sample, 10, tol=1e-5)
        assert len(violations) >= 1
        assert all(v.kind == "ic" and v.gap > 1e-5 for v in violations)

    def test_requires_payments(self, sample, params_half):
        with pytest.raises(ValueError, match="payments"):
            check_ic(gpa_mechanism(params_half, payments=False), sample[:1], 4)

    def test_deviations_are_deterministic(self, sample):
        bids_a = deviation_bids(0, sample[0], 20)
        bids_b = deviation_bids(0, sample[0], 20)
        assert bids_a == bids_b
        assert len(bids_a) == 20


class TestCheckMonotone:
    def test_proportional_auction_monotone(self, sample, params_half):
        mech = gpa_mechanism(params_half, payments=False)
        assert check_monotone(mech, sample, multiplier_grid(25)) == []

    def test_constant_allocation_clean(self, sample, params_half):
        assert check_monotone(constant_mechanism(params_half), sample) == []

    def test_inverted_allocation_caught(self, sample, params_half):
        violations = check_monotone(inverted_mechanism(params_half), sample)
        assert violations
        assert all(v.kind == "monotonicity" for v in violations)


class TestCheckScaleFree:
    def test_proportional_auction_scale_free(self, sample, params_half):
        mech = gpa_mechanism(params_half, payments=False)
        assert check_scale_free(mech, sample, (0.5, 2.0, 10.0)) == []

    def test_greedy_shown_set_scale_free(self, sample, params_half):
        spec = MechanismSpec(kind="greedy", params=params_half)
        assert check_scale_free(lambda q: run(q, spec), sample) == []

    def test_payments_are_not_flagged(self, sample, params_half):
        # Payments scale with bids; the checker must only compare allocations.
        mech = gpa_mechanism(params_half, payments=True)
        assert check_scale_free(mech, sample[:5], (2.0,)) == []

    def test_rejects_nonpositive_scale(self, sample, params_half):
        with pytest.raises(ValueError, match="positive"):
            check_scale_free(constant_mechanism(params_half), sample, (0.0,))


class TestReports:
    def test_jsonl_round_trip(self, sample, params_half):
        violations = check_monotone(inverted_mechanism(params_half), sample[:3])
        lines = reports_to_jsonl(violations).splitlines()
        assert len(lines) == len(violations)
        parsed = json.loads(lines[0])
        assert parsed["kind"] == "monotonicity"
        assert parsed["gap"] > 0
