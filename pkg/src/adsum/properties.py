"""Black-box mechanism property checks: IC, monotonicity, scale-freeness.

Each checker takes any mechanism exposed as a plain ``query -> outcome``
callable, perturbs bids by rebuilding the query, and reports violations.
Deviations and sweep grids are deterministic, so a run over a fixed corpus
sample is reproducible. Incentive compatibility is judged under the
auction's internal CTR model (utility ``bid * internal_pctr - payment``);
payments are deliberately out of scope for the scale-freeness check, since
they legitimately scale with bids.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence

from .model import AuctionOutcome, EvalParams, QueryInstance
from .pricing import breakpoints

Mechanism = Callable[[QueryInstance], AuctionOutcome]

#: Default own-bid multiplier span for deviations and monotonicity sweeps.
_MULT_LO, _MULT_HI = 0.25, 4.0
_THRESHOLD_NUDGE = 1e-6


@dataclass(frozen=True)
class ViolationReport:
    """One detected property violation; gap always exceeds the tolerance."""

    kind: str
    query_id: str
    bidder: str
    baseline_value: float
    deviating_value: float
    gap: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def reports_to_jsonl(reports: Iterable[ViolationReport]) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def check_ic(
    mechanism: Mechanism,
    corpus_sample: Sequence[QueryInstance],
    deviations_per_bidder: int = 20,
    tol: float = 1e-5,
) -> list[ViolationReport]:
    """No bidder should gain more than ``tol`` by misreporting its bid.

    For every query and bidder, utility at the truthful bid (taken as the
    true value) is compared against a deterministic set of deviating bids:
    a geometric multiplier grid over [0.25, 4] topped up with bids just
    below and above each ranking threshold. The mechanism must report
    payments. ``tol`` should stay an order of magnitude above the payment
    quadrature tolerance, since deviation utilities inherit that error.
    """
    violations = []
    for query in corpus_sample:
        baseline = mechanism(query)
        if baseline.payments is None:
            raise ValueError("IC check requires a mechanism that computes payments")
        for i, ad in enumerate(query.ads):
            truthful = ad.bid * baseline.internal_pctr[i] - baseline.payments[i]
            for bid in deviation_bids(i, query, deviations_per_bidder):
                outcome = mechanism(_rebid(query, i, bid))
                assert outcome.payments is not None
                utility = ad.bid * outcome.internal_pctr[i] - outcome.payments[i]
                if utility - truthful > tol:
                    violations.append(
                        ViolationReport(
                            kind="ic",
                            query_id=query.query_id,
                            bidder=ad.ad_id,
                            baseline_value=truthful,
                            deviating_value=utility,
                            gap=utility - truthful,
                        )
                    )
    return violations


def check_monotone(
    mechanism: Mechanism,
    corpus_sample: Sequence[QueryInstance],
    grid: Sequence[float] | None = None,
) -> list[ViolationReport]:
    """Own prominence must be nondecreasing in the own bid (others fixed).

    ``grid`` is a list of bid multipliers, swept in increasing order;
    defaults to 25 geometric points over [0.25, 4].
    """
    if grid is None:
        grid = multiplier_grid(25)
    grid = sorted(grid)
    violations = []
    for query in corpus_sample:
        for i, ad in enumerate(query.ads):
            last = -1.0
            for mult in grid:
                bid = ad.bid * mult
                prom = mechanism(_rebid(query, i, bid)).prominence[i]
                if prom < last - 1e-12:
                    violations.append(
                        ViolationReport(
                            kind="monotonicity",
                            query_id=query.query_id,
                            bidder=ad.ad_id,
                            baseline_value=last,
                            deviating_value=prom,
                            gap=last - prom,
                        )
                    )
                last = prom
    return violations


def check_scale_free(
    mechanism: Mechanism,
    corpus_sample: Sequence[QueryInstance],
    scales: Sequence[float] = (0.5, 2.0, 10.0),
) -> list[ViolationReport]:
    """Scaling every bid by c > 0 must leave ordering and prominence alone.

    Ordering must match exactly; prominence entries within 1e-12. Payments
    are not compared -- they scale with the bids by design.
    """
    for c in scales:
        if c <= 0:
            raise ValueError(f"scales must be positive, got {c}")
    violations = []
    for query in corpus_sample:
        base = mechanism(query)
        for c in scales:
            scaled = mechanism(_scale_bids(query, c))
            if scaled.ordering != base.ordering:
                for slot, (i, j) in enumerate(
                    zip(base.ordering, scaled.ordering), start=1
                ):
                    if i != j:
                        violations.append(
                            ViolationReport(
                                kind="scale_free",
                                query_id=query.query_id,
                                bidder=query.ads[i].ad_id,
                                baseline_value=float(slot),
                                deviating_value=float(_slot_of(scaled.ordering, i)),
                                gap=abs(slot - _slot_of(scaled.ordering, i)),
                            )
                        )
                continue
            for i, ad in enumerate(query.ads):
                gap = abs(scaled.prominence[i] - base.prominence[i])
                if gap > 1e-12:
                    violations.append(
                        ViolationReport(
                            kind="scale_free",
                            query_id=query.query_id,
                            bidder=ad.ad_id,
                            baseline_value=base.prominence[i],
                            deviating_value=scaled.prominence[i],
                            gap=gap,
                        )
                    )
    return violations


def deviation_bids(
    i: int, query: QueryInstance, count: int, params: EvalParams | None = None
) -> list[float]:
    """Deterministic deviating bids for bidder i: grid plus threshold probes.

    Threshold probes straddle every bid where the bidder's ranking crosses
    another ad's product (these are where allocation discontinuities live);
    the rest of the budget is a geometric multiplier grid over
    ``[0.25 * bid, 4 * bid]``.
    """
    bid = query.ads[i].bid
    if bid <= 0.0 or count <= 0:
        return [bid * m for m in multiplier_grid(max(count, 0))]
    probe_source = replace(query.ads[i], bid=bid * _MULT_HI)
    ads = query.ads[:i] + (probe_source,) + query.ads[i + 1 :]
    crossings = [
        y
        for y in breakpoints(i, ads, params or EvalParams())
        if 0.0 < y < bid * _MULT_HI
    ]
    probes: list[float] = []
    for y in crossings:
        probes.extend((y * (1.0 - _THRESHOLD_NUDGE), y * (1.0 + _THRESHOLD_NUDGE)))
    probes = probes[: count // 3]
    grid = [bid * m for m in multiplier_grid(count - len(probes))]
    return sorted(grid + probes)


def multiplier_grid(count: int) -> list[float]:
    """Geometric grid of ``count`` multipliers spanning [0.25, 4]."""
    if count <= 0:
        return []
    if count == 1:
        return [1.0]
    ratio = (_MULT_HI / _MULT_LO) ** (1.0 / (count - 1))
    return [_MULT_LO * ratio**t for t in range(count)]


def _rebid(query: QueryInstance, i: int, bid: float) -> QueryInstance:
    ads = query.ads[:i] + (replace(query.ads[i], bid=bid),) + query.ads[i + 1 :]
    return replace(query, ads=ads)


def _scale_bids(query: QueryInstance, c: float) -> QueryInstance:
    return replace(query, ads=tuple(replace(ad, bid=ad.bid * c) for ad in query.ads))


def _slot_of(ordering: tuple[int, ...], i: int) -> int:
    return ordering.index(i) + 1 if i in ordering else -1
