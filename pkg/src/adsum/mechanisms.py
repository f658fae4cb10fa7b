"""End-to-end auction mechanisms sharing one interface.

``run(query, spec)`` dispatches to one of three mechanisms returning an
``AuctionOutcome``: the proportional word-budget auction (``gpa_dwls``) and
two welfare benchmarks -- a greedy auction that only shows uncompressed
creatives (``greedy``) and a position auction splitting the word budget
evenly (``pos_fixed_length``). Benchmarks report payments as absent rather
than zero; truthful pricing is only defined for the proportional mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .allocation import compute_ecpm, gpa_allocate, rank_ads, words_from_prominence
from .model import (
    AdCandidate,
    AuctionOutcome,
    EvalParams,
    ProminenceVector,
    QueryInstance,
    internal_final_pctr,
)
from .pricing import myerson_payment
from .summarize import SummarizerSpec, split_words

MECHANISM_KINDS = ("gpa_dwls", "greedy", "pos_fixed_length")


@dataclass(frozen=True)
class MechanismSpec:
    """Mechanism selection plus the parameters every run needs."""

    kind: str = "gpa_dwls"
    params: EvalParams = field(default_factory=EvalParams)
    summarizer: SummarizerSpec = field(default_factory=SummarizerSpec)
    compute_payments: bool = False

    def __post_init__(self) -> None:
        if self.kind not in MECHANISM_KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if self.compute_payments and self.kind != "gpa_dwls":
            raise ValueError("payments are only defined for gpa_dwls")


def run(query: QueryInstance, spec: MechanismSpec) -> AuctionOutcome:
    """Run the configured mechanism on one query."""
    _validate(query)
    if spec.kind == "gpa_dwls":
        return run_gpa(query, spec)
    if spec.kind == "greedy":
        return run_greedy(query, spec)
    return run_pos_fixed(query, spec)


def run_gpa(query: QueryInstance, spec: MechanismSpec) -> AuctionOutcome:
    """Proportional word-budget auction.

    Ranks by bid * base_ctr, allocates prominence proportionally to
    ``ecpm**alpha``, rounds prominence into word budgets, and (optionally)
    prices each bidder with the Myerson own-bid integral.
    """
    _validate(query)
    ads = query.ads
    params = spec.params
    ordering = rank_ads(ads, params.max_slots)
    ecpm = compute_ecpm(ads, ordering, params)
    prominence = gpa_allocate(ecpm, params.alpha)
    budgets = words_from_prominence(prominence, params.word_limit)
    payments = None
    if spec.compute_payments:
        payments = tuple(myerson_payment(i, ads, params) for i in range(len(ads)))
    return AuctionOutcome(
        ordering=ordering,
        prominence=prominence,
        word_budgets=budgets,
        payments=payments,
        internal_pctr=_internal_pctrs(ads, ordering, prominence, params),
    )


def run_greedy(query: QueryInstance, spec: MechanismSpec) -> AuctionOutcome:
    """Show full creatives in bid * base_ctr order while they fit.

    Scans ads by descending product; an ad whose full creative does not fit
    in the remaining budget is skipped and scanning continues (first-fit).
    Shown ads are never compressed, so their budget equals their length.
    """
    _validate(query)
    ads = query.ads
    params = spec.params
    scan = sorted(range(len(ads)), key=lambda i: (-ads[i].bid * ads[i].base_ctr, i))
    budgets = [0] * len(ads)
    shown: list[int] = []
    remaining = params.word_limit
    for i in scan:
        if len(shown) == min(len(ads), params.max_slots):
            break
        length = len(split_words(ads[i].text))
        if length <= remaining:
            shown.append(i)
            budgets[i] = length
            remaining -= length
    prominence = _budget_prominence(budgets, params.word_limit)
    return AuctionOutcome(
        ordering=tuple(shown),
        prominence=prominence,
        word_budgets=tuple(budgets),
        payments=None,
        internal_pctr=_internal_pctrs(ads, tuple(shown), prominence, params),
    )


def run_pos_fixed(query: QueryInstance, spec: MechanismSpec) -> AuctionOutcome:
    """Position auction with an equal word budget per shown ad.

    The top ``min(n, k)`` ads each get ``floor(L / min(n, k))`` words;
    leftover words go one each to the highest-ecpm (earliest-slot) ads.
    """
    _validate(query)
    ads = query.ads
    params = spec.params
    ordering = rank_ads(ads, params.max_slots)
    shown_count = len(ordering)
    base, leftover = divmod(params.word_limit, shown_count)
    budgets = [0] * len(ads)
    for slot, i in enumerate(ordering):
        budgets[i] = base + (1 if slot < leftover else 0)
    prominence = _budget_prominence(budgets, params.word_limit)
    return AuctionOutcome(
        ordering=ordering,
        prominence=prominence,
        word_budgets=tuple(budgets),
        payments=None,
        internal_pctr=_internal_pctrs(ads, ordering, prominence, params),
    )


def _validate(query: QueryInstance) -> None:
    if not query.ads:
        raise ValueError("no candidates")
    for ad in query.ads:
        if not split_words(ad.text):
            raise ValueError(f"ad {ad.ad_id!r} has an empty creative")


def _budget_prominence(budgets: list[int], word_limit: int) -> ProminenceVector:
    if word_limit == 0:
        return ProminenceVector(tuple(0.0 for _ in budgets))
    return ProminenceVector(tuple(b / word_limit for b in budgets))


def _internal_pctrs(
    ads: tuple[AdCandidate, ...],
    ordering: tuple[int, ...],
    prominence: ProminenceVector,
    params: EvalParams,
) -> tuple[float, ...]:
    pctrs = [0.0] * len(ads)
    for slot, i in enumerate(ordering, start=1):
        pctrs[i] = internal_final_pctr(ads[i].base_ctr, slot, prominence[i], params)
    return tuple(pctrs)
