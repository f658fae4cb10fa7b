"""Shared domain types and the auction's internal factorized CTR model.

The auction allocates each ad a *prominence* weight on the simplex. Its
internal click model factorizes a shown ad's CTR into three parts: the base
CTR of the full creative shown alone, a geometric position discount for the
slot it occupies, and a concave compression discount ``prominence ** beta``
for how much of the word budget it received.

All types are immutable values and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Slack allowed on simplex sums; covers float roundoff of normalized weights.
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class AdCandidate:
    """One bidder's creative text, per-click bid, and standalone CTR.

    ``base_ctr`` is the click-through rate predicted for the full creative
    shown alone at the top position; the auction discounts it for slot and
    compression. ``url`` is display plumbing and never enters text scoring.
    """

    ad_id: str
    url: str
    text: str
    bid: float
    base_ctr: float

    def __post_init__(self) -> None:
        if self.bid < 0:
            raise ValueError(f"ad {self.ad_id!r}: bid must be >= 0, got {self.bid}")
        if not 0.0 <= self.base_ctr <= 1.0:
            raise ValueError(
                f"ad {self.ad_id!r}: base_ctr must be in [0, 1], got {self.base_ctr}"
            )


@dataclass(frozen=True)
class QueryInstance:
    """A query with its competing ad candidates, in input (tie-break) order."""

    query_id: str
    query: str
    ads: tuple[AdCandidate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ads", tuple(self.ads))
        ids = [ad.ad_id for ad in self.ads]
        if len(set(ids)) != len(ids):
            raise ValueError(f"query {self.query_id!r}: duplicate ad_ids {ids}")


@dataclass(frozen=True)
class EvalParams:
    """Knobs shared by the auction and the evaluation model.

    ``beta`` is the compression exponent in (0, 1]; the proportional-
    allocation exponent is derived from it (``alpha`` property) and equals
    ``1 / (1 - beta)``, or infinity when ``beta == 1``. ``pos_base`` is the
    per-slot geometric discount (slot s gets ``pos_base ** (s - 1)``).
    ``word_limit`` is the total word budget L; ``max_slots`` caps how many
    ads are shown.
    """

    beta: float = 0.5
    word_limit: int = 60
    pos_base: float = 0.9
    max_slots: int = 4

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not 0.0 < self.pos_base <= 1.0:
            raise ValueError(f"pos_base must be in (0, 1], got {self.pos_base}")
        if self.word_limit < 0:
            raise ValueError(f"word_limit must be >= 0, got {self.word_limit}")
        if self.max_slots < 1:
            raise ValueError(f"max_slots must be >= 1, got {self.max_slots}")

    @property
    def alpha(self) -> float:
        """Proportional-allocation exponent: 1/(1-beta), or inf at beta=1."""
        if self.beta == 1.0:
            return math.inf
        return 1.0 / (1.0 - self.beta)

    def pos_norm(self, slot_rank: int) -> float:
        """Position discount for a 1-based slot rank."""
        if slot_rank < 1:
            raise ValueError(f"slot_rank must be >= 1, got {slot_rank}")
        return self.pos_base ** (slot_rank - 1)


@dataclass(frozen=True)
class ProminenceVector:
    """Per-ad simplex weights; entries in [0, 1] summing to at most 1."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        for w in self.weights:
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"prominence entries must be in [0, 1], got {w}")
        if sum(self.weights) > 1.0 + SIMPLEX_TOL:
            raise ValueError(f"prominence sums to {sum(self.weights)} > 1")

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]


@dataclass(frozen=True)
class EcpmVector:
    """Per-ad expected value proxy: bid * base_ctr * position discount.

    Unshown ads carry 0. For an auction outcome the shown entries are
    nonincreasing along the slot order, because slots are assigned by
    descending bid*ctr product and the position discounts decrease.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in self.values:
            if v < 0.0:
                raise ValueError(f"ecpm entries must be >= 0, got {v}")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


@dataclass(frozen=True)
class AuctionOutcome:
    """Everything an auction decides for one query.

    All per-ad vectors are indexed by the ad's position in the query's input
    list. ``ordering`` lists the shown ads' indices, slot 1 first.
    ``payments`` is None for mechanisms that do not price (benchmarks).
    ``internal_pctr`` is the auction's own model of each ad's final CTR,
    computed from the continuous prominence (word rounding excluded).
    """

    ordering: tuple[int, ...]
    prominence: ProminenceVector
    word_budgets: tuple[int, ...]
    payments: tuple[float, ...] | None
    internal_pctr: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering", tuple(self.ordering))
        object.__setattr__(self, "word_budgets", tuple(self.word_budgets))
        object.__setattr__(self, "internal_pctr", tuple(self.internal_pctr))
        if self.payments is not None:
            object.__setattr__(self, "payments", tuple(self.payments))
        n = len(self.prominence)
        if len(self.word_budgets) != n or len(self.internal_pctr) != n:
            raise ValueError("per-ad vectors must all have the query's length")
        if len(set(self.ordering)) != len(self.ordering):
            raise ValueError("ordering contains repeated ad indices")
        for i in self.ordering:
            if not 0 <= i < n:
                raise ValueError(f"ordering index {i} out of range")
        shown = set(self.ordering)
        for i, p in enumerate(self.internal_pctr):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"internal_pctr[{i}]={p} outside [0, 1]")
        for i, b in enumerate(self.word_budgets):
            if b < 0:
                raise ValueError(f"word_budgets[{i}]={b} negative")
        if self.payments is not None:
            for i, p in enumerate(self.payments):
                if p < 0.0:
                    raise ValueError(f"payments[{i}]={p} negative")
                if i not in shown and p != 0.0:
                    raise ValueError(f"unshown ad {i} has nonzero payment {p}")


@dataclass(frozen=True)
class SummaryEntry:
    """One rendered ad summary and its 1-based display rank."""

    ad_id: str
    text: str
    rank: int


@dataclass(frozen=True)
class SummaryBundle:
    """Ordered per-ad summaries; empty summaries are omitted and unranked."""

    entries: tuple[SummaryEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        for pos, entry in enumerate(self.entries, start=1):
            if entry.rank != pos:
                raise ValueError(
                    f"ranks must be consecutive from 1, got {entry.rank} at {pos}"
                )
            if not entry.text:
                raise ValueError(f"entry {entry.ad_id!r} has an empty summary")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def internal_final_pctr(
    base_ctr: float, slot_rank: int, prominence: float, params: EvalParams
) -> float:
    """Auction-side predicted CTR of an ad shown at a slot with a prominence.

    Factorized as ``base_ctr * pos_base**(slot_rank-1) * prominence**beta``.
    Zero prominence yields exactly 0 (``0**beta`` is taken as 0 for every
    beta in (0, 1]), so unshown ads never click under the internal model.

    Args:
        base_ctr: standalone CTR of the full creative, in [0, 1].
        slot_rank: 1-based slot the ad occupies.
        prominence: allocated simplex weight, in [0, 1].
        params: model parameters (beta and pos_base are used).

    Returns:
        The predicted CTR, in [0, 1].
    """
    if prominence == 0.0:
        return 0.0
    return base_ctr * params.pos_norm(slot_rank) * prominence**params.beta
