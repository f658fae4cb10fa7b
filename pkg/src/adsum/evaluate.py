"""Evaluation-side CTR model: ROUGE recall, evaluated CTR, realized welfare.

Welfare is scored against the rendered summaries rather than the auction's
internal prediction: each shown ad contributes ``bid * base_ctr *
rouge_recall(summary, creative)**beta * pos_base**(rank-1)``. The ROUGE
variant is fixed to unigram recall with clipped counts so the score is
reproducible bit for bit: tokens are lowercased maximal alphanumeric runs,
with no stemming or stopword removal. URLs live in a separate field and
never enter the text.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .model import AdCandidate, EvalParams, QueryInstance, SummaryBundle

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class WelfareRow:
    """Evaluated contribution of a single ad."""

    ad_id: str
    rouge: float
    eval_ctr: float
    value_contribution: float


@dataclass(frozen=True)
class WelfareReport:
    """Per-ad evaluated CTRs and their bid-weighted total welfare."""

    query_id: str
    per_ad: tuple[WelfareRow, ...]
    total_welfare: float


def rouge_tokens(text: str) -> list[str]:
    """Lowercase maximal alphanumeric runs; the ROUGE tokenization."""
    return _TOKEN_RE.findall(text.lower())


def rouge_recall(summary: str, original: str) -> float:
    """Clipped unigram recall of the summary against the original.

    ``sum_w min(count_summary(w), count_original(w)) / len(original tokens)``.

    Raises:
        ValueError: when the original has no tokens ("empty reference").
    """
    reference = rouge_tokens(original)
    if not reference:
        raise ValueError("empty reference")
    if not summary:
        return 0.0
    ref_counts = Counter(reference)
    overlap = 0
    for token, count in Counter(rouge_tokens(summary)).items():
        overlap += min(count, ref_counts.get(token, 0))
    return overlap / len(reference)


def ctr_from_recall(
    base_ctr: float, recall: float, rank: int, params: EvalParams
) -> float:
    """Evaluated CTR given an already-computed ROUGE recall."""
    if recall == 0.0:
        return 0.0
    return base_ctr * recall**params.beta * params.pos_norm(rank)


def eval_ctr(ad: AdCandidate, summary: str, rank: int, params: EvalParams) -> float:
    """Evaluated CTR of an ad's summary shown at a 1-based rank.

    ``base_ctr * rouge_recall(summary, creative)**beta * pos_base**(rank-1)``.
    Ads absent from a bundle score 0 by convention (see ``welfare``).
    """
    return ctr_from_recall(ad.base_ctr, rouge_recall(summary, ad.text), rank, params)


def bundle_scores(
    query: QueryInstance, bundle: SummaryBundle
) -> tuple[tuple[str, float, int], ...]:
    """(ad_id, rouge, rank) per bundle entry; the beta-independent part.

    Lets callers score the same rendered bundle under several beta values
    without recomputing the text overlap.

    Raises:
        ValueError: if the bundle names an ad_id the query does not have.
    """
    by_id = {ad.ad_id: ad for ad in query.ads}
    scores = []
    for entry in bundle:
        if entry.ad_id not in by_id:
            raise ValueError(f"bundle names unknown ad_id {entry.ad_id!r}")
        recall = rouge_recall(entry.text, by_id[entry.ad_id].text)
        scores.append((entry.ad_id, recall, entry.rank))
    return tuple(scores)


def welfare(
    query: QueryInstance, bundle: SummaryBundle, params: EvalParams
) -> WelfareReport:
    """Realized welfare of a rendered bundle: sum of eval_ctr * bid.

    Every ad of the query gets a row; ads absent from the bundle contribute
    zero. Processing order of bundle entries does not affect the result.

    Raises:
        ValueError: if the bundle names an ad_id the query does not have.
    """
    by_id = {ad.ad_id: ad for ad in query.ads}
    shown = {
        ad_id: (recall, ctr_from_recall(by_id[ad_id].base_ctr, recall, rank, params))
        for ad_id, recall, rank in bundle_scores(query, bundle)
    }
    rows = []
    for ad in query.ads:
        recall, ctr = shown.get(ad.ad_id, (0.0, 0.0))
        rows.append(
            WelfareRow(
                ad_id=ad.ad_id,
                rouge=recall,
                eval_ctr=ctr,
                value_contribution=ctr * ad.bid,
            )
        )
    total = math.fsum(row.value_contribution for row in rows)
    return WelfareReport(query_id=query.query_id, per_ad=tuple(rows), total_welfare=total)
