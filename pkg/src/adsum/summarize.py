"""Pluggable ad summarizers honoring a word budget.

A summarizer maps ``(creative, word_budget)`` to a summary of at most
``word_budget`` whitespace-separated words. Two deterministic built-ins are
provided (prefix truncation and frequency-greedy extraction) plus an
optional HTTP client for an external LLM endpoint; the client's output is
post-truncated so the budget always holds regardless of what the model
returns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import requests

from .model import AdCandidate, AuctionOutcome, SummaryBundle, SummaryEntry

SUMMARIZER_KINDS = ("truncation", "frequency_greedy", "external_llm")

_LLM_ATTEMPTS = 3


class SummarizationError(RuntimeError):
    """External summarizer failure; carries the ad_id once known."""

    def __init__(self, message: str, ad_id: str | None = None):
        super().__init__(message)
        self.ad_id = ad_id


@dataclass(frozen=True)
class SummarizerSpec:
    """Which summarizer to run and how to reach it if it is remote.

    ``endpoint`` must be set exactly when ``kind == "external_llm"``.
    ``fallback_truncation`` makes bundle rendering degrade to truncation
    when the remote endpoint keeps failing instead of raising.
    """

    kind: str = "truncation"
    endpoint: str | None = None
    timeout_ms: int = 10_000
    prompt_template_path: str | None = None
    fallback_truncation: bool = False

    def __post_init__(self) -> None:
        if self.kind not in SUMMARIZER_KINDS:
            raise ValueError(f"unknown summarizer kind {self.kind!r}")
        if (self.endpoint is not None) != (self.kind == "external_llm"):
            raise ValueError("endpoint is required iff kind is 'external_llm'")
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout_ms must be > 0, got {self.timeout_ms}")


def split_words(text: str) -> list[str]:
    """Words are maximal runs of non-whitespace."""
    return text.split()


def summarize(creative: str, word_budget: int, spec: SummarizerSpec) -> str:
    """Produce a summary of at most ``word_budget`` words.

    A zero budget yields the empty string; a budget covering the whole
    creative returns it verbatim. Otherwise the configured summarizer runs;
    remote output is truncated to the budget as a faithfulness backstop.
    """
    if word_budget < 0:
        raise ValueError(f"word_budget must be >= 0, got {word_budget}")
    if word_budget == 0:
        return ""
    words = split_words(creative)
    if word_budget >= len(words):
        return creative
    if spec.kind == "truncation":
        return " ".join(words[:word_budget])
    if spec.kind == "frequency_greedy":
        return _frequency_greedy(words, word_budget)
    return _external_llm(creative, word_budget, spec)


def render_bundle(
    ads: tuple[AdCandidate, ...] | list[AdCandidate],
    outcome: AuctionOutcome,
    spec: SummarizerSpec,
) -> SummaryBundle:
    """Summarize every shown ad and arrange the summaries in slot order.

    Zero-budget ads are omitted; ranks run 1..m over the non-empty
    summaries. External-LLM failures are re-raised with the ad_id attached,
    or silently replaced by truncation when the spec asks for the fallback.
    """
    entries = []
    rank = 0
    for idx in outcome.ordering:
        budget = outcome.word_budgets[idx]
        if budget == 0:
            continue
        ad = ads[idx]
        try:
            text = summarize(ad.text, budget, spec)
        except SummarizationError as err:
            if spec.fallback_truncation:
                text = " ".join(split_words(ad.text)[:budget])
            else:
                raise SummarizationError(str(err), ad_id=ad.ad_id) from err
        if not text:
            continue
        rank += 1
        entries.append(SummaryEntry(ad_id=ad.ad_id, text=text, rank=rank))
    return SummaryBundle(tuple(entries))


def load_prompt_template(spec: SummarizerSpec) -> str:
    """The few-shot prompt sent to the external endpoint, with placeholders."""
    if spec.prompt_template_path is not None:
        with open(spec.prompt_template_path, encoding="utf-8") as fh:
            return fh.read()
    return (
        resources.files("adsum").joinpath("data/prompt_template.txt").read_text("utf-8")
    )


def render_prompt(template: str, creative: str, word_budget: int) -> str:
    return template.replace("{word_budget}", str(word_budget)).replace(
        "{creative}", creative
    )


def _frequency_greedy(words: list[str], budget: int) -> str:
    """Pick the budget words that maximize unigram recall against the creative.

    Word types are ranked by descending in-creative frequency, ties broken
    by first occurrence; one copy of each type is taken per pass until the
    budget is filled, and the chosen tokens are emitted in original order.
    Each extra budget word extends the previous selection, which makes
    recall against the creative nondecreasing in the budget.
    """
    freq: dict[str, int] = {}
    first_pos: dict[str, int] = {}
    positions: dict[str, list[int]] = {}
    for pos, w in enumerate(words):
        freq[w] = freq.get(w, 0) + 1
        first_pos.setdefault(w, pos)
        positions.setdefault(w, []).append(pos)

    ranked = sorted(freq, key=lambda w: (-freq[w], first_pos[w]))
    taken: dict[str, int] = {w: 0 for w in ranked}
    remaining = budget
    while remaining > 0:
        progressed = False
        for w in ranked:
            if remaining == 0:
                break
            if taken[w] < freq[w]:
                taken[w] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            break
    chosen = sorted(p for w, count in taken.items() for p in positions[w][:count])
    return " ".join(words[p] for p in chosen)


def _external_llm(creative: str, word_budget: int, spec: SummarizerSpec) -> str:
    template = load_prompt_template(spec)
    payload = {
        "creative": creative,
        "word_budget": word_budget,
        "prompt": render_prompt(template, creative, word_budget),
    }
    last_error = "no attempt made"
    for _ in range(_LLM_ATTEMPTS):
        try:
            response = requests.post(
                spec.endpoint, json=payload, timeout=spec.timeout_ms / 1000.0
            )
        except requests.RequestException as err:
            last_error = str(err)
            continue
        if response.status_code != 200:
            last_error = f"HTTP {response.status_code}"
            continue
        try:
            summary = response.json()["summary"]
        except (json.JSONDecodeError, KeyError, ValueError) as err:
            last_error = f"bad response body: {err}"
            continue
        # Enforce the budget no matter what the model produced.
        return " ".join(split_words(str(summary))[:word_budget])
    raise SummarizationError(
        f"external summarizer failed after {_LLM_ATTEMPTS} attempts: {last_error}"
    )
