"""Seeded synthetic corpus of queries and ads, persisted as JSONL.

Generation is deterministic and order-independent: every query gets its own
``random.Random`` (Mersenne Twister) seeded by a SplitMix64 mix of the
master seed and the query index, so query i comes out identical whether the
corpus is built sequentially, in parallel, or one query at a time. Bids are
log-normal in the underlying-normal convention (``exp(N(mu, sigma))``), base
CTRs uniform, and creatives are assembled from bundled template fragments
keyed by a query topic. The JSONL schema is one query per line::

    {"query_id": str, "query": str, "ads": [{"ad_id": str, "url": str,
     "text": str, "bid": float, "base_ctr": float}]}

Externally produced corpora in the same schema load through the same path.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .model import AdCandidate, QueryInstance

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class CorpusFormatError(ValueError):
    """A corpus file line that does not match the schema."""


@dataclass(frozen=True)
class CorpusSpec:
    """Distributional knobs for synthetic corpus generation."""

    n_queries: int = 1000
    seed: int = 0
    ads_per_query: tuple[int, int] = (2, 4)
    bid_lognormal: tuple[float, float] = (0.5, 1.0)
    ctr_uniform: tuple[float, float] = (0.0, 1.0)
    creative_words: tuple[int, int] = (30, 60)
    distinct_tokens: bool = False

    def __post_init__(self) -> None:
        if self.n_queries < 0:
            raise ValueError(f"n_queries must be >= 0, got {self.n_queries}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        for name in ("ads_per_query", "creative_words"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} range [{lo}, {hi}] is empty or non-positive")
        if self.bid_lognormal[1] <= 0:
            raise ValueError("bid sigma must be > 0")
        lo, hi = self.ctr_uniform
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"ctr_uniform [{lo}, {hi}] must sit inside [0, 1]")


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; the documented sub-seed mixing function."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def query_seed(master_seed: int, index: int) -> int:
    """Sub-seed of query ``index``: splitmix64(master + (index+1) * gamma)."""
    return splitmix64((master_seed + (index + 1) * _GAMMA) & _MASK64)


def generate(spec: CorpusSpec) -> list[QueryInstance]:
    """Generate the whole corpus; byte-identical for identical specs."""
    return [generate_query(spec, i) for i in range(spec.n_queries)]


def generate_query(spec: CorpusSpec, index: int) -> QueryInstance:
    """Generate query ``index`` alone; independent of all other queries.

    Draw order per query (Mersenne Twister seeded with ``query_seed``):
    topic pick, ad count, then per ad bid, base CTR, creative length, and
    creative text.
    """
    rng = random.Random(query_seed(spec.seed, index))
    topic, query_text = _TOPICS[rng.randrange(len(_TOPICS))]
    n_ads = rng.randint(*spec.ads_per_query)
    query_id = f"q{index:05d}"
    ads = []
    for j in range(n_ads):
        bid = rng.lognormvariate(*spec.bid_lognormal)
        ctr = rng.uniform(*spec.ctr_uniform)
        length = rng.randint(*spec.creative_words)
        if spec.distinct_tokens:
            text = " ".join(f"{topic}{j}w{t:03d}" for t in range(length))
        else:
            text = _creative_text(rng, topic, query_text, length)
        ads.append(
            AdCandidate(
                ad_id=f"{query_id}-ad{j}",
                url=f"https://ads.example/{topic}/{index}-{j}",
                text=text,
                bid=bid,
                base_ctr=ctr,
            )
        )
    return QueryInstance(query_id=query_id, query=query_text, ads=tuple(ads))


def save(corpus: list[QueryInstance], path: str | Path) -> None:
    Path(path).write_text(to_jsonl(corpus), encoding="utf-8")


def to_jsonl(corpus: list[QueryInstance]) -> str:
    """Canonical JSONL rendering; the persisted byte format."""
    lines = []
    for query in corpus:
        lines.append(
            json.dumps(
                {
                    "query_id": query.query_id,
                    "query": query.query,
                    "ads": [
                        {
                            "ad_id": ad.ad_id,
                            "url": ad.url,
                            "text": ad.text,
                            "bid": ad.bid,
                            "base_ctr": ad.base_ctr,
                        }
                        for ad in query.ads
                    ],
                },
                ensure_ascii=False,
            )
        )
    return "".join(line + "\n" for line in lines)


def load(path: str | Path) -> list[QueryInstance]:
    return from_jsonl(Path(path).read_text(encoding="utf-8"))


def from_jsonl(text: str) -> list[QueryInstance]:
    """Parse corpus JSONL; errors carry the 1-based offending line number."""
    corpus = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as err:
            raise CorpusFormatError(f"line {lineno}: malformed JSON ({err})") from err
        corpus.append(_query_from_dict(raw, lineno))
    return corpus


def _query_from_dict(raw: dict, lineno: int) -> QueryInstance:
    def need(obj: dict, name: str):
        if name not in obj:
            raise CorpusFormatError(f"line {lineno}: missing field {name!r}")
        return obj[name]

    ads = tuple(
        AdCandidate(
            ad_id=need(entry, "ad_id"),
            url=need(entry, "url"),
            text=need(entry, "text"),
            bid=float(need(entry, "bid")),
            base_ctr=float(need(entry, "base_ctr")),
        )
        for entry in need(raw, "ads")
    )
    return QueryInstance(query_id=need(raw, "query_id"), query=need(raw, "query"), ads=ads)


def _creative_text(rng: random.Random, topic: str, query_text: str, length: int) -> str:
    words: list[str] = []
    while len(words) < length:
        fragment = _FRAGMENTS[rng.randrange(len(_FRAGMENTS))]
        words.extend(fragment.format(t=query_text).split())
    return " ".join(words[:length])


# Topic key (used in ids/urls/calibration tokens) and the query text shown.
_TOPICS = (
    ("golf", "beginner golf lessons"),
    ("shoes", "trail running shoes"),
    ("espresso", "home espresso machines"),
    ("yoga", "morning yoga classes"),
    ("dog", "dog obedience training"),
    ("travel", "budget travel insurance"),
    ("desk", "adjustable standing desks"),
    ("tutor", "online language tutoring"),
    ("bike", "electric bike rentals"),
    ("meal", "weekly meal prep delivery"),
    ("guitar", "acoustic guitar lessons"),
    ("cleaning", "house cleaning services"),
)

_FRAGMENTS = (
    "Looking for {t}? We make it simple to start today.",
    "Our {t} come with a satisfaction guarantee and friendly support.",
    "Trusted by thousands, rated five stars for {t} in your area.",
    "Flexible plans for {t} with no hidden fees and easy cancellation.",
    "Book {t} online in under a minute and save twenty percent.",
    "Experienced staff guide you through {t} at your own pace.",
    "Compare options for {t} and pick what fits your budget.",
    "New customers get their first week of {t} completely free.",
    "Premium quality {t} delivered with fast turnaround and care.",
    "Join our community and master {t} with step by step help.",
    "Limited time offer on {t} ends this Sunday, act now.",
    "Local experts in {t} with same day availability all season.",
)
