"""Batch experiment engine: welfare grids, payment reports, property suites.

Runs the selected mechanisms over a corpus for every (word limit, beta)
combination and aggregates mean realized welfare. The greedy and fixed-
length benchmark allocations do not depend on beta, so each is rendered
once per word limit and only re-scored per beta. Aggregation always sums in
canonical query order, which makes the CSV byte-identical for any worker
count. Plots are written as self-contained SVG by the tool itself; no
display stack is involved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .evaluate import bundle_scores, ctr_from_recall
from .mechanisms import MECHANISM_KINDS, MechanismSpec, run
from .model import EvalParams, QueryInstance
from .properties import (
    ViolationReport,
    check_ic,
    check_monotone,
    check_scale_free,
    multiplier_grid,
    reports_to_jsonl,
)
from .summarize import SummarizerSpec, render_bundle

RESULTS_CSV_HEADER = "l,beta,mechanism,mean_welfare,std_err,n_queries"
PAYMENTS_CSV_HEADER = "query_id,ad_id,bid,prominence,budget,payment,internal_pctr"

DEFAULT_L_VALUES = (40, 60, 80, 120, 160)
DEFAULT_BETAS = (1 / 2, 1 / 3, 1 / 4)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs; see the flat config file format.

    ``corpus`` is either a generation spec or a path to an existing JSONL
    corpus. ``out_dir`` of None keeps the run in memory (no files).
    """

    corpus: corpus_mod.CorpusSpec | str | Path = field(
        default_factory=corpus_mod.CorpusSpec
    )
    l_values: tuple[int, ...] = DEFAULT_L_VALUES
    betas: tuple[float, ...] = DEFAULT_BETAS
    mechanisms: tuple[str, ...] = MECHANISM_KINDS
    summarizer: SummarizerSpec = field(default_factory=SummarizerSpec)
    out_dir: str | Path | None = None
    seed: int = 0
    pos_base: float = 0.9
    max_slots: int = 4
    workers: int = 1
    make_plots: bool = True

    def __post_init__(self) -> None:
        if not self.l_values:
            raise ValueError("l_values must not be empty")
        if not self.betas:
            raise ValueError("betas must not be empty")
        for beta in self.betas:
            if not 0.0 < beta < 1.0:
                raise ValueError(f"betas must lie in (0, 1), got {beta}")
        for name in self.mechanisms:
            if name not in MECHANISM_KINDS:
                raise ValueError(f"unknown mechanism {name!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    l: int
    beta: float
    mechanism: str
    mean_welfare: float
    std_err: float
    n_queries: int


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...]
    csv: str
    plots: dict[str, str]  # filename -> SVG content


def load_corpus(config: ExperimentConfig) -> list[QueryInstance]:
    if isinstance(config.corpus, corpus_mod.CorpusSpec):
        return corpus_mod.generate(config.corpus)
    return corpus_mod.load(config.corpus)


def run_experiment(
    config: ExperimentConfig, queries: list[QueryInstance] | None = None
) -> ExperimentResult:
    """Mean welfare per (L, beta, mechanism); optionally writes CSV and SVGs."""
    if queries is None:
        queries = load_corpus(config)
    rows = []
    for l_value in sorted(config.l_values):
        for mechanism in config.mechanisms:
            score_table = _score_corpus(queries, mechanism, l_value, config)
            for beta in config.betas:
                params = EvalParams(
                    beta=beta,
                    word_limit=l_value,
                    pos_base=config.pos_base,
                    max_slots=config.max_slots,
                )
                welfares = [
                    _welfare_from_scores(query, scores, params)
                    for query, scores in zip(queries, score_table[beta])
                ]
                mean, std_err = _mean_and_stderr(welfares)
                rows.append(
                    ResultRow(
                        l=l_value,
                        beta=beta,
                        mechanism=mechanism,
                        mean_welfare=mean,
                        std_err=std_err,
                        n_queries=len(queries),
                    )
                )
    rows.sort(key=lambda r: (r.l, r.beta, r.mechanism))
    result = ExperimentResult(
        rows=tuple(rows),
        csv=render_results_csv(rows),
        plots=render_plots(rows) if config.make_plots else {},
    )
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(result.csv, encoding="utf-8")
        for name, svg in result.plots.items():
            (out / name).write_text(svg, encoding="utf-8")
    return result


@dataclass(frozen=True)
class PaymentRow:
    query_id: str
    ad_id: str
    bid: float
    prominence: float
    budget: int
    payment: float
    internal_pctr: float


def report_payments(
    config: ExperimentConfig,
    beta: float | None = None,
    l_value: int | None = None,
    queries: list[QueryInstance] | None = None,
) -> tuple[list[PaymentRow], str]:
    """Per-bidder payment table for the proportional mechanism.

    Uses the first configured beta and word limit unless given explicitly.
    Each row is checked against the truthful-pricing bounds
    ``0 <= payment <= bid * internal_pctr`` as it is emitted.
    """
    beta = config.betas[0] if beta is None else beta
    l_value = config.l_values[0] if l_value is None else l_value
    params = EvalParams(
        beta=beta,
        word_limit=l_value,
        pos_base=config.pos_base,
        max_slots=config.max_slots,
    )
    spec = MechanismSpec(kind="gpa_dwls", params=params, compute_payments=True)
    if queries is None:
        queries = load_corpus(config)
    rows = []
    for query in queries:
        outcome = run(query, spec)
        assert outcome.payments is not None
        for i, ad in enumerate(query.ads):
            payment = outcome.payments[i]
            ceiling = ad.bid * outcome.internal_pctr[i]
            if not 0.0 <= payment <= ceiling + 1e-9:
                raise RuntimeError(
                    f"payment bound violated for {ad.ad_id}: "
                    f"p={payment} not in [0, {ceiling}]"
                )
            rows.append(
                PaymentRow(
                    query_id=query.query_id,
                    ad_id=ad.ad_id,
                    bid=ad.bid,
                    prominence=outcome.prominence[i],
                    budget=outcome.word_budgets[i],
                    payment=payment,
                    internal_pctr=outcome.internal_pctr[i],
                )
            )
    csv = render_payments_csv(rows)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "payments.csv").write_text(csv, encoding="utf-8")
    return rows, csv


def run_checks(
    config: ExperimentConfig,
    mechanism: str = "gpa_dwls",
    checks: Sequence[str] = ("ic", "monotonicity", "scale_free"),
    sample_queries: int = 200,
    deviations_per_bidder: int = 20,
    ic_tol: float = 1e-5,
    queries: list[QueryInstance] | None = None,
) -> list[ViolationReport]:
    """Run the property suite on a seeded corpus sample; returns violations."""
    if queries is None:
        queries = load_corpus(config)
    sample = sample_corpus(queries, sample_queries, config.seed)
    params = EvalParams(
        beta=config.betas[0],
        word_limit=config.l_values[0],
        pos_base=config.pos_base,
        max_slots=config.max_slots,
    )
    violations: list[ViolationReport] = []
    if "ic" in checks:
        spec = MechanismSpec(kind=mechanism, params=params, compute_payments=True)
        violations += check_ic(
            lambda q: run(q, spec), sample, deviations_per_bidder, ic_tol
        )
    plain = MechanismSpec(kind=mechanism, params=params)
    if "monotonicity" in checks:
        violations += check_monotone(lambda q: run(q, plain), sample, multiplier_grid(25))
    if "scale_free" in checks:
        violations += check_scale_free(lambda q: run(q, plain), sample)
    violations.sort(key=lambda v: (v.kind, v.query_id, v.bidder))
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "violations.jsonl").write_text(
            reports_to_jsonl(violations), encoding="utf-8"
        )
    return violations


def sample_corpus(
    queries: list[QueryInstance], count: int, seed: int
) -> list[QueryInstance]:
    """Seeded, order-stable sample of the corpus."""
    if count >= len(queries):
        return list(queries)
    picks = sorted(
        _sample_indices(len(queries), count, seed)
    )
    return [queries[i] for i in picks]


def _sample_indices(n: int, count: int, seed: int) -> list[int]:
    import random

    return random.Random(corpus_mod.splitmix64(seed ^ 0xC0FFEE)).sample(range(n), count)


# -- scoring ---------------------------------------------------------------


def _score_corpus(
    queries: list[QueryInstance],
    mechanism: str,
    l_value: int,
    config: ExperimentConfig,
) -> dict[float, list[tuple[tuple[str, float, int], ...]]]:
    """Per-beta tables of (ad_id, rouge, rank) scores for every query.

    Benchmark allocations ignore beta, so they are computed for the first
    beta and shared; the proportional mechanism re-runs per beta because its
    allocation exponent is derived from beta.
    """
    beta_independent = mechanism in ("greedy", "pos_fixed_length")
    betas = [config.betas[0]] if beta_independent else list(config.betas)
    per_beta = {}
    for beta in betas:
        params = EvalParams(
            beta=beta,
            word_limit=l_value,
            pos_base=config.pos_base,
            max_slots=config.max_slots,
        )
        spec = MechanismSpec(kind=mechanism, params=params, summarizer=config.summarizer)
        per_beta[beta] = _map_queries(
            lambda q: bundle_scores(q, render_bundle(q.ads, run(q, spec), spec.summarizer)),
            queries,
            config.workers,
        )
    if beta_independent:
        shared = per_beta[betas[0]]
        return {beta: shared for beta in config.betas}
    return per_beta


def _map_queries(fn, queries: list[QueryInstance], workers: int) -> list:
    """Map fn over queries preserving input order regardless of worker count."""
    if workers == 1:
        return [fn(q) for q in queries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, queries))


def _welfare_from_scores(
    query: QueryInstance, scores: tuple[tuple[str, float, int], ...], params: EvalParams
) -> float:
    by_id = {ad.ad_id: ad for ad in query.ads}
    return math.fsum(
        ctr_from_recall(by_id[ad_id].base_ctr, recall, rank, params) * by_id[ad_id].bid
        for ad_id, recall, rank in scores
    )


def _mean_and_stderr(values: list[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


# -- rendering -------------------------------------------------------------


def render_results_csv(rows: Sequence[ResultRow]) -> str:
    lines = [RESULTS_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.l},{r.beta!r},{r.mechanism},{r.mean_welfare!r},{r.std_err!r},{r.n_queries}"
        )
    return "".join(line + "\n" for line in lines)


def render_payments_csv(rows: Sequence[PaymentRow]) -> str:
    lines = [PAYMENTS_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.query_id},{r.ad_id},{r.bid!r},{r.prominence!r},{r.budget},"
            f"{r.payment!r},{r.internal_pctr!r}"
        )
    return "".join(line + "\n" for line in lines)


_PLOT_COLORS = {
    "gpa_dwls": "#1f77b4",
    "greedy": "#d62728",
    "pos_fixed_length": "#2ca02c",
}


def render_plots(rows: Sequence[ResultRow]) -> dict[str, str]:
    """One SVG of mean welfare vs word limit per beta value."""
    betas = sorted({r.beta for r in rows})
    plots = {}
    for beta in betas:
        subset = [r for r in rows if r.beta == beta]
        name = f"welfare_vs_l_beta{beta:.4g}.svg"
        plots[name] = _line_plot_svg(subset, title=f"mean welfare vs L (beta={beta:.4g})")
    return plots


def _line_plot_svg(rows: Sequence[ResultRow], title: str) -> str:
    width, height = 640, 420
    left, right, top, bottom = 70, 20, 40, 50
    xs = sorted({r.l for r in rows})
    series = sorted({r.mechanism for r in rows})
    y_max = max((r.mean_welfare for r in rows), default=1.0) or 1.0
    y_max *= 1.05

    def sx(l_value: float) -> float:
        if len(xs) == 1 or xs[-1] == xs[0]:
            return left + (width - left - right) / 2.0
        return left + (l_value - xs[0]) / (xs[-1] - xs[0]) * (width - left - right)

    def sy(w: float) -> float:
        return height - bottom - w / y_max * (height - top - bottom)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
        f'y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
    ]
    for x in xs:
        parts.append(
            f'<text x="{sx(x):.1f}" y="{height - bottom + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{x}</text>'
        )
    for tick in range(5):
        w = y_max * tick / 4.0
        parts.append(
            f'<text x="{left - 6}" y="{sy(w) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{w:.3g}</text>'
        )
    for idx, mech in enumerate(series):
        color = _PLOT_COLORS.get(mech, "#7f7f7f")
        pts = sorted((r.l, r.mean_welfare) for r in rows if r.mechanism == mech)
        path = " ".join(f"{sx(l):.2f},{sy(w):.2f}" for l, w in pts)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{path}"/>'
        )
        for l, w in pts:
            parts.append(
                f'<circle cx="{sx(l):.2f}" cy="{sy(w):.2f}" r="3" fill="{color}"/>'
            )
        ly = top + 14 * idx
        parts.append(
            f'<rect x="{width - right - 160}" y="{ly - 9}" width="10" height="10" fill="{color}"/>'
            f'<text x="{width - right - 146}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{mech}</text>'
        )
    parts.append(
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">total word limit L</text>'
    )
    parts.append("</svg>")
    return "".join(p + "\n" for p in parts)


# -- flat config file ------------------------------------------------------

_LIST_KEYS = {"l_values", "betas", "mechanisms"}
_INT_KEYS = {"n_queries", "seed", "workers", "max_slots"}
_FLOAT_KEYS = {"pos_base"}
_BOOL_KEYS = {"make_plots", "distinct_tokens"}


def parse_config_text(text: str) -> dict:
    """Parse the flat ``key = value`` experiment config format.

    Lines are ``key = value``; ``#`` starts a comment; list values are
    comma-separated. Unknown keys raise so typos do not silently vanish.
    """
    known = _LIST_KEYS | _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | {
        "corpus",
        "out_dir",
        "summarizer",
        "endpoint",
    }
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            if key == "l_values":
                values[key] = tuple(int(v) for v in items)
            elif key == "betas":
                values[key] = tuple(float(v) for v in items)
            else:
                values[key] = tuple(items)
        elif key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        elif key in _BOOL_KEYS:
            values[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            values[key] = value
    return values


def config_from_values(values: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed file values and flag overrides."""
    corpus_value = values.get("corpus")
    if corpus_value is None or corpus_value == "":
        spec_kwargs = {}
        if "n_queries" in values:
            spec_kwargs["n_queries"] = values["n_queries"]
        if "seed" in values:
            spec_kwargs["seed"] = values["seed"]
        if "distinct_tokens" in values:
            spec_kwargs["distinct_tokens"] = values["distinct_tokens"]
        corpus: corpus_mod.CorpusSpec | str = corpus_mod.CorpusSpec(**spec_kwargs)
    else:
        corpus = corpus_value
    summarizer = SummarizerSpec(
        kind=values.get("summarizer", "truncation"),
        endpoint=values.get("endpoint"),
    )
    config = ExperimentConfig(corpus=corpus, summarizer=summarizer)
    overrides = {
        k: values[k]
        for k in (
            "l_values",
            "betas",
            "mechanisms",
            "out_dir",
            "seed",
            "pos_base",
            "max_slots",
            "workers",
            "make_plots",
        )
        if k in values
    }
    return replace(config, **overrides)
