"""Request-model handlers shared by the HTTP app and the in-process CLI.

Every handler is a pure function from a request model to a response model,
so the CLI produces byte-identical artifacts whether it calls a remote
server or runs locally.
"""

from __future__ import annotations

from .. import corpus as corpus_mod
from ..evaluate import welfare
from ..harness import (
    ExperimentConfig,
    report_payments,
    run_checks,
    run_experiment,
)
from ..mechanisms import MechanismSpec, run
from ..model import QueryInstance
from ..properties import reports_to_jsonl
from ..summarize import render_bundle
from . import schemas as s


def handle_auction_run(request: s.AuctionRunRequest) -> s.AuctionRunResponse:
    query = request.query.to_core()
    spec = MechanismSpec(
        kind=request.mechanism,
        params=request.params.to_core(),
        summarizer=request.summarizer.to_core(),
        compute_payments=request.compute_payments,
    )
    outcome = run(query, spec)
    bundle_model = None
    welfare_model = None
    if request.include_summaries or request.include_welfare:
        bundle = render_bundle(query.ads, outcome, spec.summarizer)
        if request.include_summaries:
            bundle_model = [
                s.BundleEntryModel(ad_id=e.ad_id, summary=e.text, rank=e.rank)
                for e in bundle
            ]
        if request.include_welfare:
            report = welfare(query, bundle, spec.params)
            welfare_model = s.WelfareModel(
                per_ad=[
                    s.WelfareRowModel(
                        ad_id=row.ad_id,
                        rouge=row.rouge,
                        eval_ctr=row.eval_ctr,
                        value_contribution=row.value_contribution,
                    )
                    for row in report.per_ad
                ],
                total_welfare=report.total_welfare,
            )
    return s.AuctionRunResponse(
        query_id=query.query_id,
        mechanism=request.mechanism,
        outcome=s.OutcomeModel(
            ordering=list(outcome.ordering),
            prominence=list(outcome.prominence),
            word_budgets=list(outcome.word_budgets),
            payments=list(outcome.payments) if outcome.payments is not None else None,
            internal_pctr=list(outcome.internal_pctr),
        ),
        bundle=bundle_model,
        welfare=welfare_model,
    )


def handle_corpus_gen(request: s.CorpusGenRequest) -> s.CorpusGenResponse:
    queries = corpus_mod.generate(request.spec.to_core())
    return s.CorpusGenResponse(n_queries=len(queries), jsonl=corpus_mod.to_jsonl(queries))


def handle_experiment(request: s.ExperimentRequest) -> s.ExperimentResponse:
    queries = _resolve_corpus(request.corpus_spec, request.corpus_jsonl)
    config = ExperimentConfig(
        corpus=request.corpus_spec.to_core() if request.corpus_spec else corpus_mod.CorpusSpec(),
        l_values=tuple(request.l_values),
        betas=tuple(request.betas),
        mechanisms=tuple(request.mechanisms),
        summarizer=request.summarizer.to_core(),
        out_dir=None,
        seed=request.seed,
        pos_base=request.pos_base,
        max_slots=request.max_slots,
        workers=request.workers,
        make_plots=request.make_plots,
    )
    result = run_experiment(config, queries=queries)
    return s.ExperimentResponse(
        rows=[
            s.ResultRowModel(
                l=r.l,
                beta=r.beta,
                mechanism=r.mechanism,
                mean_welfare=r.mean_welfare,
                std_err=r.std_err,
                n_queries=r.n_queries,
            )
            for r in result.rows
        ],
        csv=result.csv,
        plots=[
            s.PlotFileModel(filename=name, svg=svg)
            for name, svg in sorted(result.plots.items())
        ],
    )


def handle_payments(request: s.PaymentsRequest) -> s.PaymentsResponse:
    queries = _resolve_corpus(request.corpus_spec, request.corpus_jsonl)
    config = ExperimentConfig(
        betas=(request.params.beta,),
        l_values=(request.params.word_limit,),
        pos_base=request.params.pos_base,
        max_slots=request.params.max_slots,
    )
    rows, csv = report_payments(config, queries=queries)
    return s.PaymentsResponse(
        rows=[
            s.PaymentRowModel(
                query_id=r.query_id,
                ad_id=r.ad_id,
                bid=r.bid,
                prominence=r.prominence,
                budget=r.budget,
                payment=r.payment,
                internal_pctr=r.internal_pctr,
            )
            for r in rows
        ],
        csv=csv,
    )


def handle_check(request: s.CheckRequest) -> s.CheckResponse:
    queries = _resolve_corpus(request.corpus_spec, request.corpus_jsonl)
    config = ExperimentConfig(
        betas=(request.params.beta,),
        l_values=(request.params.word_limit,),
        pos_base=request.params.pos_base,
        max_slots=request.params.max_slots,
        seed=request.seed,
    )
    violations = run_checks(
        config,
        mechanism=request.mechanism,
        checks=tuple(request.checks),
        sample_queries=request.sample_queries,
        deviations_per_bidder=request.deviations_per_bidder,
        ic_tol=request.ic_tol,
        queries=queries,
    )
    return s.CheckResponse(
        violations=[
            s.ViolationModel(
                kind=v.kind,
                query_id=v.query_id,
                bidder=v.bidder,
                baseline_value=v.baseline_value,
                deviating_value=v.deviating_value,
                gap=v.gap,
            )
            for v in violations
        ],
        jsonl=reports_to_jsonl(violations),
    )


def _resolve_corpus(
    spec: s.CorpusSpecModel | None, jsonl: str | None
) -> list[QueryInstance]:
    if (spec is None) == (jsonl is None):
        raise ValueError("provide exactly one of corpus_spec or corpus_jsonl")
    if spec is not None:
        return corpus_mod.generate(spec.to_core())
    return corpus_mod.from_jsonl(jsonl)
