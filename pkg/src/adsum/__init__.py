"""Prominence-based ad auctions with word-budget summaries.

A library and simulator for auctions whose outcome is a summary paragraph:
the auction allocates each ad a prominence share of a total word budget,
summarizers compress creatives to their budgets, payments follow the
Myerson own-bid integral, and welfare is evaluated against a ROUGE-based
CTR model. Ships a benchmark harness, a property-check suite, an HTTP
service, and a CLI.
"""

from .allocation import (
    compute_ecpm,
    gpa_allocate,
    optimal_welfare,
    rank_ads,
    words_from_prominence,
)
from .corpus import CorpusSpec, generate, load, save
from .evaluate import WelfareReport, WelfareRow, eval_ctr, rouge_recall, welfare
from .harness import ExperimentConfig, report_payments, run_checks, run_experiment
from .mechanisms import (
    MECHANISM_KINDS,
    MechanismSpec,
    run,
    run_gpa,
    run_greedy,
    run_pos_fixed,
)
from .model import (
    AdCandidate,
    AuctionOutcome,
    EcpmVector,
    EvalParams,
    ProminenceVector,
    QueryInstance,
    SummaryBundle,
    SummaryEntry,
    internal_final_pctr,
)
from .pricing import BidCurvePiece, breakpoints, myerson_payment, payment_oracle
from .properties import (
    ViolationReport,
    check_ic,
    check_monotone,
    check_scale_free,
)
from .summarize import SummarizerSpec, render_bundle, summarize

__version__ = "0.1.0"

__all__ = [
    "AdCandidate",
    "AuctionOutcome",
    "BidCurvePiece",
    "CorpusSpec",
    "EcpmVector",
    "EvalParams",
    "ExperimentConfig",
    "MECHANISM_KINDS",
    "MechanismSpec",
    "ProminenceVector",
    "QueryInstance",
    "SummarizerSpec",
    "SummaryBundle",
    "SummaryEntry",
    "ViolationReport",
    "WelfareReport",
    "WelfareRow",
    "breakpoints",
    "check_ic",
    "check_monotone",
    "check_scale_free",
    "compute_ecpm",
    "eval_ctr",
    "generate",
    "gpa_allocate",
    "internal_final_pctr",
    "load",
    "myerson_payment",
    "optimal_welfare",
    "payment_oracle",
    "rank_ads",
    "render_bundle",
    "report_payments",
    "rouge_recall",
    "run",
    "run_checks",
    "run_experiment",
    "run_gpa",
    "run_greedy",
    "run_pos_fixed",
    "save",
    "summarize",
    "welfare",
    "words_from_prominence",
]
