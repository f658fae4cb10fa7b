"""Pydantic request/response models for the HTTP service.

These mirror the core dataclasses closely enough that the CLI can run the
same request either against a remote server or in-process through the
handlers, with identical results.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import corpus as corpus_mod
from ..model import AdCandidate, EvalParams, QueryInstance
from ..summarize import SummarizerSpec

MechanismName = Literal["gpa_dwls", "greedy", "pos_fixed_length"]
SummarizerName = Literal["truncation", "frequency_greedy", "external_llm"]
CheckName = Literal["ic", "monotonicity", "scale_free"]


class AdModel(BaseModel):
    ad_id: str
    url: str = ""
    text: str
    bid: float = Field(ge=0)
    base_ctr: float = Field(ge=0, le=1)

    def to_core(self) -> AdCandidate:
        return AdCandidate(
            ad_id=self.ad_id,
            url=self.url,
            text=self.text,
            bid=self.bid,
            base_ctr=self.base_ctr,
        )


class QueryModel(BaseModel):
    query_id: str
    query: str = ""
    ads: list[AdModel]

    def to_core(self) -> QueryInstance:
        return QueryInstance(
            query_id=self.query_id,
            query=self.query,
            ads=tuple(ad.to_core() for ad in self.ads),
        )


class ParamsModel(BaseModel):
    beta: float = Field(default=0.5, gt=0, le=1)
    word_limit: int = Field(default=60, ge=0)
    pos_base: float = Field(default=0.9, gt=0, le=1)
    max_slots: int = Field(default=4, ge=1)

    def to_core(self) -> EvalParams:
        return EvalParams(
            beta=self.beta,
            word_limit=self.word_limit,
            pos_base=self.pos_base,
            max_slots=self.max_slots,
        )


class SummarizerModel(BaseModel):
    kind: SummarizerName = "truncation"
    endpoint: Optional[str] = None
    timeout_ms: int = Field(default=10_000, gt=0)
    prompt_template_path: Optional[str] = None
    fallback_truncation: bool = False

    def to_core(self) -> SummarizerSpec:
        return SummarizerSpec(
            kind=self.kind,
            endpoint=self.endpoint,
            timeout_ms=self.timeout_ms,
            prompt_template_path=self.prompt_template_path,
            fallback_truncation=self.fallback_truncation,
        )


class CorpusSpecModel(BaseModel):
    n_queries: int = Field(default=1000, ge=0)
    seed: int = Field(default=0, ge=0)
    ads_per_query: tuple[int, int] = (2, 4)
    bid_lognormal: tuple[float, float] = (0.5, 1.0)
    ctr_uniform: tuple[float, float] = (0.0, 1.0)
    creative_words: tuple[int, int] = (30, 60)
    distinct_tokens: bool = False

    def to_core(self) -> corpus_mod.CorpusSpec:
        return corpus_mod.CorpusSpec(
            n_queries=self.n_queries,
            seed=self.seed,
            ads_per_query=self.ads_per_query,
            bid_lognormal=self.bid_lognormal,
            ctr_uniform=self.ctr_uniform,
            creative_words=self.creative_words,
            distinct_tokens=self.distinct_tokens,
        )


class OutcomeModel(BaseModel):
    ordering: list[int]
    prominence: list[float]
    word_budgets: list[int]
    payments: Optional[list[float]] = None
    internal_pctr: list[float]


class BundleEntryModel(BaseModel):
    ad_id: str
    summary: str
    rank: int


class WelfareRowModel(BaseModel):
    ad_id: str
    rouge: float
    eval_ctr: float
    value_contribution: float


class WelfareModel(BaseModel):
    per_ad: list[WelfareRowModel]
    total_welfare: float


class AuctionRunRequest(BaseModel):
    query: QueryModel
    mechanism: MechanismName = "gpa_dwls"
    params: ParamsModel = ParamsModel()
    summarizer: SummarizerModel = SummarizerModel()
    compute_payments: bool = False
    include_summaries: bool = True
    include_welfare: bool = True


class AuctionRunResponse(BaseModel):
    query_id: str
    mechanism: MechanismName
    outcome: OutcomeModel
    bundle: Optional[list[BundleEntryModel]] = None
    welfare: Optional[WelfareModel] = None


class CorpusGenRequest(BaseModel):
    spec: CorpusSpecModel = CorpusSpecModel()


class CorpusGenResponse(BaseModel):
    n_queries: int
    jsonl: str


class ExperimentRequest(BaseModel):
    corpus_spec: Optional[CorpusSpecModel] = None
    corpus_jsonl: Optional[str] = None
    l_values: list[int] = [40, 60, 80, 120, 160]
    betas: list[float] = [1 / 2, 1 / 3, 1 / 4]
    mechanisms: list[MechanismName] = ["gpa_dwls", "greedy", "pos_fixed_length"]
    summarizer: SummarizerModel = SummarizerModel()
    pos_base: float = Field(default=0.9, gt=0, le=1)
    max_slots: int = Field(default=4, ge=1)
    workers: int = Field(default=1, ge=1)
    make_plots: bool = True
    seed: int = 0


class ResultRowModel(BaseModel):
    l: int
    beta: float
    mechanism: str
    mean_welfare: float
    std_err: float
    n_queries: int


class PlotFileModel(BaseModel):
    filename: str
    svg: str


class ExperimentResponse(BaseModel):
    rows: list[ResultRowModel]
    csv: str
    plots: list[PlotFileModel]


class PaymentsRequest(BaseModel):
    corpus_spec: Optional[CorpusSpecModel] = None
    corpus_jsonl: Optional[str] = None
    params: ParamsModel = ParamsModel()


class PaymentRowModel(BaseModel):
    query_id: str
    ad_id: str
    bid: float
    prominence: float
    budget: int
    payment: float
    internal_pctr: float


class PaymentsResponse(BaseModel):
    rows: list[PaymentRowModel]
    csv: str


class CheckRequest(BaseModel):
    corpus_spec: Optional[CorpusSpecModel] = None
    corpus_jsonl: Optional[str] = None
    mechanism: MechanismName = "gpa_dwls"
    checks: list[CheckName] = ["ic", "monotonicity", "scale_free"]
    params: ParamsModel = ParamsModel()
    sample_queries: int = Field(default=200, ge=1)
    deviations_per_bidder: int = Field(default=20, ge=1)
    ic_tol: float = Field(default=1e-5, gt=0)
    seed: int = 0


class ViolationModel(BaseModel):
    kind: str
    query_id: str
    bidder: str
    baseline_value: float
    deviating_value: float
    gap: float


class CheckResponse(BaseModel):
    violations: list[ViolationModel]
    jsonl: str
