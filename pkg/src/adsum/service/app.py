"""FastAPI app exposing the auction library over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers
from . import schemas as s


def create_app() -> FastAPI:
    app = FastAPI(
        title="adsum",
        description="Prominence-based ad auctions with word-budget summaries",
        version="0.1.0",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/auction/run", response_model=s.AuctionRunResponse)
    def auction_run(request: s.AuctionRunRequest) -> s.AuctionRunResponse:
        return _guard(handlers.handle_auction_run, request)

    @app.post("/corpus/generate", response_model=s.CorpusGenResponse)
    def corpus_generate(request: s.CorpusGenRequest) -> s.CorpusGenResponse:
        return _guard(handlers.handle_corpus_gen, request)

    @app.post("/experiment/run", response_model=s.ExperimentResponse)
    def experiment_run(request: s.ExperimentRequest) -> s.ExperimentResponse:
        return _guard(handlers.handle_experiment, request)

    @app.post("/payments/report", response_model=s.PaymentsResponse)
    def payments_report(request: s.PaymentsRequest) -> s.PaymentsResponse:
        return _guard(handlers.handle_payments, request)

    @app.post("/properties/check", response_model=s.CheckResponse)
    def properties_check(request: s.CheckRequest) -> s.CheckResponse:
        return _guard(handlers.handle_check, request)

    return app


def _guard(handler, request):
    try:
        return handler(request)
    except ValueError as err:
        raise HTTPException(status_code=400, detail=str(err)) from err


app = create_app()
