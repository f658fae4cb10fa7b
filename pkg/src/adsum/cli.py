"""Command-line client for the auction service.

Subcommands: ``gen`` (corpus), ``run`` (welfare experiment), ``pay``
(payment report), ``check`` (property suite), ``serve`` (start the HTTP
service). Every command builds the same request model the HTTP API accepts
and either calls the handler in-process (default) or posts it to a running
server (``--server URL``); outputs are identical either way.

Option precedence: built-in defaults < ``--config`` file < explicit flags.
``check`` exits with code 2 when any property violation is found.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .service import handlers
from .service import schemas as s


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adsum",
        description="Prominence-based ad auctions with word-budget summaries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic corpus (JSONL)")
    _common_flags(gen)
    gen.add_argument("--n-queries", type=int, help="number of queries to generate")
    gen.add_argument("--distinct-tokens", action="store_true", default=None,
                     help="all-distinct creative tokens (calibration corpora)")
    gen.set_defaults(func=cmd_gen)

    runp = sub.add_parser("run", help="run the welfare experiment grid")
    _common_flags(runp)
    _corpus_flags(runp)
    runp.add_argument("--l", dest="l_values", type=_int_list,
                      help="comma-separated word limits, e.g. 40,60,80")
    runp.add_argument("--beta", dest="betas", type=_float_list,
                      help="comma-separated compression exponents in (0,1)")
    runp.add_argument("--mechanism", dest="mechanisms", type=_str_list,
                      help="comma-separated subset of gpa_dwls,greedy,pos_fixed_length")
    runp.add_argument("--workers", type=int, help="worker threads over queries")
    runp.add_argument("--no-plots", action="store_true", help="skip SVG plot files")
    runp.set_defaults(func=cmd_run)

    pay = sub.add_parser("pay", help="per-bidder payment report (gpa_dwls)")
    _common_flags(pay)
    _corpus_flags(pay)
    pay.add_argument("--l", dest="l_value", type=int, help="word limit")
    pay.add_argument("--beta", dest="beta", type=float, help="compression exponent")
    pay.set_defaults(func=cmd_pay)

    check = sub.add_parser("check", help="IC/monotonicity/scale-freeness suite")
    _common_flags(check)
    _corpus_flags(check)
    check.add_argument("--mechanism", default="gpa_dwls", help="mechanism to check")
    check.add_argument("--checks", type=_str_list,
                       default=["ic", "monotonicity", "scale_free"],
                       help="comma-separated subset of ic,monotonicity,scale_free")
    check.add_argument("--sample", type=int, default=200, help="queries to sample")
    check.add_argument("--deviations", type=int, default=20,
                       help="deviating bids per bidder for the IC check")
    check.add_argument("--l", dest="l_value", type=int, help="word limit")
    check.add_argument("--beta", dest="beta", type=float, help="compression exponent")
    check.set_defaults(func=cmd_check)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--out", help="output file (gen/pay/check) or directory (run)")
    p.add_argument("--summarizer", help="truncation | frequency_greedy | external_llm")
    p.add_argument("--endpoint", help="external summarizer URL (external_llm only)")
    p.add_argument("--server", help="run against this service URL instead of in-process")


def _corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", help="existing corpus JSONL (default: generate)")
    p.add_argument("--n-queries", type=int, help="corpus size when generating")


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _load_config(args) -> dict:
    values: dict = {}
    if getattr(args, "config", None):
        values = harness.parse_config_text(Path(args.config).read_text(encoding="utf-8"))
    return values


def _corpus_fields(args, values: dict) -> dict:
    """corpus_spec/corpus_jsonl request fields from flags and config."""
    corpus_path = getattr(args, "corpus", None) or values.get("corpus")
    if corpus_path:
        return {"corpus_jsonl": Path(corpus_path).read_text(encoding="utf-8")}
    spec = s.CorpusSpecModel()
    if values.get("n_queries") is not None:
        spec = spec.model_copy(update={"n_queries": values["n_queries"]})
    if getattr(args, "n_queries", None) is not None:
        spec = spec.model_copy(update={"n_queries": args.n_queries})
    seed = _pick(args, values, "seed")
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})
    if values.get("distinct_tokens") is not None:
        spec = spec.model_copy(update={"distinct_tokens": values["distinct_tokens"]})
    return {"corpus_spec": spec}


def _summarizer_model(args, values: dict) -> s.SummarizerModel:
    kind = getattr(args, "summarizer", None) or values.get("summarizer") or "truncation"
    endpoint = getattr(args, "endpoint", None) or values.get("endpoint")
    return s.SummarizerModel(kind=kind, endpoint=endpoint)


def _pick(args, values: dict, name: str, default=None):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    if name in values:
        return values[name]
    return default


def cmd_gen(args) -> int:
    values = _load_config(args)
    spec = s.CorpusSpecModel(
        n_queries=_pick(args, values, "n_queries", 1000),
        seed=_pick(args, values, "seed", 0),
        distinct_tokens=_pick(args, values, "distinct_tokens", False),
    )
    request = s.CorpusGenRequest(spec=spec)
    response = _dispatch(args, "/corpus/generate", request,
                         handlers.handle_corpus_gen, s.CorpusGenResponse)
    out = Path(_pick(args, values, "out", "corpus.jsonl"))
    out.write_text(response.jsonl, encoding="utf-8")
    print(f"wrote {response.n_queries} queries to {out}")
    return 0


def cmd_run(args) -> int:
    values = _load_config(args)
    request = s.ExperimentRequest(
        **_corpus_fields(args, values),
        l_values=_pick(args, values, "l_values", list(harness.DEFAULT_L_VALUES)),
        betas=_pick(args, values, "betas", list(harness.DEFAULT_BETAS)),
        mechanisms=_pick(args, values, "mechanisms", list(s.MechanismName.__args__)),
        summarizer=_summarizer_model(args, values),
        pos_base=_pick(args, values, "pos_base", 0.9),
        max_slots=_pick(args, values, "max_slots", 4),
        workers=_pick(args, values, "workers", 1),
        make_plots=not args.no_plots and _pick(args, values, "make_plots", True),
        seed=_pick(args, values, "seed", 0),
    )
    response = _dispatch(args, "/experiment/run", request,
                         handlers.handle_experiment, s.ExperimentResponse)
    out_dir = Path(_pick(args, values, "out", None) or values.get("out_dir") or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.csv").write_text(response.csv, encoding="utf-8")
    for plot in response.plots:
        (out_dir / plot.filename).write_text(plot.svg, encoding="utf-8")
    print(f"wrote {len(response.rows)} result rows to {out_dir / 'results.csv'}")
    return 0


def cmd_pay(args) -> int:
    values = _load_config(args)
    params = s.ParamsModel(
        beta=_pick(args, values, "beta", 0.5),
        word_limit=_pick(args, values, "l_value", 60),
        pos_base=_pick(args, values, "pos_base", 0.9),
        max_slots=_pick(args, values, "max_slots", 4),
    )
    request = s.PaymentsRequest(**_corpus_fields(args, values), params=params)
    response = _dispatch(args, "/payments/report", request,
                         handlers.handle_payments, s.PaymentsResponse)
    out = Path(_pick(args, values, "out", "payments.csv"))
    out.write_text(response.csv, encoding="utf-8")
    print(f"wrote {len(response.rows)} payment rows to {out}")
    return 0


def cmd_check(args) -> int:
    values = _load_config(args)
    params = s.ParamsModel(
        beta=_pick(args, values, "beta", 0.5),
        word_limit=_pick(args, values, "l_value", 60),
        pos_base=_pick(args, values, "pos_base", 0.9),
        max_slots=_pick(args, values, "max_slots", 4),
    )
    request = s.CheckRequest(
        **_corpus_fields(args, values),
        mechanism=args.mechanism,
        checks=args.checks,
        params=params,
        sample_queries=args.sample,
        deviations_per_bidder=args.deviations,
        seed=_pick(args, values, "seed", 0),
    )
    response = _dispatch(args, "/properties/check", request,
                         handlers.handle_check, s.CheckResponse)
    out = _pick(args, values, "out", None)
    if out:
        Path(out).write_text(response.jsonl, encoding="utf-8")
    if response.violations:
        print(f"{len(response.violations)} violation(s) found", file=sys.stderr)
        for v in response.violations[:10]:
            print(f"  {v.kind} {v.query_id} {v.bidder} gap={v.gap:.3g}", file=sys.stderr)
        return 2
    print("all property checks passed")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("adsum.service.app:app", host=args.host, port=args.port)
    return 0


def _dispatch(args, path: str, request, handler, response_cls):
    server = getattr(args, "server", None)
    if not server:
        return handler(request)
    import requests as _requests

    reply = _requests.post(
        server.rstrip("/") + path, json=request.model_dump(), timeout=600
    )
    if reply.status_code != 200:
        raise ValueError(f"server returned HTTP {reply.status_code}: {reply.text[:400]}")
    return response_cls.model_validate(reply.json())


if __name__ == "__main__":
    sys.exit(main())
