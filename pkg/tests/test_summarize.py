"""Summarizer behavior: budgets, greedy extraction, and the remote client."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsum.evaluate import rouge_recall
from adsum.model import AuctionOutcome, ProminenceVector
from adsum.summarize import (
    SummarizationError,
    SummarizerSpec,
    load_prompt_template,
    render_bundle,
    render_prompt,
    split_words,
    summarize,
)

from conftest import ads_from_products

TRUNC = SummarizerSpec(kind="truncation")
GREEDY = SummarizerSpec(kind="frequency_greedy")


class _MockSummarizer(BaseHTTPRequestHandler):
    """Echoes a truncation of the posted creative; scriptable failures."""

    behavior = {"fail_times": 0, "extra_words": 0, "status": 200}
    calls = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).calls.append(body)
        if self.behavior["fail_times"] > 0:
            self.behavior["fail_times"] -= 1
            self.send_response(500)
            self.end_headers()
            return
        words = body["creative"].split()[: body["word_budget"]]
        words += ["padding"] * self.behavior["extra_words"]
        payload = json.dumps({"summary": " ".join(words)}).encode()
        self.send_response(self.behavior["status"])
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def mock_server():
    server = HTTPServer(("127.0.0.1", 0), _MockSummarizer)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _MockSummarizer.behavior = {"fail_times": 0, "extra_words": 0, "status": 200}
    _MockSummarizer.calls = []
    yield f"http://127.0.0.1:{server.server_address[1]}/summarize"
    server.shutdown()


def llm_spec(endpoint, **kwargs):
    return SummarizerSpec(kind="external_llm", endpoint=endpoint, **kwargs)


class TestSpecValidation:
    def test_endpoint_required_for_external(self):
        with pytest.raises(ValueError, match="endpoint"):
            SummarizerSpec(kind="external_llm")

    def test_endpoint_forbidden_for_builtin(self):
        with pytest.raises(ValueError, match="endpoint"):
            SummarizerSpec(kind="truncation", endpoint="http://x")

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            SummarizerSpec(kind="magic")

    def test_timeout_positive(self):
        with pytest.raises(ValueError, match="timeout"):
            SummarizerSpec(kind="truncation", timeout_ms=0)


class TestBuiltins:
    def test_truncation_prefix(self):
        assert summarize("a b c d", 2, TRUNC) == "a b"

    def test_zero_budget_empty(self):
        assert summarize("anything at all", 0, TRUNC) == ""
        assert summarize("anything at all", 0, GREEDY) == ""

    def test_big_budget_verbatim(self):
        creative = "Exact  spacing, kept! verbatim"
        assert summarize(creative, 10, TRUNC) == creative
        assert summarize(creative, 4, GREEDY) == creative

    def test_greedy_prefers_frequent_then_first(self):
        assert summarize("x y x z", 2, GREEDY) == "x y"

    def test_greedy_third_word(self):
        assert summarize("x y x z", 3, GREEDY) == "x y z"

    def test_greedy_repeats_when_types_exhausted(self):
        assert summarize("x x x x", 2, GREEDY) == "x x"

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError):
            summarize("a b", -1, TRUNC)

    @given(
        words=st.lists(st.sampled_from("alpha beta gamma delta".split()), min_size=1, max_size=30),
        budget=st.integers(0, 40),
        kind=st.sampled_from(["truncation", "frequency_greedy"]),
    )
    def test_budget_always_respected(self, words, budget, kind):
        creative = " ".join(words)
        out = summarize(creative, budget, SummarizerSpec(kind=kind))
        assert len(split_words(out)) <= budget

    @pytest.mark.parametrize("spec", [TRUNC, GREEDY])
    def test_recall_nondecreasing_in_budget(self, spec):
        creative = (
            "fresh roasted coffee beans delivered monthly fresh flavor "
            "guaranteed beans from small farms roasted to order"
        )
        n = len(split_words(creative))
        recalls = [
            rouge_recall(summarize(creative, w, spec), creative) for w in range(n + 2)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(recalls, recalls[1:]))
        assert recalls[0] == 0.0
        assert recalls[-1] == 1.0


class TestRenderBundle:
    def _outcome(self, budgets):
        n = len(budgets)
        shown = tuple(i for i, b in enumerate(budgets) if b > 0)
        total = sum(budgets)
        return AuctionOutcome(
            ordering=tuple(range(n)),
            prominence=ProminenceVector(tuple(b / max(total, 1) for b in budgets)),
            word_budgets=tuple(budgets),
            payments=None,
            internal_pctr=tuple(0.5 if i in shown else 0.0 for i in range(n)),
        )

    def test_three_summaries_in_slot_order(self):
        ads = ads_from_products((0.6, 0.5, 0.4), (1.0, 1.0, 1.0))
        bundle = render_bundle(ads, self._outcome([25, 20, 15]), TRUNC)
        assert [(e.ad_id, e.rank) for e in bundle] == [("ad0", 1), ("ad1", 2), ("ad2", 3)]
        assert [len(split_words(e.text)) for e in bundle] == [25, 20, 15]

    def test_zero_budget_ad_omitted_and_ranks_close_up(self):
        ads = ads_from_products((0.6, 0.5, 0.4), (1.0, 1.0, 1.0))
        bundle = render_bundle(ads, self._outcome([35, 25, 0]), TRUNC)
        assert [(e.ad_id, e.rank) for e in bundle] == [("ad0", 1), ("ad1", 2)]

    def test_all_zero_budgets_empty_bundle(self):
        ads = ads_from_products((0.6, 0.5), (1.0, 1.0))
        assert len(render_bundle(ads, self._outcome([0, 0]), TRUNC)) == 0


class TestExternalClient:
    def test_happy_path(self, mock_server):
        out = summarize("one two three four five six", 3, llm_spec(mock_server))
        assert out == "one two three"

    def test_overlong_reply_post_truncated(self, mock_server):
        _MockSummarizer.behavior["extra_words"] = 10
        out = summarize("one two three four five six", 3, llm_spec(mock_server))
        assert len(split_words(out)) == 3

    def test_retries_then_succeeds(self, mock_server):
        _MockSummarizer.behavior["fail_times"] = 2
        out = summarize("one two three four five six", 2, llm_spec(mock_server))
        assert out == "one two"
        assert len(_MockSummarizer.calls) == 3

    def test_persistent_failure_raises(self, mock_server):
        _MockSummarizer.behavior["fail_times"] = 99
        with pytest.raises(SummarizationError):
            summarize("one two three four", 2, llm_spec(mock_server))
        assert len(_MockSummarizer.calls) == 3

    def test_bundle_error_carries_ad_id(self, mock_server):
        _MockSummarizer.behavior["fail_times"] = 99
        ads = ads_from_products((0.6,), (1.0,))
        outcome = AuctionOutcome(
            ordering=(0,),
            prominence=ProminenceVector((1.0,)),
            word_budgets=(10,),
            payments=None,
            internal_pctr=(0.4,),
        )
        with pytest.raises(SummarizationError) as exc:
            render_bundle(ads, outcome, llm_spec(mock_server))
        assert exc.value.ad_id == "ad0"

    def test_fallback_to_truncation(self, mock_server):
        _MockSummarizer.behavior["fail_times"] = 99
        ads = ads_from_products((0.6,), (1.0,))
        outcome = AuctionOutcome(
            ordering=(0,),
            prominence=ProminenceVector((1.0,)),
            word_budgets=(5,),
            payments=None,
            internal_pctr=(0.4,),
        )
        bundle = render_bundle(
            ads, outcome, llm_spec(mock_server, fallback_truncation=True)
        )
        assert len(bundle) == 1
        assert bundle.entries[0].text == " ".join(split_words(ads[0].text)[:5])

    def test_prompt_contains_budget_and_creative(self, mock_server):
        summarize("unique creative words here and more", 2, llm_spec(mock_server))
        prompt = _MockSummarizer.calls[-1]["prompt"]
        assert "unique creative words here and more" in prompt
        assert "2" in prompt

    def test_bundled_template_renders(self):
        template = load_prompt_template(TRUNC)
        rendered = render_prompt(template, "the creative", 7)
        assert "the creative" in rendered
        assert "7" in rendered
        assert "{creative}" not in rendered
