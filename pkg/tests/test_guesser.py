import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from gg.corpus import CompileSpec, TranspilePair, artifact_from_text
from gg.errors import (
    BackendUnavailable,
    ContextOverflow,
    MutationInapplicable,
    ProtocolError,
    TemplateError,
)
from gg.guesser import (
    DEFAULT_TEMPLATE,
    CommandBackend,
    GuessCandidate,
    GuessRequest,
    HttpBackend,
    MutantBackend,
    OracleBackend,
    apply_mutation,
    estimate_budget,
    extract_prompt_asm,
    make_backend,
    render_prompt,
    request_guess,
)
from gg.tokenlab import Vocab


def _pair(source_text="movl $1, %eax\nret\n", target_text="mov w0, #1\nret\n"):
    source = artifact_from_text("p1", CompileSpec("x86_64", "O0"), source_text)
    target = artifact_from_text("p1", CompileSpec("armv8", "O0"), target_text)
    return TranspilePair(source=source, target_reference=target)


def _request(input_asm, **kwargs):
    defaults = dict(source_isa="x86_64", target_isa="armv8", opt="O0",
                    input_asm=input_asm)
    defaults.update(kwargs)
    return GuessRequest(**defaults)


class TestBudget:
    def test_small_input_fits(self):
        verdict = estimate_budget(_request("a " * 50), Vocab(entries=["a"]))
        assert verdict.fits

    def test_arithmetic_overflow(self):
        # 20000 single-char tokens + 19999 whitespace tokens, factor 1.0
        text = "a" * 20000
        verdict = estimate_budget(_request(text), Vocab(entries=[]))
        assert verdict.estimated_input_tokens == 20000
        assert verdict.estimated_total == 40000
        assert not verdict.fits

    def test_expansion_factor_applied(self):
        verdict = estimate_budget(_request("abcd"), Vocab(entries=["abcd"]),
                                  expansion={"armv8": 2.0})
        assert verdict.estimated_input_tokens == 1
        assert verdict.estimated_total == 3

    def test_monotone_in_input_length(self):
        vocab = Vocab(entries=["mov", "w0"])
        short = estimate_budget(_request("mov w0"), vocab)
        long = estimate_budget(_request("mov w0 mov w0 mov w0"), vocab)
        assert long.estimated_total >= short.estimated_total


class TestPrompt:
    def test_simple_substitution(self):
        rendered = render_prompt(_request("mov w0, #1"), "X:{src}->{dst}\n{asm}")
        assert rendered == "X:x86_64->armv8\nmov w0, #1"

    def test_missing_asm_placeholder(self):
        with pytest.raises(TemplateError):
            render_prompt(_request("x"), "X:{src}->{dst}")

    def test_default_template_round_trips(self):
        asm = "movl $1, %eax\nret"
        prompt = render_prompt(_request(asm), DEFAULT_TEMPLATE)
        assert extract_prompt_asm(prompt) == asm


class TestOracle:
    def test_returns_reference_at_rank_zero(self):
        pair = _pair()
        backend = OracleBackend([pair])
        out = request_guess(backend, _request(pair.source.normalized_text))
        assert len(out) == 1
        assert out[0].rank == 0
        assert out[0].text == pair.target_reference.normalized_text

    def test_unknown_input_rejected(self):
        backend = OracleBackend([_pair()])
        with pytest.raises(ProtocolError):
            backend.guess(_request("unknown text\n"))

    def test_budget_enforced_without_override(self):
        pair = _pair()
        backend = OracleBackend([pair])
        verdict = estimate_budget(
            _request(pair.source.normalized_text, context_window=1),
            Vocab(entries=[]))
        with pytest.raises(ContextOverflow):
            request_guess(backend, _request(pair.source.normalized_text),
                          verdict=verdict)
        out = request_guess(backend, _request(pair.source.normalized_text),
                            verdict=verdict, override=True)
        assert out[0].rank == 0


class TestMutations:
    def test_immediate_value_table_example(self):
        mutated = apply_mutation("asr r2, r2, #2\n", "immediate_value")
        assert mutated == "asr r2, r2, #1\n"

    def test_index_offset_table_example(self):
        mutated = apply_mutation("sub r3, r3, #2\n", "index_offset")
        assert mutated == "sub r3, r3, #1\n"

    def test_register_overwrite_changes_destination(self):
        mutated = apply_mutation("mov w8, w0\nret\n", "register_overwrite")
        assert mutated == "mov w9, w0\nret\n"

    def test_instruction_sequence_rewrites_select(self):
        mutated = apply_mutation("cmp w8, w9\ncset w8, lt\n", "instruction_sequence")
        assert mutated == "cmp w8, w9\nmov w8, #0\norr w8, w8, #1\n"

    def test_memory_offset_perturbed(self):
        mutated = apply_mutation("str w0, [sp, #12]\n", "memory_offset")
        assert mutated == "str w0, [sp, #8]\n"

    def test_inapplicable_rule_raises(self):
        with pytest.raises(MutationInapplicable):
            apply_mutation("ret\n", "immediate_value")

    def test_auto_tries_rules_in_order(self):
        assert apply_mutation("mov w8, #2\n", "auto") == "mov w8, #1\n"

    def test_unknown_rule_rejected(self):
        with pytest.raises(ValueError):
            apply_mutation("ret\n", "bogus_rule")

    def test_mutant_backend_produces_different_text(self):
        pair = _pair(target_text="mov w0, #2\nret\n")
        backend = MutantBackend([pair], rule="immediate_value")
        out = backend.guess(_request(pair.source.normalized_text))
        assert out[0].text != pair.target_reference.normalized_text
        assert "mov w0, #1" in out[0].text


class _TranspileHandler(BaseHTTPRequestHandler):
    beams = 3
    mode = "ok"

    def do_POST(self):
        assert self.path == "/v1/transpile"
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.mode == "bad_json":
            payload = b"{nope"
        elif self.mode == "wrong_id":
            payload = json.dumps({"request_id": "nope", "candidates": []}).encode()
        elif self.mode == "bad_ranks":
            payload = json.dumps({
                "request_id": body["request_id"],
                "candidates": [{"rank": 0, "text": "a"}, {"rank": 2, "text": "b"}],
            }).encode()
        else:
            candidates = [
                {"rank": i, "text": f"candidate {i}", "score": -float(i),
                 "truncated": False}
                for i in range(min(self.beams, body["beam_width"]))
            ]
            payload = json.dumps({"request_id": body["request_id"],
                                  "candidates": candidates}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _TranspileHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpBackend:
    def test_three_candidates_ranked(self, http_server):
        _TranspileHandler.mode = "ok"
        backend = HttpBackend(http_server)
        out = request_guess(backend, _request("mov w0, #1", beam_width=3))
        assert [c.rank for c in out] == [0, 1, 2]
        assert out[0].text == "candidate 0"

    def test_unreachable(self):
        backend = HttpBackend("http://127.0.0.1:1", timeout_s=0.5)
        with pytest.raises(BackendUnavailable):
            backend.guess(_request("x"))

    def test_malformed_response(self, http_server):
        _TranspileHandler.mode = "bad_json"
        try:
            with pytest.raises(ProtocolError):
                HttpBackend(http_server).guess(_request("x"))
        finally:
            _TranspileHandler.mode = "ok"

    def test_wrong_correlation_id(self, http_server):
        _TranspileHandler.mode = "wrong_id"
        try:
            with pytest.raises(ProtocolError):
                HttpBackend(http_server).guess(_request("x"))
        finally:
            _TranspileHandler.mode = "ok"

    def test_non_contiguous_ranks(self, http_server):
        _TranspileHandler.mode = "bad_ranks"
        try:
            backend = HttpBackend(http_server)
            with pytest.raises(ProtocolError):
                request_guess(backend, _request("x"))
        finally:
            _TranspileHandler.mode = "ok"


ECHO_BACKEND = (
    "import json,sys; req=json.load(sys.stdin); "
    "print(json.dumps({'request_id': req['request_id'], 'candidates': "
    "[{'rank': 0, 'text': 'echo: ' + req['input_asm']}]}))"
)


class TestCommandBackend:
    def test_round_trip(self):
        backend = CommandBackend(f"{sys.executable} -c \"{ECHO_BACKEND}\"")
        out = request_guess(backend, _request("mov w0, #1"))
        assert out[0].text == "echo: mov w0, #1"

    def test_nonzero_exit(self):
        backend = CommandBackend(f"{sys.executable} -c 'import sys; sys.exit(3)'")
        with pytest.raises(BackendUnavailable):
            backend.guess(_request("x"))

    def test_missing_command(self):
        backend = CommandBackend("definitely-not-a-backend-xyz")
        with pytest.raises(BackendUnavailable):
            backend.guess(_request("x"))


def test_make_backend_dispatch():
    pair = _pair()
    assert isinstance(make_backend("oracle", pairs=[pair]), OracleBackend)
    assert isinstance(make_backend("mutant", pairs=[pair]), MutantBackend)
    assert isinstance(make_backend("http", url="http://x"), HttpBackend)
    assert isinstance(make_backend("command", command="cat"), CommandBackend)
    with pytest.raises(ValueError):
        make_backend("carrier-pigeon")


def test_rank_zero_only_is_scored_contract():
    # rank 0 is the accuracy candidate regardless of beam width
    candidates = [GuessCandidate(rank=1, text="b"), GuessCandidate(rank=0, text="a")]
    ranked = sorted(candidates, key=lambda c: c.rank)
    assert ranked[0].text == "a"
