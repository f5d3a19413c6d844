import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from bitext_align.llm_align import (
    LlmConfig,
    MissingApiKey,
    MockMiss,
    PlaceholderMissing,
    PromptTemplate,
    ReplayMiss,
    TransportError,
    TransportExhausted,
    build_prompt,
    load_template,
    prompt_hash,
    request_alignment,
)
from bitext_align.llm_align import backends

MINIMAL = PromptTemplate("sys", "{SCHEMA}\n{SRC_BLOCK}\n--\n{TGT_BLOCK}", "S")


def test_minimal_prompt():
    p = build_prompt(["0\ta"], ["0\tb"], MINIMAL)
    assert p.count("0\ta") == 1 and p.count("0\tb") == 1
    assert p == "S\n0\ta\n--\n0\tb"


def test_missing_placeholder():
    bad = PromptTemplate("sys", "{SRC_BLOCK} {TGT_BLOCK}", "S")
    with pytest.raises(PlaceholderMissing):
        build_prompt(["0\ta"], ["0\tb"], bad)
    twice = PromptTemplate("sys", "{SRC_BLOCK} {SRC_BLOCK} {TGT_BLOCK} {SCHEMA}", "S")
    with pytest.raises(PlaceholderMissing):
        build_prompt(["0\ta"], ["0\tb"], twice)


def test_default_template_line_count():
    tpl = load_template()
    src = [f"{i}\tsource {i}" for i in range(100)]
    tgt = [f"{i}\ttarget {i}" for i in range(100)]
    prompt = build_prompt(src, tgt, tpl)
    # each block placeholder sits on its own line, so it contributes len(lines) - 1 extra lines
    fixed = len(tpl.user_text.replace("{SCHEMA}", tpl.schema_text).split("\n")) - 2
    assert len(prompt.split("\n")) == fixed + 100 + 100
    assert prompt == build_prompt(src, tgt, tpl)


def test_placeholder_text_inside_sentences_is_not_expanded():
    p = build_prompt(["0\tsee {TGT_BLOCK}"], ["0\t{SCHEMA}"], MINIMAL)
    assert p == "S\n0\tsee {TGT_BLOCK}\n--\n0\t{SCHEMA}"


def test_default_template_mentions_schema_and_indices():
    tpl = load_template()
    tpl.check()
    assert '"alignments"' in tpl.schema_text
    assert tpl.version == "translation_mapping_v1"


def test_prompt_hash_is_16_hex():
    h = prompt_hash("hello")
    assert len(h) == 16 and int(h, 16) >= 0
    assert h == prompt_hash("hello") != prompt_hash("hello ")


def test_mock_returns_fixture_verbatim():
    raw = '  {"alignments": []} trailing  '
    cfg = LlmConfig(backend="mock", mock_responses={"p1": raw})
    assert request_alignment("anything", cfg, pair_id="p1") == raw


def test_mock_chunk_override_and_dir(tmp_path):
    (tmp_path / "p1.json").write_text("whole")
    (tmp_path / "p1.chunk1.json").write_text("second")
    cfg = LlmConfig(backend="mock", mock_dir=str(tmp_path))
    assert request_alignment("x", cfg, pair_id="p1", chunk_id=0) == "whole"
    assert request_alignment("x", cfg, pair_id="p1", chunk_id=1) == "second"
    with pytest.raises(MockMiss):
        request_alignment("x", cfg, pair_id="nope")


def test_replay_hit_and_miss(tmp_path):
    cfg = LlmConfig(backend="replay", replay_dir=str(tmp_path))
    with pytest.raises(ReplayMiss) as exc:
        request_alignment("never recorded", cfg)
    assert exc.value.digest == prompt_hash("never recorded")
    (tmp_path / prompt_hash("p")).write_text("stored", encoding="utf-8")
    assert request_alignment("p", cfg) == "stored"


def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("NO_SUCH_KEY_VAR", raising=False)
    cfg = LlmConfig(backend="http_chat", endpoint_url="http://127.0.0.1:9", api_key_env="NO_SUCH_KEY_VAR")
    with pytest.raises(MissingApiKey):
        request_alignment("p", cfg)


@pytest.mark.parametrize("kwargs", [
    dict(backend="nope"), dict(temperature=-0.1), dict(max_retries=-1), dict(timeout=0),
    dict(backend="http_chat"), dict(backend="replay"),
])
def test_config_invariants(kwargs):
    with pytest.raises(ValueError):
        LlmConfig(**kwargs)


class ChatServer:
    """Scripted chat-completions endpoint: replies with the queued (status, body) pairs."""

    def __init__(self, script):
        self.script = list(script)
        self.requests = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = self.rfile.read(int(self.headers["Content-Length"]))
                outer.requests.append((dict(self.headers), json.loads(body)))
                status, reply = outer.script.pop(0) if outer.script else (500, "empty script")
                data = reply.encode() if isinstance(reply, str) else json.dumps(reply).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1/chat/completions"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def chat_reply(content):
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}


@pytest.fixture
def no_sleep(monkeypatch):
    delays = []
    monkeypatch.setattr(backends, "_sleep", delays.append)
    return delays


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv("TEST_LLM_KEY", "sk-test")
    return "TEST_LLM_KEY"


def http_cfg(url, key_env, **kw):
    return LlmConfig(backend="http_chat", endpoint_url=url, model_name="m-1", api_key_env=key_env, **kw)


def test_http_request_shape(api_key, no_sleep):
    with ChatServer([(200, chat_reply("RAW"))]) as srv:
        out = request_alignment("user text", http_cfg(srv.url, api_key, temperature=0.0),
                                system_text="sys text")
    assert out == "RAW"
    headers, body = srv.requests[0]
    assert headers["Authorization"] == "Bearer sk-test"
    assert body == {"model": "m-1", "temperature": 0.0, "messages": [
        {"role": "system", "content": "sys text"}, {"role": "user", "content": "user text"}]}


def test_http_custom_auth_header(api_key, no_sleep):
    with ChatServer([(200, chat_reply("ok"))]) as srv:
        request_alignment("u", http_cfg(srv.url, api_key, auth_header="x-goog-api-key", auth_scheme=""))
    assert srv.requests[0][0]["x-goog-api-key"] == "sk-test"


def test_http_retries_with_backoff(api_key, no_sleep):
    script = [(429, "slow down"), (503, "busy"), (200, chat_reply("finally"))]
    with ChatServer(script) as srv:
        out = request_alignment("u", http_cfg(srv.url, api_key, retry_backoff_base=0.5))
    assert out == "finally"
    assert no_sleep == [0.5, 1.0]
    assert len(srv.requests) == 3


def test_http_exhausted(api_key, no_sleep):
    with ChatServer([(500, "x")] * 4) as srv:
        with pytest.raises(TransportExhausted) as exc:
            request_alignment("u", http_cfg(srv.url, api_key, max_retries=3))
    assert exc.value.last_status == 500
    assert len(srv.requests) == 4
    assert no_sleep == [1.0, 2.0, 4.0]


def test_http_client_error_not_retried(api_key, no_sleep):
    with ChatServer([(401, "bad key"), (200, chat_reply("never"))]) as srv:
        with pytest.raises(TransportError) as exc:
            request_alignment("u", http_cfg(srv.url, api_key))
    assert exc.value.status == 401 and len(srv.requests) == 1


def test_http_connection_refused_counts_as_retryable(api_key, no_sleep):
    with ChatServer([]) as srv:
        url = srv.url
    with pytest.raises(TransportExhausted) as exc:
        request_alignment("u", http_cfg(url, api_key, max_retries=1, timeout=2))
    assert exc.value.last_status is None


def test_http_bad_shape(api_key, no_sleep):
    with ChatServer([(200, {"unexpected": True})]) as srv:
        with pytest.raises(TransportError):
            request_alignment("u", http_cfg(srv.url, api_key))


def test_record_then_replay(api_key, no_sleep, tmp_path):
    with ChatServer([(200, chat_reply('{"alignments": []}'))]) as srv:
        cfg = http_cfg(srv.url, api_key, replay_dir=str(tmp_path), record=True)
        live = request_alignment("prompt-A", cfg)
    assert (tmp_path / prompt_hash("prompt-A")).read_text() == live
    replayed = request_alignment("prompt-A", LlmConfig(backend="replay", replay_dir=str(tmp_path)))
    assert replayed == live
