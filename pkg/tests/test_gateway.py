import threading
from collections import Counter

import httpx
import pytest

from optfuzz.collector import collect
from optfuzz.errors import BackendUnavailable, ContextOverflow, ReplayMiss
from optfuzz.gateway import stub_minilang
from optfuzz.gateway.backends import HttpBackend, RecordingBackend, RecordStore, ReplayBackend
from optfuzz.gateway.core import (
    Gateway,
    Role,
    analysis_role,
    extract_code_blocks,
    generation_role,
    strip_prompt_echo,
)
from optfuzz.gateway.stub import HETEROGENEOUS, StubBackend, StubConfig
from optfuzz.programs import TestProgram
from optfuzz.prompts.engine import (
    PromptBundle,
    PromptConfig,
    Requirement,
    RequirementFormat,
    build_feedback_prompt,
    build_generation_prompt,
    load_seed_shots,
)
from optfuzz.sut.base import Mode, RunRequest
from optfuzz.sut.minilang.sut import MINILANG_ROOT, MiniLangSut, minilang_descriptor
from optfuzz.triggers import parse_trigger_log

DESC = minilang_descriptor()
CATALOG = collect(DESC)
SHOTS = load_seed_shots(MINILANG_ROOT / "fewshot.yaml", CATALOG)
REQ = Requirement("mul_add_fuse", RequirementFormat.MIXED, "multiply then add\n", "stub")


def gen_prompt(opt="mul_add_fuse"):
    return build_generation_prompt(Requirement(opt, RequirementFormat.MIXED, "r\n", "stub"), SHOTS.generation, DESC)


def test_role_defaults():
    a, g = analysis_role(), generation_role()
    assert (a.role, a.temperature, a.samples_per_call) == (Role.ANALYSIS, 0.0, 1)
    assert (g.role, g.temperature, g.samples_per_call) == (Role.GENERATION, 1.0, 10)
    assert g.max_output == 4096


def test_stub_deterministic_and_batch_size():
    gw = Gateway(StubBackend())
    a = gw.complete(generation_role(), gen_prompt(), 3)
    b = Gateway(StubBackend()).complete(generation_role(), gen_prompt(), 3)
    assert a.texts == b.texts and len(a.texts) == 10
    c = gw.complete(generation_role(), gen_prompt(), 4)
    assert c.texts != a.texts


def test_cache_hits_and_file(tmp_path):
    stub = StubBackend()
    gw = Gateway(stub, tmp_path / "cache.jsonl")
    gw.complete(generation_role(), gen_prompt(), 1)
    again = gw.complete(generation_role(), gen_prompt(), 1)
    assert again.from_cache and stub.calls == 1
    reloaded = Gateway(StubBackend(), tmp_path / "cache.jsonl")
    assert reloaded.complete(generation_role(), gen_prompt(), 1).from_cache


def test_context_budget_enforced():
    role = generation_role(context=PromptConfig(context_tokens=10, chars_per_token=1))
    with pytest.raises(ContextOverflow):
        Gateway(StubBackend()).complete(role, gen_prompt(), 0)


def test_truncation_flagged():
    r = Gateway(StubBackend()).complete(generation_role(max_output=10), gen_prompt(), 0)
    assert r.truncated and all(len(t) <= 10 for t in r.texts)


def test_record_then_replay(tmp_path):
    store = RecordStore(tmp_path)
    rec = Gateway(RecordingBackend(StubBackend(), store))
    first = rec.complete(generation_role(), gen_prompt(), 9).texts
    replay = Gateway(ReplayBackend(RecordStore(tmp_path)))
    assert replay.complete(generation_role(), gen_prompt(), 9).texts == first
    with pytest.raises(ReplayMiss):
        replay.complete(generation_role(), gen_prompt(), 10)


def test_stub_and_replay_never_build_http_client(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("network client constructed")

    monkeypatch.setattr(httpx, "Client", boom)
    Gateway(StubBackend()).complete(generation_role(), gen_prompt(), 0)
    HttpBackend("http://127.0.0.1:9/none")  # constructing the backend alone must not connect


class FakeClient:
    def __init__(self, responses):
        self.responses = list(responses)
        self.payloads = []

    def post(self, url, json):
        self.payloads.append(json)
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return httpx.Response(r[0], json=r[1], request=httpx.Request("POST", url))


def test_http_retries_with_backoff():
    client = FakeClient([httpx.ConnectError("down"), (503, {}), (200, {"texts": ["a", "b"]})])
    sleeps = []
    be = HttpBackend("http://x", client_factory=lambda: client, sleep=sleeps.append, backoff=0.5)
    role = generation_role(samples_per_call=2)
    assert be.generate(gen_prompt(), role, 7) == ["a", "b"]
    assert sleeps == [0.5, 1.0]
    p = client.payloads[0]
    assert (p["n"], p["temperature"], p["seed"], p["stop"]) == (2, 1.0, 7, ["====="])


def test_http_gives_up_after_three_attempts():
    client = FakeClient([(500, {})] * 3)
    be = HttpBackend("http://x", client_factory=lambda: client, sleep=lambda s: None)
    with pytest.raises(BackendUnavailable):
        be.generate(gen_prompt(), generation_role(), 0)
    assert len(client.payloads) == 3


def test_http_inflight_cap():
    active, peak = [0], [0]
    lock = threading.Lock()

    class Slow:
        def post(self, url, json):
            with lock:
                active[0] += 1
                peak[0] = max(peak[0], active[0])
            threading.Event().wait(0.02)
            with lock:
                active[0] -= 1
            return httpx.Response(200, json={"texts": ["x"]}, request=httpx.Request("POST", url))

    be = HttpBackend("http://x", max_inflight=2, client_factory=Slow)
    threads = [threading.Thread(target=be.generate, args=(gen_prompt(), generation_role(), i)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert peak[0] <= 2


def test_extract_code_blocks():
    assert extract_code_blocks("a\n```\nx\n```\nb\n```py\ny\n```\n") == ["x\n", "y\n"]
    assert extract_code_blocks("print(1)") == ["print(1)\n"]
    assert extract_code_blocks("") == []
    assert extract_code_blocks("```c\nint a;\n```\n```py\nb\n```", expected_kind="c") == ["int a;\n"]
    assert extract_code_blocks("text\n```\nunterminated\n") == ["unterminated\n"]


def test_prompt_echo_removed():
    # a completion that repeats the whole prompt (which itself holds a fenced
    # seed test) before answering: only the answer survives
    prompt = gen_prompt().text
    completion = prompt + "```\nprint(41)\n```\n"
    assert "```" in prompt
    assert extract_code_blocks(completion, prompt=prompt) == ["print(41)\n"]
    assert strip_prompt_echo("unrelated", prompt) == "unrelated"


def test_stub_competence_is_binomial():
    cfg = StubConfig(competence={"mul_add_fuse": 0.3})
    stub, sut = StubBackend(cfg), MiniLangSut()
    hits = 0
    for seed in range(40):
        for text in stub.generate(gen_prompt(), generation_role(), seed):
            code = extract_code_blocks(text)[0]
            r = sut.compile_and_run(RunRequest(code, Mode.OPTIMIZED))
            hits += "mul_add_fuse" in parse_trigger_log(r.trigger_log)
    # 400 draws at p = 0.3: mean 120, sigma ~ 9.2
    assert abs(hits - 120) < 3 * 9.2


def test_feedback_uplift():
    stub = StubBackend()
    ex = [TestProgram("e", "mul_add_fuse", stub_minilang.program("mul_add_fuse", 0, __import__("random").Random(1)), 0)]
    fb = build_feedback_prompt(REQ, ex, DESC)
    texts = [t for s in range(30) for t in stub.generate(fb, generation_role(), s)]
    assert sum("should trigger" in t for t in texts) > 0.45 * len(texts)


def test_stub_summary_is_mixed():
    from optfuzz.prompts.engine import build_summarization_prompt

    p = build_summarization_prompt(CATALOG[0], SHOTS.summarization, DESC)
    (text,) = StubBackend().generate(p, analysis_role(), 0)
    assert "```" in text and CATALOG[0].name in text


def test_heterogeneous_preset_validated():
    assert HETEROGENEOUS.variant_competence[0] == 0.95
    with pytest.raises(ValueError):
        StubConfig(variant_competence=(0.5,))
    with pytest.raises(ValueError):
        StubConfig(base_competence=1.5)
