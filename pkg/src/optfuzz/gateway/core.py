"""Model roles, the completion gateway and code extraction."""

from __future__ import annotations

import enum
import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ..errors import ContextOverflow
from ..prompts.engine import DELIMITER, PromptBundle, PromptConfig

DEFAULT_MAX_OUTPUT = 4096


class Role(str, enum.Enum):
    ANALYSIS = "Analysis"
    GENERATION = "Generation"


@dataclass(frozen=True)
class ModelRole:
    role: Role
    endpoint: str = "stub"
    temperature: float | None = None
    samples_per_call: int | None = None
    max_output: int = DEFAULT_MAX_OUTPUT
    stop: tuple[str, ...] = (DELIMITER,)
    context: PromptConfig = field(default_factory=PromptConfig)

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        analysis = self.role is Role.ANALYSIS
        if self.temperature is None:
            object.__setattr__(self, "temperature", 0.0 if analysis else 1.0)
        if self.samples_per_call is None:
            object.__setattr__(self, "samples_per_call", 1 if analysis else 10)
        if self.samples_per_call < 1:
            raise ValueError("samples_per_call must be positive")
        if self.max_output < 1:
            raise ValueError("max_output must be positive")
        object.__setattr__(self, "stop", tuple(self.stop))


def analysis_role(**kw) -> ModelRole:
    return ModelRole(Role.ANALYSIS, **kw)


def generation_role(**kw) -> ModelRole:
    return ModelRole(Role.GENERATION, **kw)


@dataclass(frozen=True)
class CompletionResult:
    texts: list[str]
    backend_meta: str = ""
    latency: float = 0.0
    from_cache: bool = False
    truncated: bool = False


class Backend(Protocol):
    name: str

    def generate(self, prompt: PromptBundle, role: ModelRole, seed: int) -> list[str]: ...


def request_key(backend: str, prompt: PromptBundle, role: ModelRole, seed: int) -> str:
    return f"{backend}:{prompt.hash}:{seed}:{role.samples_per_call}:{role.temperature}"


def _apply_caps(texts: list[str], role: ModelRole) -> tuple[list[str], bool]:
    out, truncated = [], False
    for t in texts:
        for s in role.stop:
            k = t.find(s)
            if k >= 0:
                t = t[:k]
        if len(t) > role.max_output:
            t = t[: role.max_output]
            truncated = True
        out.append(t)
    return out, truncated


class Gateway:
    """Caching front end over one backend.

    Results are cached by ``(backend, prompt hash, seed)``; with ``cache_path``
    the cache is also appended to a JSONL file and reloaded on start, which
    makes interrupted campaigns cheap to resume.
    """

    def __init__(self, backend: Backend, cache_path=None):
        self.backend = backend
        self.cache_path = Path(cache_path) if cache_path is not None else None
        self.cache: dict[str, list[str]] = {}
        self.calls = 0
        self.cache_hits = 0
        self._lock = threading.Lock()
        if self.cache_path is not None and self.cache_path.exists():
            with open(self.cache_path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        rec = json.loads(line)
                        self.cache[rec["key"]] = rec["texts"]

    def complete(self, role: ModelRole, prompt: PromptBundle, seed: int) -> CompletionResult:
        if len(prompt.text) > role.context.budget:
            raise ContextOverflow(f"prompt of {len(prompt.text)} characters exceeds the role budget")
        key = request_key(self.backend.name, prompt, role, seed)
        with self._lock:
            cached = self.cache.get(key)
            if cached is not None:
                self.cache_hits += 1
        if cached is not None:
            texts, truncated = _apply_caps(cached, role)
            return CompletionResult(texts, self.backend.name, 0.0, True, truncated)
        start = time.perf_counter()
        raw = list(self.backend.generate(prompt, role, seed))
        latency = time.perf_counter() - start
        with self._lock:
            self.calls += 1
            self.cache[key] = raw
            if self.cache_path is not None:
                self.cache_path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.cache_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps({"key": key, "texts": raw}) + "\n")
        texts, truncated = _apply_caps(raw, role)
        return CompletionResult(texts, self.backend.name, latency, False, truncated)


# ---------------------------------------------------------------------------
# code extraction
# ---------------------------------------------------------------------------

_FENCED = re.compile(r"^[ \t]*```([\w+.-]*)[ \t]*\n(.*?)(?:^[ \t]*```[ \t]*$|\Z)", re.MULTILINE | re.DOTALL)
_SLOT = re.compile(r"^### [^\n]+\n\Z")


def strip_prompt_echo(completion: str, prompt: str | None) -> str:
    """Drop a verbatim (or slot-terminated) copy of the prompt from the front of a completion."""
    if not prompt:
        return completion
    if completion.startswith(prompt):
        return completion[len(prompt):]
    lines = prompt.rstrip("\n").split("\n")
    slot = lines[-1] if lines and lines[-1].startswith("### ") else None
    if slot is not None and completion.startswith(prompt[: min(len(prompt), 200)]):
        k = completion.rfind("\n" + slot + "\n")
        if k >= 0:
            return completion[k + len(slot) + 2:]
    return completion


def extract_code_blocks(completion: str, expected_kind: str = "", prompt: str | None = None) -> list[str]:
    """Programs inside fenced blocks, or the whole completion when it has no fences.

    ``expected_kind`` narrows the result to blocks tagged with that language
    when any are tagged so; untagged blocks are always accepted.
    """
    text = strip_prompt_echo(completion, prompt)
    blocks = [(m.group(1).lower(), m.group(2)) for m in _FENCED.finditer(text)]
    if not blocks:
        body = text.strip()
        return [body + "\n"] if body else []
    if expected_kind:
        want = expected_kind.lower()
        tagged = [b for tag, b in blocks if tag in ("", want)]
        if tagged:
            blocks = [(want, b) for b in tagged]
    return [b.rstrip() + "\n" for _, b in blocks if b.strip()]
