"""Remote, recording and replaying completion backends."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from pathlib import Path

from ..errors import BackendUnavailable, ReplayMiss
from ..prompts.engine import PromptBundle
from .core import ModelRole

log = logging.getLogger(__name__)

DEFAULT_INFLIGHT = 4
DEFAULT_RETRIES = 3


class HttpBackend:
    """POST ``{prompt, temperature, n, max_output, stop, seed}`` and read ``{texts: [...]}`` back.

    The HTTP client is built on first use, so configuring this backend never
    touches the network by itself.
    """

    name = "http"

    def __init__(self, url: str, api_key_env: str | None = "OPTFUZZ_API_KEY", timeout: float = 120.0,
                 retries: int = DEFAULT_RETRIES, backoff: float = 1.0, max_inflight: int = DEFAULT_INFLIGHT,
                 client_factory=None, sleep=time.sleep):
        if retries < 1:
            raise ValueError("retries must be >= 1")
        self.url = url
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep
        self._client_factory = client_factory
        self._client = None
        self._client_lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(max_inflight)

    def _get_client(self):
        with self._client_lock:
            if self._client is None:
                if self._client_factory is not None:
                    self._client = self._client_factory()
                else:
                    import httpx

                    headers = {}
                    key = os.environ.get(self.api_key_env) if self.api_key_env else None
                    if key:
                        headers["Authorization"] = f"Bearer {key}"
                    self._client = httpx.Client(timeout=self.timeout, headers=headers)
            return self._client

    def generate(self, prompt: PromptBundle, role: ModelRole, seed: int) -> list[str]:
        payload = {
            "prompt": prompt.text,
            "temperature": role.temperature,
            "n": role.samples_per_call,
            "max_output": role.max_output,
            "stop": list(role.stop),
            "seed": seed,
        }
        client = self._get_client()
        last = None
        for attempt in range(self.retries):
            try:
                with self._slots:
                    resp = client.post(self.url, json=payload)
                resp.raise_for_status()
                texts = resp.json()["texts"]
                if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                    raise ValueError("response field 'texts' must be a list of strings")
                return texts
            except Exception as exc:  # noqa: BLE001 - any transport or decoding failure is retried
                last = exc
                log.warning("completion attempt %d/%d failed: %s", attempt + 1, self.retries, exc)
                if attempt + 1 < self.retries:
                    self.sleep(self.backoff * 2**attempt)
        raise BackendUnavailable(f"{self.url}: {last}")


def record_key(prompt: PromptBundle, role: ModelRole, seed: int) -> str:
    return f"{prompt.hash}:{seed}:{role.samples_per_call}"


class RecordStore:
    """Append-only JSONL file of ``prompt hash -> texts`` records."""

    FILE = "records.jsonl"

    def __init__(self, directory):
        self.directory = Path(directory)
        self.path = self.directory / self.FILE
        self._lock = threading.Lock()
        self.records: dict[str, list[str]] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        rec = json.loads(line)
                        self.records[rec["key"]] = rec["texts"]

    def get(self, key: str) -> list[str] | None:
        return self.records.get(key)

    def put(self, key: str, texts: list[str], prompt: PromptBundle) -> None:
        with self._lock:
            if key in self.records:
                return
            self.records[key] = list(texts)
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"key": key, "target": prompt.target_opt, "family": prompt.family.value,
                                    "texts": texts}) + "\n")


class RecordingBackend:
    """Pass calls through to ``inner`` and append each answer to a record store."""

    def __init__(self, inner, store: RecordStore):
        self.inner = inner
        self.store = store
        self.name = inner.name

    def generate(self, prompt: PromptBundle, role: ModelRole, seed: int) -> list[str]:
        texts = self.inner.generate(prompt, role, seed)
        self.store.put(record_key(prompt, role, seed), texts, prompt)
        return texts


class ReplayBackend:
    """Answer only from a record store; anything unrecorded is a ``ReplayMiss``."""

    def __init__(self, store: RecordStore, name: str = "replay"):
        self.store = store
        self.name = name

    def generate(self, prompt: PromptBundle, role: ModelRole, seed: int) -> list[str]:
        texts = self.store.get(record_key(prompt, role, seed))
        if texts is None:
            raise ReplayMiss(f"no record for {prompt.target_opt} prompt {prompt.hash[:12]} seed {seed}")
        return list(texts)
