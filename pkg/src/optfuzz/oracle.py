"""Differential and crash oracles, plus bug deduplication and storage."""

from __future__ import annotations

import enum
import hashlib
import json
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .sut.base import TRIGGER_PREFIX, CompileStatus, RunResult, RunStatus


class VerdictKind(str, enum.Enum):
    PASS = "Pass"
    RESULT_INCONSISTENCY = "ResultInconsistency"
    COMPILE_CRASH = "CompileCrash"
    RUN_CRASH = "RunCrash"
    TIMEOUT = "Timeout"
    INVALID = "Invalid"


BUG_KINDS = {VerdictKind.RESULT_INCONSISTENCY, VerdictKind.COMPILE_CRASH, VerdictKind.RUN_CRASH, VerdictKind.TIMEOUT}


@dataclass(frozen=True)
class ComparisonPolicy:
    mode: str = "bytes"  # or "numeric"
    rtol: float = 1e-4
    atol: float = 1e-6

    def __post_init__(self):
        if self.mode not in ("bytes", "numeric"):
            raise ValueError(f"unknown comparison mode {self.mode!r}")


BYTES = ComparisonPolicy()
NUMERIC = ComparisonPolicy("numeric")


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    detail: str = ""
    dedup_key: str = ""
    signature: str = ""

    @property
    def is_bug(self) -> bool:
        return self.kind in BUG_KINDS

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "detail": self.detail, "dedup_key": self.dedup_key, "signature": self.signature}


def _parse_numbers(line: bytes):
    try:
        return [float(tok) for tok in line.split()]
    except ValueError:
        return None


def _close(a: float, b: float, policy: ComparisonPolicy) -> bool:
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= policy.atol + policy.rtol * abs(b)


def compare_outputs(a: bytes, b: bytes, policy: ComparisonPolicy = BYTES) -> bool:
    """Equality of two program outputs under ``policy``.

    Numeric mode compares whitespace-separated numbers line by line; a line
    that does not parse as numbers on both sides falls back to exact bytes.
    """
    if policy.mode == "bytes":
        return a == b
    la, lb = a.splitlines(), b.splitlines()
    if len(la) != len(lb):
        return False
    for x, y in zip(la, lb):
        nx, ny = _parse_numbers(x), _parse_numbers(y)
        if nx is None or ny is None:
            if x != y:
                return False
            continue
        if len(nx) != len(ny) or not all(_close(p, q, policy) for p, q in zip(nx, ny)):
            return False
    return True


# ---------------------------------------------------------------------------
# crash signatures
# ---------------------------------------------------------------------------

_FRAME_PATTERNS = [
    re.compile(r"^\s*at (?P<f>[\w:.<>~$]+)", re.M),  # "at eval_repeat"
    re.compile(r"^\s*#0\s+(?:0x[0-9a-fA-F]+\s+in\s+)?(?P<f>[\w:.<>~$]+)", re.M),  # gdb / sanitizer
    re.compile(r"^\s*#\d+\s+(?:0x[0-9a-fA-F]+\s+in\s+)?(?P<f>[\w:.<>~$]+)", re.M),
]
_PY_FRAME = re.compile(r'File "[^"]*", line \d+, in (?P<f>\w+)')
_TOKEN_PATTERNS = [
    re.compile(r"internal (?:assertion|compiler error)[^\n]*", re.I),
    re.compile(r"Assertion [^\n]* failed", re.I),
    re.compile(r"\b[A-Z][A-Z_]*(?:ASSERT|ERROR|FAILED)[A-Z_]*\b"),
    re.compile(r"\b\w*(?:Error|Exception|fault|panicked)\b[^\n]*"),
]
_ADDR = re.compile(r"0x[0-9a-fA-F]+")
_DIGITS = re.compile(r"\d+")
_SPACE = re.compile(r"\s+")


def normalize(text: str) -> str:
    text = _ADDR.sub("ADDR", text)
    text = _DIGITS.sub("N", text)
    return _SPACE.sub(" ", text).strip()


def crash_signature(result: RunResult) -> str:
    """Top frame and exception token of a crash, with addresses and digits stripped."""
    text = "\n".join(
        line for line in result.stderr.decode("utf-8", "replace").splitlines() if not line.startswith(TRIGGER_PREFIX)
    )
    frame = ""
    for pat in _FRAME_PATTERNS:
        m = pat.search(text)
        if m:
            frame = m.group("f")
            break
    if not frame:
        py = _PY_FRAME.findall(text)
        if py:
            frame = py[-1]
    token = ""
    for pat in _TOKEN_PATTERNS:
        m = pat.search(text)
        if m:
            token = m.group(0)
            break
    if not token:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        token = lines[-1] if lines else ""
    if not frame and not token:
        if result.exit_signal is not None:
            token = f"signal {result.exit_signal}"
        else:
            token = f"exit {result.exit_code}"
    return normalize(f"{frame} {token}")


def dedup(verdict: Verdict, trigger_set) -> str:
    """Stable key grouping findings that are probably the same bug."""
    if verdict.kind in (VerdictKind.PASS, VerdictKind.INVALID):
        return ""
    if verdict.kind is VerdictKind.RESULT_INCONSISTENCY or not verdict.signature:
        return f"{verdict.kind.value}|{','.join(sorted(trigger_set))}"
    return f"{verdict.kind.value}|{verdict.signature}"


def _forbidden_hit(result: RunResult, patterns) -> str | None:
    if not patterns:
        return None
    text = result.stderr.decode("utf-8", "replace")
    for p in patterns:
        m = re.search(p, text)
        if m:
            return m.group(0)
    return None


def judge(optimized: RunResult, baseline: RunResult, tolerance: ComparisonPolicy = BYTES,
          forbidden_patterns=()) -> Verdict:
    """Verdict for one program run in both modes.

    A program the baseline cannot compile and run cleanly is Invalid; the
    optimized build is never blamed for it.
    """
    if baseline.compile_status is not CompileStatus.OK or baseline.run_status is not RunStatus.OK:
        why = baseline.compile_status.value if baseline.compile_status is not CompileStatus.OK else baseline.run_status.value
        return Verdict(VerdictKind.INVALID, f"baseline {why}")

    triggers = {line[len(TRIGGER_PREFIX):].strip() for line in optimized.trigger_log}

    def bug(kind, detail, signature=""):
        v = Verdict(kind, detail, signature=signature)
        return Verdict(kind, detail, dedup(v, triggers), signature)

    if optimized.compile_status is CompileStatus.COMPILE_CRASH:
        return bug(VerdictKind.COMPILE_CRASH, "optimized compilation crashed", crash_signature(optimized))
    if optimized.compile_status is CompileStatus.COMPILE_REJECT:
        return bug(VerdictKind.COMPILE_CRASH, "optimized build rejected a program the baseline accepted",
                   "reject " + crash_signature(optimized))
    if optimized.run_status is RunStatus.RUN_CRASH:
        return bug(VerdictKind.RUN_CRASH, "optimized program crashed", crash_signature(optimized))
    if optimized.run_status is RunStatus.TIMEOUT:
        return bug(VerdictKind.TIMEOUT, "optimized program timed out")
    hit = _forbidden_hit(optimized, forbidden_patterns)
    if hit is not None:
        return bug(VerdictKind.RUN_CRASH, f"forbidden internal error: {hit}", normalize(hit))
    if not compare_outputs(optimized.stdout, baseline.stdout, tolerance):
        return bug(VerdictKind.RESULT_INCONSISTENCY, "optimized and baseline outputs differ")
    return Verdict(VerdictKind.PASS)


# ---------------------------------------------------------------------------
# bug storage
# ---------------------------------------------------------------------------


@dataclass
class BugReport:
    dedup_key: str
    kind: VerdictKind
    detail: str
    first_test_id: str
    opt_context: set = field(default_factory=set)
    occurrences: int = 1
    reproducer: str = ""

    def to_dict(self) -> dict:
        return {
            "dedup_key": self.dedup_key,
            "kind": self.kind.value,
            "detail": self.detail,
            "first_test_id": self.first_test_id,
            "opt_context": sorted(self.opt_context),
            "occurrences": self.occurrences,
            "reproducer": self.reproducer,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BugReport":
        return cls(d["dedup_key"], VerdictKind(d["kind"]), d["detail"], d["first_test_id"],
                   set(d["opt_context"]), d["occurrences"], d["reproducer"])


def key_digest(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()[:16]


class BugStore:
    """Deduplicated bug reports, optionally mirrored to ``<root>/<digest>/``."""

    def __init__(self, root=None, program_suffix: str = ".txt", file_timeouts: bool = False):
        self.root = Path(root) if root is not None else None
        self.program_suffix = program_suffix
        self.file_timeouts = file_timeouts
        self.reports: dict[str, BugReport] = {}
        self._lock = threading.Lock()

    def files(self, verdict: Verdict) -> bool:
        if not verdict.is_bug:
            return False
        return verdict.kind is not VerdictKind.TIMEOUT or self.file_timeouts

    def record(self, verdict: Verdict, test_id: str, program: str, trigger_set,
               optimized: RunResult | None = None, baseline: RunResult | None = None) -> BugReport | None:
        if not self.files(verdict):
            return None
        with self._lock:
            rep = self.reports.get(verdict.dedup_key)
            if rep is None:
                rep = BugReport(verdict.dedup_key, verdict.kind, verdict.detail, test_id, set(trigger_set), 1, program)
                self.reports[verdict.dedup_key] = rep
                self._write_new(rep, verdict, optimized, baseline)
            else:
                rep.occurrences += 1
                rep.opt_context |= set(trigger_set)
            self._write_report(rep)
            return rep

    def _dir(self, rep: BugReport) -> Path | None:
        if self.root is None:
            return None
        d = self.root / key_digest(rep.dedup_key)
        d.mkdir(parents=True, exist_ok=True)
        return d

    def _write_new(self, rep, verdict, optimized, baseline):
        d = self._dir(rep)
        if d is None:
            return
        (d / ("reproducer" + self.program_suffix)).write_text(rep.reproducer, encoding="utf-8")
        (d / "verdict.json").write_text(json.dumps(verdict.to_dict(), indent=2, sort_keys=True) + "\n")
        for name, res in (("optimized", optimized), ("baseline", baseline)):
            if res is not None:
                (d / f"{name}.json").write_text(json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n")

    def _write_report(self, rep):
        d = self._dir(rep)
        if d is not None:
            (d / "report.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")

    def summary(self) -> list[dict]:
        return [self.reports[k].to_dict() for k in sorted(self.reports)]

    def state(self) -> list[dict]:
        return self.summary()

    def load_state(self, rows: list[dict]) -> None:
        self.reports = {r["dedup_key"]: BugReport.from_dict(r) for r in rows}
