"""The contract every compiler under test satisfies."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Protocol

TRIGGER_PREFIX = "WFOPT "
DEFAULT_TIME_LIMIT = 10.0
DEFAULT_MEMORY_LIMIT = 1 << 30
DEFAULT_OUTPUT_CAP = 1 << 20
GRACE_PERIOD = 1.0


class Mode(str, enum.Enum):
    OPTIMIZED = "optimized"
    BASELINE = "baseline"


class CompileStatus(str, enum.Enum):
    OK = "Ok"
    COMPILE_CRASH = "CompileCrash"
    COMPILE_REJECT = "CompileReject"


class RunStatus(str, enum.Enum):
    OK = "Ok"
    RUN_CRASH = "RunCrash"
    TIMEOUT = "Timeout"
    NOT_RUN = "NotRun"


@dataclass(frozen=True)
class SutDescriptor:
    name: str
    input_kind: str
    input_spec: str
    source_roots: tuple[str, ...]
    opt_keywords: tuple[str, ...]
    max_source_lines: int | None = None
    keyword_regex: bool = False

    def __post_init__(self):
        object.__setattr__(self, "source_roots", tuple(str(p) for p in self.source_roots))
        object.__setattr__(self, "opt_keywords", tuple(self.opt_keywords))
        if not self.source_roots:
            raise ValueError("SutDescriptor.source_roots must be non-empty")
        if not self.opt_keywords:
            raise ValueError("SutDescriptor.opt_keywords must be non-empty")
        if self.max_source_lines is not None and self.max_source_lines < 1:
            raise ValueError("max_source_lines must be positive")


@dataclass(frozen=True)
class RunRequest:
    program: object  # a TestProgram (anything with ``.code``) or the program text itself
    mode: Mode
    time_limit: float = DEFAULT_TIME_LIMIT
    memory_limit: int = DEFAULT_MEMORY_LIMIT
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")

    @property
    def code(self) -> str:
        return getattr(self.program, "code", self.program)


@dataclass(frozen=True)
class RunResult:
    compile_status: CompileStatus
    run_status: RunStatus
    stdout: bytes = b""
    stderr: bytes = b""
    trigger_log: tuple[str, ...] = ()
    exit_signal: int | None = None
    exit_code: int | None = None
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "compile_status": self.compile_status.value,
            "run_status": self.run_status.value,
            "stdout": self.stdout.decode("utf-8", "replace"),
            "stderr": self.stderr.decode("utf-8", "replace"),
            "trigger_log": list(self.trigger_log),
            "exit_signal": self.exit_signal,
            "exit_code": self.exit_code,
            "truncated": self.truncated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        return cls(
            CompileStatus(d["compile_status"]),
            RunStatus(d["run_status"]),
            d["stdout"].encode(),
            d["stderr"].encode(),
            tuple(d["trigger_log"]),
            d.get("exit_signal"),
            d.get("exit_code"),
            d.get("truncated", False),
        )


class Sut(Protocol):
    name: str
    program_suffix: str

    def descriptor(self) -> SutDescriptor: ...

    def compile_and_run(self, request: RunRequest) -> RunResult: ...


@dataclass(frozen=True)
class ExitConvention:
    """How to read a compile-and-run command's exit status."""

    compile_reject: tuple[int, ...] = (2,)
    compile_crash: tuple[int, ...] = (3,)
    timeout: tuple[int, ...] = (124,)
    run_phase_marker: str | None = None


def trigger_lines(stderr: bytes) -> tuple[str, ...]:
    text = stderr.decode("utf-8", "replace")
    return tuple(line.rstrip("\r") for line in text.split("\n") if line.startswith(TRIGGER_PREFIX))


def classify(
    returncode: int | None,
    stdout: bytes,
    stderr: bytes,
    *,
    timed_out: bool = False,
    truncated: bool = False,
    convention: ExitConvention = ExitConvention(),
) -> RunResult:
    """Map a raw process outcome onto ``RunResult``.

    A negative ``returncode`` means death by signal.
    """
    triggers = trigger_lines(stderr)
    common = dict(stdout=stdout, stderr=stderr, truncated=truncated)
    if timed_out:
        return RunResult(CompileStatus.OK, RunStatus.TIMEOUT, trigger_log=triggers, **common)
    if returncode is not None and returncode < 0:
        sig = -returncode
        marker = convention.run_phase_marker
        if marker is not None and not re.search(re.escape(marker), stderr.decode("utf-8", "replace")):
            return RunResult(
                CompileStatus.COMPILE_CRASH, RunStatus.NOT_RUN, trigger_log=triggers, exit_signal=sig, **common
            )
        return RunResult(CompileStatus.OK, RunStatus.RUN_CRASH, trigger_log=triggers, exit_signal=sig, **common)
    if returncode in convention.compile_reject:
        return RunResult(CompileStatus.COMPILE_REJECT, RunStatus.NOT_RUN, exit_code=returncode, **common)
    if returncode in convention.compile_crash:
        return RunResult(
            CompileStatus.COMPILE_CRASH, RunStatus.NOT_RUN, trigger_log=triggers, exit_code=returncode, **common
        )
    if returncode in convention.timeout:
        return RunResult(CompileStatus.OK, RunStatus.TIMEOUT, trigger_log=triggers, exit_code=returncode, **common)
    if returncode != 0:
        return RunResult(CompileStatus.OK, RunStatus.RUN_CRASH, trigger_log=triggers, exit_code=returncode, **common)
    return RunResult(CompileStatus.OK, RunStatus.OK, trigger_log=triggers, exit_code=0, **common)
