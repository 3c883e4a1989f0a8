"""MiniLang as a system under test."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

from ..base import (
    DEFAULT_OUTPUT_CAP,
    ExitConvention,
    Mode,
    RunRequest,
    RunResult,
    SutDescriptor,
    classify,
)
from ..sandbox import run_sandboxed
from .driver import EXIT_BUDGET, EXIT_COMPILE_CRASH, EXIT_COMPILE_REJECT, run_program

MINILANG_ROOT = Path(__file__).resolve().parent
MINILANG_KEYWORDS = ("fuse", "fold", "elim", "simplif")
CONVENTION = ExitConvention(
    compile_reject=(EXIT_COMPILE_REJECT,), compile_crash=(EXIT_COMPILE_CRASH,), timeout=(EXIT_BUDGET,)
)

# Documented trigger programs for the planted bugs (see passes.py).
PLANTED_MISCOMPILE_PASS = "mul_add_fuse"
PLANTED_MISCOMPILE_TRIGGER = "let x = 7\nlet y = x * 3 - 1\nprint(y)\n"
PLANTED_CRASH_PASS = "concat_repeat_fuse"
PLANTED_CRASH_TRIGGER = 'let s = "ab"\nprint(s + s + s)\n'


def minilang_descriptor(max_source_lines: int | None = None, keywords=MINILANG_KEYWORDS) -> SutDescriptor:
    return SutDescriptor(
        name="minilang",
        input_kind="MiniLang program",
        input_spec="public MiniLang builtins",
        source_roots=(str(MINILANG_ROOT),),
        opt_keywords=tuple(keywords),
        max_source_lines=max_source_lines,
    )


def list_minilang_optimizations():
    from ...collector import collect

    return collect(minilang_descriptor())


class MiniLangSut:
    """Bundled reference compiler.

    ``isolation="inprocess"`` interprets in the calling process (crashes are
    simulated and reported with the same bytes a real abort would leave);
    ``"subprocess"`` spawns ``python -m optfuzz.sut.minilang`` per run.
    """

    name = "minilang"
    program_suffix = ".ml.txt"

    def __init__(self, planted_bugs: bool = False, isolation: str = "inprocess",
                 output_cap: int = DEFAULT_OUTPUT_CAP):
        if isolation not in ("inprocess", "subprocess"):
            raise ValueError(f"unknown isolation {isolation!r}")
        self.planted_bugs = planted_bugs
        self.isolation = isolation
        self.output_cap = output_cap

    def descriptor(self) -> SutDescriptor:
        return minilang_descriptor()

    def compile_and_run(self, request: RunRequest) -> RunResult:
        if self.isolation == "subprocess":
            return self._run_subprocess(request)
        outcome = run_program(request.code, request.mode.value, self.planted_bugs, request.inputs)
        stdout = outcome.stdout.encode()
        stderr = outcome.stderr.encode()
        truncated = len(stdout) > self.output_cap or len(stderr) > self.output_cap
        returncode = -outcome.signal if outcome.signal is not None else outcome.exit_code
        return classify(
            returncode,
            stdout[: self.output_cap],
            stderr[: self.output_cap],
            truncated=truncated,
            convention=CONVENTION,
        )

    def _run_subprocess(self, request: RunRequest) -> RunResult:
        argv = [sys.executable, "-m", "optfuzz.sut.minilang", "--mode", request.mode.value]
        if self.planted_bugs:
            argv.append("--planted-bugs")
        argv += ["--inputs", json.dumps(request.inputs), "{dir}/program" + self.program_suffix]
        env = dict(os.environ)
        src_root = str(MINILANG_ROOT.parents[2])
        env["PYTHONPATH"] = src_root + os.pathsep + env.get("PYTHONPATH", "")
        outcome = run_sandboxed(
            argv,
            time_limit=request.time_limit,
            memory_limit=request.memory_limit,
            output_cap=self.output_cap,
            files={"program" + self.program_suffix: request.code},
            env=env,
        )
        return classify(
            outcome.returncode,
            outcome.stdout,
            outcome.stderr,
            timed_out=outcome.timed_out,
            truncated=outcome.truncated,
            convention=CONVENTION,
        )


__all__ = [
    "MINILANG_KEYWORDS",
    "MiniLangSut",
    "Mode",
    "PLANTED_CRASH_PASS",
    "PLANTED_CRASH_TRIGGER",
    "PLANTED_MISCOMPILE_PASS",
    "PLANTED_MISCOMPILE_TRIGGER",
    "list_minilang_optimizations",
    "minilang_descriptor",
]
