"""Compile-and-run one MiniLang program, in-process.

The outcome mirrors what the ``python -m optfuzz.sut.minilang`` subprocess
produces (exit code or signal, stdout, stderr), so the harness can classify
both the same way.
"""

from __future__ import annotations

import signal
from dataclasses import dataclass

from .interp import BudgetExceeded, Interpreter, Limits, MiniLangAbort, MiniLangRuntimeError
from .lang import CompileError, parse_program
from .optimizer import optimize

EXIT_OK = 0
EXIT_COMPILE_REJECT = 2
EXIT_COMPILE_CRASH = 3
EXIT_RUNTIME_ERROR = 4
EXIT_BUDGET = 124

OPTIMIZED = "optimized"
BASELINE = "baseline"


@dataclass(frozen=True)
class DriverOutcome:
    exit_code: int | None
    signal: int | None
    stdout: str
    stderr: str


def value_type(value) -> str:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise TypeError(f"unsupported MiniLang input value {value!r}")
    return {int: "int", float: "float", str: "str"}[type(value)]


def run_program(
    source: str,
    mode: str = BASELINE,
    planted_bugs: bool = False,
    inputs: dict | None = None,
    limits: Limits | None = None,
) -> DriverOutcome:
    if mode not in (OPTIMIZED, BASELINE):
        raise ValueError(f"unknown mode {mode!r}")
    inputs = dict(inputs or {})
    input_types = {name: value_type(v) for name, v in inputs.items()}
    try:
        program = parse_program(source, frozenset(inputs))
    except CompileError as exc:
        return DriverOutcome(EXIT_COMPILE_REJECT, None, "", f"minilang: compile error: {exc}\n")

    stderr = []
    if mode == OPTIMIZED:
        try:
            program, log = optimize(program, planted_bugs=planted_bugs, input_types=input_types)
        except RecursionError:
            return DriverOutcome(EXIT_COMPILE_REJECT, None, "", "minilang: compile error: expression nested too deeply\n")
        except Exception as exc:  # noqa: BLE001 - any optimizer failure is an ICE
            return DriverOutcome(
                EXIT_COMPILE_CRASH, None, "", f"minilang: internal compiler error: {type(exc).__name__}: {exc}\n"
            )
        stderr.extend(line + "\n" for line in log)

    interp = Interpreter(optimized=mode == OPTIMIZED, planted_bugs=planted_bugs, limits=limits or Limits())
    try:
        interp.run(program, inputs)
    except MiniLangRuntimeError as exc:
        stderr.append(f"minilang: runtime error: {exc}\n")
        return DriverOutcome(EXIT_RUNTIME_ERROR, None, "".join(interp.out), "".join(stderr))
    except RecursionError:
        stderr.append("minilang: runtime error: expression nested too deeply\n")
        return DriverOutcome(EXIT_RUNTIME_ERROR, None, "".join(interp.out), "".join(stderr))
    except BudgetExceeded:
        stderr.append("minilang: evaluation budget exhausted\n")
        return DriverOutcome(EXIT_BUDGET, None, "".join(interp.out), "".join(stderr))
    except MiniLangAbort as exc:
        stderr.append(f"minilang: {exc.message}\n  at {exc.frame}\nAborted\n")
        return DriverOutcome(None, int(signal.SIGABRT), "".join(interp.out), "".join(stderr))
    return DriverOutcome(EXIT_OK, None, "".join(interp.out), "".join(stderr))
