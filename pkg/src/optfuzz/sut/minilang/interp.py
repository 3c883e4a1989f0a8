"""Reference interpreter for MiniLang.

Integers are unbounded, floats follow IEEE-754 (division by zero yields
``Inf``/``NaN`` instead of raising), strings are immutable.  Integer ``/``
is floor division.  Comparisons evaluate to ``1`` or ``0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .nodes import (
    BinOp,
    Call,
    Compare,
    Expr,
    ExprStmt,
    Let,
    MulAdd,
    Neg,
    Num,
    Print,
    Program,
    Repeat,
    Str,
    Var,
)

Value = int | float | str


class MiniLangRuntimeError(Exception):
    """A well-defined runtime error of the program (type error, int division by zero...)."""


class MiniLangAbort(Exception):
    """An internal assertion of the runtime fired; the process must abort."""

    def __init__(self, message: str, frame: str):
        super().__init__(message)
        self.message = message
        self.frame = frame


class BudgetExceeded(Exception):
    """The evaluation step budget ran out (reported as a timeout)."""


@dataclass
class Limits:
    max_steps: int = 1_000_000
    max_string: int = 1 << 20


def is_number(v: Value) -> bool:
    return isinstance(v, (int, float))


def format_value(v: Value) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Inf" if v > 0 else "-Inf"
        return repr(v)
    return str(v)


def _float_div(a: float, b: float) -> float:
    if b == 0:
        if a == 0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def arith(op: str, a: Value, b: Value) -> Value:
    """Apply a binary arithmetic operator with MiniLang semantics."""
    if op == "+" and isinstance(a, str) and isinstance(b, str):
        return a + b
    if not (is_number(a) and is_number(b)):
        raise MiniLangRuntimeError(
            f"unsupported operand types for {op}: {type(a).__name__} and {type(b).__name__}"
        )
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if isinstance(a, int) and isinstance(b, int):
            if b == 0:
                raise MiniLangRuntimeError("integer division by zero")
            return a // b
        return _float_div(float(a), float(b))
    if op == "%":
        if isinstance(a, int) and isinstance(b, int):
            if b == 0:
                raise MiniLangRuntimeError("integer modulo by zero")
            return a % b
        if b == 0:
            return math.nan
        return math.fmod(a, b)
    raise MiniLangRuntimeError(f"unknown operator {op}")


def compare(op: str, a: Value, b: Value) -> bool:
    if isinstance(a, str) != isinstance(b, str):
        if op == "==":
            return False
        if op == "!=":
            return True
        raise MiniLangRuntimeError(f"cannot order {type(a).__name__} and {type(b).__name__}")
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


@dataclass
class Interpreter:
    optimized: bool = False
    planted_bugs: bool = False
    limits: Limits = field(default_factory=Limits)
    out: list[str] = field(default_factory=list)
    steps: int = 0

    def run(self, program: Program, env: dict[str, Value] | None = None) -> str:
        env = dict(env or {})
        for stmt in program.stmts:
            if isinstance(stmt, Let):
                env[stmt.name] = self.eval(stmt.value, env)
            elif isinstance(stmt, Print):
                values = [format_value(self.eval(a, env)) for a in stmt.args]
                self.out.append(" ".join(values) + "\n")
            elif isinstance(stmt, ExprStmt):
                self.eval(stmt.expr, env)
        return "".join(self.out)

    def check_size(self, s: str) -> str:
        if len(s) > self.limits.max_string:
            raise MiniLangRuntimeError("string exceeds memory limit")
        return s

    def eval(self, node: Expr, env: dict[str, Value]) -> Value:
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise BudgetExceeded()
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Str):
            return node.value
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Neg):
            v = self.eval(node.operand, env)
            if not is_number(v):
                raise MiniLangRuntimeError("bad operand type for unary -: str")
            return -v
        if isinstance(node, BinOp):
            a = self.eval(node.left, env)
            b = self.eval(node.right, env)
            result = arith(node.op, a, b)
            return self.check_size(result) if isinstance(result, str) else result
        if isinstance(node, Compare):
            left = self.eval(node.operands[0], env)
            for op, operand in zip(node.ops, node.operands[1:]):
                right = self.eval(operand, env)
                if not compare(op, left, right):
                    return 0
                left = right
            return 1
        if isinstance(node, Call):
            return self.call(node, env)
        if isinstance(node, MulAdd):
            product = arith("*", self.eval(node.a, env), self.eval(node.b, env))
            return arith("-" if node.subtract else "+", product, self.eval(node.c, env))
        if isinstance(node, Repeat):
            return self.eval_repeat(self.eval(node.operand, env), node.count)
        raise MiniLangRuntimeError(f"cannot evaluate {type(node).__name__}")

    def eval_repeat(self, value: Value, count: int) -> str:
        if count < 0:
            raise MiniLangAbort("internal assertion failed: repeat count must be non-negative", "eval_repeat")
        if not isinstance(value, str):
            raise MiniLangRuntimeError("repeat() expects a string")
        if len(value) * count > self.limits.max_string:
            raise MiniLangRuntimeError("string exceeds memory limit")
        return value * count

    def call(self, node: Call, env: dict[str, Value]) -> Value:
        args = [self.eval(a, env) for a in node.args]
        return BUILTINS[node.name](self, args)


def _builtin_len(interp: Interpreter, args: list[Value]) -> Value:
    if not isinstance(args[0], str):
        raise MiniLangRuntimeError("len() expects a string")
    return len(args[0])


def _builtin_str(interp: Interpreter, args: list[Value]) -> Value:
    return format_value(args[0])


def _builtin_repeat(interp: Interpreter, args: list[Value]) -> Value:
    value, count = args
    if not isinstance(count, int) or count < 0:
        raise MiniLangRuntimeError("repeat() count must be a non-negative int")
    return interp.eval_repeat(value, count)


def _probe_repeat_site(interp: Interpreter, args: list[Value]) -> Value:
    # Drives the repeat runtime with the count the buggy concat rewrite produces.
    if interp.optimized and interp.planted_bugs:
        return interp.eval_repeat("", -1)
    return 0


BUILTINS = {
    "len": _builtin_len,
    "str": _builtin_str,
    "repeat": _builtin_repeat,
    "crash_if_fused": _probe_repeat_site,
}
