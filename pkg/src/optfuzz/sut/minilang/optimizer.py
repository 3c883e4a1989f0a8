"""Pass manager: bottom-up rewriting to a fixpoint, then program-level passes."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import passes
from .nodes import BinOp, Call, Compare, ExprStmt, Let, MulAdd, Neg, Print, Program, Repeat

TRIGGER_PREFIX = "WFOPT "
MAX_REWRITES_PER_NODE = 32


@dataclass
class PassContext:
    planted_bugs: bool = False
    input_types: dict = field(default_factory=dict)
    env: dict = field(default_factory=dict)
    log: list = field(default_factory=list)

    def fire(self, name: str) -> None:
        self.log.append(TRIGGER_PREFIX + name)


def _rebuild(node, rewrite):
    if isinstance(node, BinOp):
        return BinOp(node.op, rewrite(node.left), rewrite(node.right))
    if isinstance(node, Neg):
        return Neg(rewrite(node.operand))
    if isinstance(node, Compare):
        return Compare(node.ops, tuple(rewrite(o) for o in node.operands))
    if isinstance(node, Call):
        return Call(node.name, tuple(rewrite(a) for a in node.args))
    if isinstance(node, MulAdd):
        return MulAdd(rewrite(node.a), rewrite(node.b), rewrite(node.c), node.subtract)
    if isinstance(node, Repeat):
        return Repeat(rewrite(node.operand), node.count)
    return node


def rewrite_expr(node, ctx: PassContext):
    node = _rebuild(node, lambda child: rewrite_expr(child, ctx))
    for _ in range(MAX_REWRITES_PER_NODE):
        for run_pass in passes.EXPR_PASSES:
            replacement = run_pass(node, ctx)
            if replacement is not None:
                node = replacement
                break
        else:
            return node
    return node


def optimize(program: Program, planted_bugs: bool = False, input_types: dict | None = None):
    """Return ``(optimized program, trigger lines)``."""
    ctx = PassContext(planted_bugs=planted_bugs, input_types=dict(input_types or {}))
    ctx.env = dict(ctx.input_types)
    stmts = []
    for stmt in program.stmts:
        if isinstance(stmt, Let):
            value = rewrite_expr(stmt.value, ctx)
            stmts.append(Let(stmt.name, value))
            ctx.env[stmt.name] = passes.static_type(value, ctx.env)
        elif isinstance(stmt, Print):
            stmts.append(Print(tuple(rewrite_expr(a, ctx) for a in stmt.args)))
        else:
            stmts.append(ExprStmt(rewrite_expr(stmt.expr, ctx)))
    program = Program(tuple(stmts))
    for run_pass in passes.PROGRAM_PASSES:
        program = run_pass(program, ctx) or program
    return program, list(ctx.log)
