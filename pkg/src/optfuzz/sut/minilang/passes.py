"""MiniLang optimization passes.

Every pass logs ``WFOPT <name>`` through ``ctx.fire`` at the point where it
rewrites the program, which is what the trigger monitor keys on.  Expression
passes take one node and return a replacement (or ``None`` when they do not
apply); program passes take and return the whole ``Program``.

Two passes carry planted bugs that are active only when the SUT runs with
``planted_bugs=True``:

* ``mul_add_fuse`` forgets the subtraction when fusing ``a * b - c``, so
  ``let x = 7; print(x * 3 - 1)`` prints ``22`` instead of ``20``
  (result inconsistency).
* ``concat_repeat_fuse`` produces a negative repeat count once a chain has
  three or more copies, and the runtime aborts on it:
  ``let s = "ab"; print(s + s + s)`` dies with SIGABRT (crash).
"""

from __future__ import annotations

from .interp import MiniLangRuntimeError, arith
from .nodes import BinOp, Call, Compare, Let, MulAdd, Neg, Num, Print, Program, Repeat, Str, Var, walk

NUMERIC = ("int", "float")

# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def is_const(node, value=None) -> bool:
    """True for an integer literal, optionally equal to ``value``."""
    if not isinstance(node, Num) or not isinstance(node.value, int):
        return False
    return value is None or node.value == value


# result types of builtins; the probe builtin returns 0 when it does not abort
BUILTIN_TYPES = {"len": "int", "str": "str", "repeat": "str", "crash_if_fused": "int"}


def static_type(node, env):
    if isinstance(node, Num):
        return "int" if isinstance(node.value, int) else "float"
    if isinstance(node, Str):
        return "str"
    if isinstance(node, Var):
        return env.get(node.name)
    if isinstance(node, Neg):
        t = static_type(node.operand, env)
        return t if t in NUMERIC else None
    if isinstance(node, BinOp):
        lt, rt = static_type(node.left, env), static_type(node.right, env)
        if node.op == "+" and lt == rt == "str":
            return "str"
        if lt in NUMERIC and rt in NUMERIC:
            return "int" if lt == rt == "int" else "float"
        return None
    if isinstance(node, MulAdd):
        types = {static_type(n, env) for n in (node.a, node.b, node.c)}
        if types <= {"int"}:
            return "int"
        return "float" if types <= set(NUMERIC) else None
    if isinstance(node, Compare):
        types = {static_type(n, env) for n in node.operands}
        if None in types or ("str" in types and len(types) > 1):
            return None
        return "int"
    if isinstance(node, Repeat):
        return "str" if static_type(node.operand, env) == "str" else None
    if isinstance(node, Call):
        return BUILTIN_TYPES.get(node.name)
    return None


def same_expr(a, b) -> bool:
    return type(a) is type(b) and repr(a) == repr(b)


def is_pure(node, env) -> bool:
    """Evaluation can neither fail nor have side effects."""
    for sub in walk(node):
        if isinstance(sub, Call):
            return False
        if isinstance(sub, BinOp) and sub.op in ("/", "%"):
            return False
    return static_type(node, env) is not None


def names_read(node) -> set[str]:
    return {sub.name for sub in walk(node) if isinstance(sub, Var)}


# ---------------------------------------------------------------------------
# expression passes
# ---------------------------------------------------------------------------


def const_fold(node, ctx):
    """Evaluate arithmetic whose operands are all numeric literals."""
    if isinstance(node, Neg) and isinstance(node.operand, Num):
        ctx.fire("const_fold")
        return Num(-node.operand.value)
    if isinstance(node, BinOp) and isinstance(node.left, Num) and isinstance(node.right, Num):
        try:
            value = arith(node.op, node.left.value, node.right.value)
        except MiniLangRuntimeError:
            return None
        ctx.fire("const_fold")
        return Num(value)
    return None


def neg_neg_elim(node, ctx):
    match node:
        case Neg(operand=Neg(operand=inner)) if static_type(inner, ctx.env) in NUMERIC:
            ctx.fire("neg_neg_elim")
            return inner
    return None


def add_zero_elim(node, ctx):
    # float x + 0 is not an identity for x == -0.0
    if not isinstance(node, BinOp) or node.op not in ("+", "-"):
        return None
    if is_const(node.right, 0) and static_type(node.left, ctx.env) == "int":
        ctx.fire("add_zero_elim")
        return node.left
    if node.op == "+" and is_const(node.left, 0) and static_type(node.right, ctx.env) == "int":
        ctx.fire("add_zero_elim")
        return node.right
    return None


def mul_one_elim(node, ctx):
    if not isinstance(node, BinOp) or node.op not in ("*", "/"):
        return None
    if is_const(node.right, 1) and static_type(node.left, ctx.env) in NUMERIC:
        ctx.fire("mul_one_elim")
        return node.left
    if node.op == "*" and is_const(node.left, 1) and static_type(node.right, ctx.env) in NUMERIC:
        ctx.fire("mul_one_elim")
        return node.right
    return None


def cmp_chain_simplify(node, ctx):
    """Drop reflexive links from comparison chains over integer operands."""
    match node:
        case Compare(ops=ops, operands=operands):
            pass
        case _:
            return None
    if static_type(node, ctx.env) != "int" or not all(is_pure(o, ctx.env) for o in operands):
        return None
    ops, operands = list(ops), list(operands)
    changed = False
    i = 0
    while i < len(ops):
        left, right = operands[i], operands[i + 1]
        if (
            isinstance(left, (Var, Num))
            and same_expr(left, right)
            and static_type(left, ctx.env) == "int"
        ):
            if ops[i] in ("<", ">", "!="):
                ctx.fire("cmp_chain_simplify")
                return Num(0)
            del ops[i]
            del operands[i + 1]
            changed = True
            continue
        i += 1
    if not changed:
        return None
    ctx.fire("cmp_chain_simplify")
    if not ops:
        return Num(1)
    return Compare(tuple(ops), tuple(operands))


def concat_repeat_fuse(node, ctx):
    """Rewrite ``s + s + ... + s`` into a single repeat."""
    match node:
        case BinOp(op="+", left=Repeat(operand=x, count=n), right=y) if same_expr(x, y):
            count = abs(n) + 1
        case BinOp(op="+", left=x, right=y) if (
            isinstance(x, (Var, Str)) and same_expr(x, y) and static_type(x, ctx.env) == "str"
        ):
            count = 2
        case _:
            return None
    if ctx.planted_bugs and count >= 3:
        count = -count  # planted crash
    ctx.fire("concat_repeat_fuse")
    return Repeat(x, count)


def mul_add_fuse(node, ctx):
    """Fuse ``a * b + c`` / ``c + a * b`` / ``a * b - c`` over numbers."""
    match node:
        case BinOp(op="+", left=BinOp(op="*", left=a, right=b), right=c):
            subtract = False
        case BinOp(op="+", left=c, right=BinOp(op="*", left=a, right=b)):
            subtract = False
        case BinOp(op="-", left=BinOp(op="*", left=a, right=b), right=c):
            subtract = True
        case _:
            return None
    if any(static_type(n, ctx.env) not in NUMERIC for n in (a, b, c)):
        return None
    if ctx.planted_bugs:
        subtract = False  # planted miscompile
    ctx.fire("mul_add_fuse")
    return MulAdd(a, b, c, subtract)


# ---------------------------------------------------------------------------
# program passes
# ---------------------------------------------------------------------------


def dead_store_elim(program, ctx):
    """Remove ``let`` bindings that are overwritten or never read."""
    envs = []
    env = dict(ctx.input_types)
    for stmt in program.stmts:
        envs.append(dict(env))
        if isinstance(stmt, Let):
            env[stmt.name] = static_type(stmt.value, env)
    live: set[str] = set()
    kept = []
    for stmt, env in zip(reversed(program.stmts), reversed(envs)):
        if isinstance(stmt, Let):
            if stmt.name not in live and is_pure(stmt.value, env):
                ctx.fire("dead_store_elim")
                continue
            live.discard(stmt.name)
            live |= names_read(stmt.value)
        elif isinstance(stmt, Print):
            for arg in stmt.args:
                live |= names_read(arg)
        else:
            live |= names_read(stmt.expr)
        kept.append(stmt)
    if len(kept) == len(program.stmts):
        return None
    return Program(tuple(reversed(kept)))


EXPR_PASSES = [
    const_fold,
    neg_neg_elim,
    add_zero_elim,
    mul_one_elim,
    cmp_chain_simplify,
    concat_repeat_fuse,
    mul_add_fuse,
]
PROGRAM_PASSES = [dead_store_elim]
