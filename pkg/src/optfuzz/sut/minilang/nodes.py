"""AST node types for MiniLang.

All nodes are frozen dataclasses so optimization passes can rebuild trees
without worrying about aliasing.  ``MulAdd`` and ``Repeat`` never come out of
the parser; only the optimizer produces them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Num:
    value: int | float


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Compare:
    ops: tuple[str, ...]
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class MulAdd:
    a: "Expr"
    b: "Expr"
    c: "Expr"
    subtract: bool


@dataclass(frozen=True)
class Repeat:
    operand: "Expr"
    count: int


Expr = Union[Num, Str, Var, BinOp, Neg, Compare, Call, MulAdd, Repeat]


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr


@dataclass(frozen=True)
class Print:
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr


Stmt = Union[Let, Print, ExprStmt]


@dataclass(frozen=True)
class Program:
    stmts: tuple[Stmt, ...]


def children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, Compare):
        return node.operands
    if isinstance(node, Call):
        return node.args
    if isinstance(node, MulAdd):
        return (node.a, node.b, node.c)
    if isinstance(node, Repeat):
        return (node.operand,)
    return ()


def walk(node: Expr):
    yield node
    for child in children(node):
        yield from walk(child)
