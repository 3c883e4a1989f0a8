"""Lexer, parser and static checks for MiniLang.

Grammar (statements end at a newline or ``;``)::

    stmt    := "let" NAME "=" expr | "print" "(" args ")" | expr
    expr    := sum (CMP sum)*            # Python-style comparison chains
    sum     := term (("+" | "-") term)*
    term    := unary (("*" | "/" | "%") unary)*
    unary   := "-" unary | primary
    primary := INT | FLOAT | STRING | NAME | NAME "(" args ")" | "(" expr ")"

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    BinOp,
    Call,
    Compare,
    Expr,
    ExprStmt,
    Let,
    Neg,
    Num,
    Print,
    Program,
    Str,
    Var,
    walk,
)

BUILTIN_ARITY = {"len": 1, "str": 1, "repeat": 2, "crash_if_fused": 0}
KEYWORDS = {"let", "print"}
COMPARISON_OPS = ("==", "!=", "<=", ">=", "<", ">")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<sep>[\n;])
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>==|!=|<=|>=|[-+*/%<>=(),])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class CompileError(Exception):
    """The program is rejected by the front end."""


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise CompileError(f"line {line}: unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "sep":
            tokens.append(Token("sep", text, line))
        elif kind not in ("ws", "comment"):
            if kind == "name" and text in KEYWORDS:
                kind = text
            tokens.append(Token(kind, text, line))
        line += text.count("\n")
        pos = m.end()
    tokens.append(Token("eof", "", line))
    return tokens


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise CompileError(f"bad escape \\{nxt}")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise CompileError(f"line {tok.line}: expected {want!r}, found {tok.text or tok.kind!r}")
        return self.advance()

    def at_op(self, *texts: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in texts

    # -- statements --

    def program(self) -> Program:
        stmts = []
        while True:
            while self.tok.kind == "sep":
                self.advance()
            if self.tok.kind == "eof":
                break
            stmts.append(self.statement())
            if self.tok.kind not in ("sep", "eof"):
                raise CompileError(f"line {self.tok.line}: expected end of statement, found {self.tok.text!r}")
        return Program(tuple(stmts))

    def statement(self):
        if self.tok.kind == "let":
            self.advance()
            name = self.expect("name").text
            self.expect("op", "=")
            return Let(name, self.expression())
        if self.tok.kind == "print":
            self.advance()
            self.expect("op", "(")
            args = self.arguments()
            if not args:
                raise CompileError(f"line {self.tok.line}: print needs at least one argument")
            return Print(args)
        return ExprStmt(self.expression())

    def arguments(self) -> tuple[Expr, ...]:
        args = []
        if not self.at_op(")"):
            args.append(self.expression())
            while self.at_op(","):
                self.advance()
                args.append(self.expression())
        self.expect("op", ")")
        return tuple(args)

    # -- expressions --

    def expression(self) -> Expr:
        first = self.additive()
        ops, operands = [], [first]
        while self.at_op(*COMPARISON_OPS):
            ops.append(self.advance().text)
            operands.append(self.additive())
        if not ops:
            return first
        return Compare(tuple(ops), tuple(operands))

    def additive(self) -> Expr:
        node = self.multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Expr:
        node = self.unary()
        while self.at_op("*", "/", "%"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Num(int(tok.text))
        if tok.kind == "float":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "string":
            self.advance()
            return Str(_unescape(tok.text[1:-1]))
        if tok.kind == "name":
            self.advance()
            if self.at_op("("):
                self.advance()
                return Call(tok.text, self.arguments())
            return Var(tok.text)
        if self.at_op("("):
            self.advance()
            node = self.expression()
            self.expect("op", ")")
            return node
        raise CompileError(f"line {tok.line}: unexpected {tok.text or tok.kind!r}")


def parse_expr(source: str) -> Expr:
    parser = Parser(source)
    node = parser.expression()
    if parser.tok.kind not in ("eof", "sep"):
        raise CompileError(f"trailing input {parser.tok.text!r}")
    return node


def check_program(program: Program, predefined: frozenset[str] = frozenset()) -> None:
    """Reject undefined variables, unknown builtins and arity mismatches."""
    defined = set(predefined)

    def check(expr: Expr) -> None:
        for node in walk(expr):
            if isinstance(node, Var) and node.name not in defined:
                raise CompileError(f"undefined variable {node.name!r}")
            if isinstance(node, Call):
                if node.name not in BUILTIN_ARITY:
                    raise CompileError(f"unknown function {node.name!r}")
                if len(node.args) != BUILTIN_ARITY[node.name]:
                    raise CompileError(
                        f"{node.name}() takes {BUILTIN_ARITY[node.name]} argument(s), got {len(node.args)}"
                    )

    for stmt in program.stmts:
        if isinstance(stmt, Let):
            check(stmt.value)
            defined.add(stmt.name)
        elif isinstance(stmt, Print):
            for arg in stmt.args:
                check(arg)
        else:
            check(stmt.expr)


def parse_program(source: str, predefined: frozenset[str] = frozenset()) -> Program:
    if not source.strip():
        raise CompileError("empty program")
    try:
        program = Parser(source).program()
        if not program.stmts:
            raise CompileError("empty program")
        check_program(program, frozenset(predefined))
    except RecursionError:
        raise CompileError("expression nested too deeply") from None
    return program
