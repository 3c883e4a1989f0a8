"""Program templates the stub model draws from when asked for MiniLang tests.

Every pass has ``VARIANTS`` template families; a program from family ``k`` of
pass ``p`` always triggers ``p``.  Most families trigger nothing else; some
comparison families also leave a binding unread once folded, so
``dead_store_elim`` fires incidentally.  Fillers trigger nothing.  Each
generated program starts with a ``# variant: k`` comment so the stub can tell
which family a feedback example came from.
"""

from __future__ import annotations

import random

VARIANTS = 6
NAMES = ("a", "b", "n", "x", "y", "z", "k", "m", "v", "acc", "lhs", "rhs", "total", "tmp", "w")
WORDS = ("ab", "xyz", "hi", "qq", "foo", "lo", "mini", "cd")


class _Pick:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self._names = list(NAMES)
        rng.shuffle(self._names)

    def var(self) -> str:
        return self._names.pop()

    def int(self, lo: int = 2, hi: int = 99) -> int:
        return self.rng.randint(lo, hi)

    def float(self) -> str:
        return f"{self.rng.randint(1, 40)}.{self.rng.choice((25, 5, 75, 125))}"

    def word(self) -> str:
        return self.rng.choice(WORDS)


def _lines(*rows: str) -> str:
    return "\n".join(rows) + "\n"


def _const_fold(k: int, p: _Pick) -> str:
    x = p.var()
    a, b, c = p.int(), p.int(), p.int()
    return [
        lambda: _lines(f"print({a} + {b})"),
        lambda: _lines(f"let {x} = {a} * {b}", f"print({x})"),
        lambda: _lines(f"let {x} = {c}", f"print({x}, {a} - {b})"),
        lambda: _lines(f"let {x} = ({a} + {b}) * {c}", f"print({x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} * -{b})"),
        lambda: _lines(f"print({p.float()} * {b})"),
    ][k]()


def _neg_neg(k: int, p: _Pick) -> str:
    x, y = p.var(), p.var()
    a, b = p.int(), p.int()
    return [
        lambda: _lines(f"let {x} = {a}", f"print(-(-{x}))"),
        lambda: _lines(f"let {x} = {a}", f"print(- -{x})"),
        lambda: _lines(f"let {x} = {p.float()}", f"let {y} = -(-{x})", f"print({y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print(-(-{x}) * {y})"),
        lambda: _lines(f"let {x} = {a}", f"print({x}, -(-({x})))"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = -(-({x} * {b}))", f"print({y})"),
    ][k]()


def _add_zero(k: int, p: _Pick) -> str:
    x, y = p.var(), p.var()
    a, b = p.int(), p.int()
    return [
        lambda: _lines(f"let {x} = {a}", f"print({x} + 0)"),
        lambda: _lines(f"let {x} = {a}", f"print(0 + {x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} - 0)"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = ({x} + 0) * {b}", f"print({y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} + 0, {y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {x}", f"print({y} - 0 + {x})"),
    ][k]()


def _mul_one(k: int, p: _Pick) -> str:
    x, y = p.var(), p.var()
    a = p.int()
    return [
        lambda: _lines(f"let {x} = {a}", f"print({x} * 1)"),
        lambda: _lines(f"let {x} = {a}", f"print(1 * {x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} / 1)"),
        lambda: _lines(f"let {x} = {p.float()}", f"print({x} * 1)"),
        lambda: _lines(f"let {x} = {a}", f"print(str({x} * 1))"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {x}", f"print({y} / 1, {x})"),
    ][k]()


def _cmp_chain(k: int, p: _Pick) -> str:
    x, y = p.var(), p.var()
    a, b = p.int(), p.int()
    return [
        lambda: _lines(f"let {x} = {a}", f"print({x} <= {x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} == {x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} < {x})"),
        lambda: _lines(f"let {x} = {a}", f"print({x} == {x} < {b})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({y} >= {y}, {x})"),
        lambda: _lines(f"print({a} <= {a})"),
    ][k]()


def _concat_repeat(k: int, p: _Pick) -> str:
    s, t = p.var(), p.var()
    w = p.word()
    return [
        lambda: _lines(f'let {s} = "{w}"', f"print({s} + {s})"),
        lambda: _lines(f'let {s} = "{w}"', f"print({s} + {s} + {s})"),
        lambda: _lines(f'let {s} = "{w}"', f"let {t} = {s} + {s}", f"print({t}, len({t}))"),
        lambda: _lines(f'print("{w}" + "{w}")'),
        lambda: _lines(f'let {s} = "{w}"', f"print({s} + {s} + {s} + {s})"),
        lambda: _lines(f'let {s} = "{w}"', f"print(len({s} + {s}))"),
    ][k]()


def _mul_add(k: int, p: _Pick) -> str:
    x, y, z = p.var(), p.var(), p.var()
    a, b, c = p.int(), p.int(), p.int()
    return [
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} * {y} + {c})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({c} + {x} * {y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} * {y} - {c})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {c}", f"let {z} = {x} * {b} + {y}", f"print({z})"),
        lambda: _lines(f"let {x} = {p.float()}", f"let {y} = {c}", f"print({x} * {b} + {y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"let {z} = {c}", f"print({x} * {y} - {z})"),
    ][k]()


def _dead_store(k: int, p: _Pick) -> str:
    x, y, u = p.var(), p.var(), p.var()
    a, b = p.int(), p.int()
    return [
        lambda: _lines(f"let {u} = {a}", f"let {x} = {b}", f"print({x})"),
        lambda: _lines(f"let {x} = {a}", f"let {x} = {b}", f"print({x})"),
        lambda: _lines(f'let {u} = "{p.word()}"', f"let {x} = {a}", f"print({x})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {x}", f"print({x})"),
        lambda: _lines(f"let {x} = {a}", f"let {u} = {x} < {b}", f"print({x})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"let {x} = {y}", f"print({x})"),
    ][k]()


TEMPLATES = {
    "const_fold": _const_fold,
    "neg_neg_elim": _neg_neg,
    "add_zero_elim": _add_zero,
    "mul_one_elim": _mul_one,
    "cmp_chain_simplify": _cmp_chain,
    "concat_repeat_fuse": _concat_repeat,
    "mul_add_fuse": _mul_add,
    "dead_store_elim": _dead_store,
}

# Families whose programs expose the planted bugs.
MISCOMPILE_VARIANTS = {"mul_add_fuse": (2, 5)}
CRASH_VARIANTS = {"concat_repeat_fuse": (1, 4)}


def filler(rng: random.Random) -> str:
    """A valid program that triggers no pass."""
    p = _Pick(rng)
    x, y, s, t = p.var(), p.var(), p.var(), p.var()
    a, b = p.int(), p.int()
    w1, w2 = p.word(), p.word() + "z"
    return rng.choice([
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} * {y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} + {y})"),
        lambda: _lines(f"let {x} = {a}", f"let {y} = {b}", f"print({x} < {y}, {y} - {x})"),
        lambda: _lines(f'let {s} = "{w1}"', f"print({s}, len({s}))"),
        lambda: _lines(f'let {s} = "{w1}"', f'let {t} = "{w2}"', f"print({s} + {t})"),
        lambda: _lines(f'let {s} = "{w1}"', f"print(repeat({s}, {a % 5 + 1}))"),
        lambda: _lines(f"let {x} = {a}", f'print(str({x}) + "{w1}")'),
    ])()


def invalid(rng: random.Random) -> str:
    """A program the front end rejects."""
    p = _Pick(rng)
    x, y = p.var(), p.var()
    return rng.choice([
        lambda: _lines(f"print({x})"),
        lambda: _lines(f"let {x} = ", f"print({x})"),
        lambda: _lines(f"let {x} = {p.int()}", f"print({x} +* {y})"),
    ])()


def program(opt_name: str, variant: int, rng: random.Random) -> str:
    body = TEMPLATES[opt_name](variant, _Pick(rng))
    return f"# variant: {variant}\n{body}"
