"""MiniLang: a tiny instrumented expression-language compiler used as the reference SUT."""

from .sut import (
    MINILANG_KEYWORDS,
    PLANTED_CRASH_PASS,
    PLANTED_CRASH_TRIGGER,
    PLANTED_MISCOMPILE_PASS,
    PLANTED_MISCOMPILE_TRIGGER,
    MiniLangSut,
    list_minilang_optimizations,
    minilang_descriptor,
)

__all__ = [
    "MINILANG_KEYWORDS",
    "PLANTED_CRASH_PASS",
    "PLANTED_CRASH_TRIGGER",
    "PLANTED_MISCOMPILE_PASS",
    "PLANTED_MISCOMPILE_TRIGGER",
    "MiniLangSut",
    "list_minilang_optimizations",
    "minilang_descriptor",
]
