from .base import (
    CompileStatus,
    ExitConvention,
    Mode,
    RunRequest,
    RunResult,
    RunStatus,
    Sut,
    SutDescriptor,
    classify,
    trigger_lines,
)
from .manifest import ManifestSut, load_manifest
from .minilang import MiniLangSut, list_minilang_optimizations, minilang_descriptor

__all__ = [
    "CompileStatus",
    "ExitConvention",
    "ManifestSut",
    "MiniLangSut",
    "Mode",
    "RunRequest",
    "RunResult",
    "RunStatus",
    "Sut",
    "SutDescriptor",
    "classify",
    "list_minilang_optimizations",
    "load_manifest",
    "minilang_descriptor",
    "trigger_lines",
]
