from .backends import HttpBackend, RecordingBackend, RecordStore, ReplayBackend
from .core import (
    CompletionResult,
    Gateway,
    ModelRole,
    Role,
    analysis_role,
    extract_code_blocks,
    generation_role,
    strip_prompt_echo,
)
from .stub import HETEROGENEOUS, StubBackend, StubConfig

__all__ = [
    "CompletionResult",
    "Gateway",
    "HETEROGENEOUS",
    "HttpBackend",
    "ModelRole",
    "RecordStore",
    "RecordingBackend",
    "ReplayBackend",
    "Role",
    "StubBackend",
    "StubConfig",
    "analysis_role",
    "extract_code_blocks",
    "generation_role",
    "strip_prompt_echo",
]
