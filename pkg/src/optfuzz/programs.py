"""Generated test programs."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TestProgram:
    id: str
    opt_id: str
    code: str
    iteration: int
    parent_example_ids: tuple[str, ...] = field(default_factory=tuple)
    source_prompt_hash: str = ""

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "opt_id": self.opt_id,
            "code": self.code,
            "iteration": self.iteration,
            "parent_example_ids": list(self.parent_example_ids),
            "source_prompt_hash": self.source_prompt_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestProgram":
        return cls(d["id"], d["opt_id"], d["code"], d["iteration"], tuple(d["parent_example_ids"]),
                   d.get("source_prompt_hash", ""))
