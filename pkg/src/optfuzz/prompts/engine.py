"""Prompt assembly for summarization, initial generation and feedback generation.

Every prompt is a sequence of blocks separated by ``=====`` lines.  Few-shot
blocks are complete; the final block ends at the empty slot the model is
expected to fill.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ..collector import Optimization, OptKind
from ..errors import ContextOverflow
from ..programs import TestProgram, text_hash
from ..sut.base import SutDescriptor

DELIMITER = "====="
BLOCK_SEP = f"\n{DELIMITER}\n\n"
PLACEHOLDERS = ("[TARGET INPUT]", "[INPUT SPECIFICATION]", "[OPTIMIZATION NAME]")
DEFAULT_CONTEXT_TOKENS = 8192
DEFAULT_CHARS_PER_TOKEN = 4.0


class RequirementFormat(str, enum.Enum):
    MIXED = "Mixed"
    NL_ONLY = "NlOnly"
    CODE_ONLY = "CodeOnly"
    RAW_IMPL = "RawImpl"


class ShotKind(str, enum.Enum):
    SUMMARIZATION = "Summarization"
    GENERATION = "Generation"


class Family(str, enum.Enum):
    SUMMARIZE = "Summarize"
    GENERATE = "Generate"
    FEEDBACK = "Feedback"


@dataclass(frozen=True)
class Requirement:
    opt_id: str
    format: RequirementFormat
    text: str
    produced_by: str = "human"

    def __post_init__(self):
        object.__setattr__(self, "format", RequirementFormat(self.format))
        if not self.text.strip():
            raise ValueError("requirement text must be non-empty")

    def to_dict(self) -> dict:
        return {"opt_id": self.opt_id, "format": self.format.value, "text": self.text, "produced_by": self.produced_by}

    @classmethod
    def from_dict(cls, d: dict) -> "Requirement":
        return cls(d["opt_id"], RequirementFormat(d["format"]), d["text"], d.get("produced_by", "human"))


@dataclass(frozen=True)
class FewShotExample:
    instruction: str
    kind: ShotKind
    opt_source: str | None = None
    requirement: Requirement | None = None
    test: str | None = None
    opt_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ShotKind(self.kind))
        if self.kind is ShotKind.SUMMARIZATION and (self.opt_source is None or self.requirement is None):
            raise ValueError("summarization shots need a source and a requirement")
        if self.kind is ShotKind.GENERATION and (self.requirement is None or self.test is None):
            raise ValueError("generation shots need a requirement and a test")


@dataclass(frozen=True)
class PromptBundle:
    text: str
    target_opt: str
    family: Family
    example_ids: tuple[str, ...] = ()

    @property
    def hash(self) -> str:
        return text_hash(self.text)


@dataclass(frozen=True)
class PromptConfig:
    context_tokens: int = DEFAULT_CONTEXT_TOKENS
    chars_per_token: float = DEFAULT_CHARS_PER_TOKEN

    @property
    def budget(self) -> int:
        return int(self.context_tokens * self.chars_per_token)


DEFAULT_CONFIG = PromptConfig()


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------


def load_template(name: str) -> str:
    return resources.files(__package__).joinpath("templates", f"{name}.txt").read_text(encoding="utf-8").strip()


def fill(text: str, descriptor: SutDescriptor, opt_name: str) -> str:
    out = (
        text.replace("[TARGET INPUT]", descriptor.input_kind)
        .replace("[INPUT SPECIFICATION]", descriptor.input_spec or descriptor.input_kind)
        .replace("[OPTIMIZATION NAME]", opt_name)
    )
    left = [p for p in PLACEHOLDERS if p in out]
    if left:
        raise ValueError(f"unresolved placeholders {left}")
    return out


def instruction(family: str, descriptor: SutDescriptor, opt_name: str) -> str:
    return fill(load_template(family), descriptor, opt_name)


def _block(sections: list[tuple[str, str | None]]) -> str:
    """Sections render as ``### Header`` then body; a ``None`` body is the open slot and must come last."""
    parts = []
    for header, body in sections:
        if body is None:
            parts.append(f"### {header}\n")
        else:
            parts.append(f"### {header}\n{body.rstrip()}\n")
    return "".join(parts)


def _fence(code: str) -> str:
    return f"```\n{code.rstrip()}\n```"


def _join(blocks: list[str]) -> str:
    return BLOCK_SEP.join(blocks)


# ---------------------------------------------------------------------------
# requirement formats
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"^[ \t]*```[^\n]*\n.*?^[ \t]*```[ \t]*(?:\n|\Z)", re.MULTILINE | re.DOTALL)


def split_requirement(text: str) -> list[tuple[str, str]]:
    """Cut a mixed requirement into ordered ``("nl" | "code", segment)`` pieces.

    The segments concatenate back to ``text`` exactly.  A fence left open
    runs to the end of the text.
    """
    out = []
    pos = 0
    for m in _FENCE_RE.finditer(text):
        if m.start() > pos:
            out.append(("nl", text[pos : m.start()]))
        out.append(("code", m.group()))
        pos = m.end()
    rest = text[pos:]
    if rest:
        k = re.search(r"^[ \t]*```", rest, re.MULTILINE)
        if k:
            if k.start():
                out.append(("nl", rest[: k.start()]))
            out.append(("code", rest[k.start() :]))
        else:
            out.append(("nl", rest))
    return out


def nl_only(text: str) -> str:
    return _tidy("".join(s for kind, s in split_requirement(text) if kind == "nl"))


def code_only(text: str) -> str:
    return _tidy("\n".join(s.strip("\n") for kind, s in split_requirement(text) if kind == "code"))


def _tidy(text: str) -> str:
    return re.sub(r"\n{3,}", "\n\n", text).strip() + "\n"


def convert_requirement(req: Requirement, fmt: RequirementFormat, opt: Optimization | None = None) -> Requirement:
    """Derive an ablation variant from a mixed requirement.

    When the requested part is empty the mixed text is kept unchanged.
    """
    fmt = RequirementFormat(fmt)
    if fmt is RequirementFormat.RAW_IMPL:
        if opt is None:
            raise ValueError("RawImpl needs the optimization")
        return Requirement(req.opt_id, fmt, opt.full_source(), "human")
    if fmt is RequirementFormat.MIXED or req.format is not RequirementFormat.MIXED:
        return req
    part = nl_only(req.text) if fmt is RequirementFormat.NL_ONLY else code_only(req.text)
    if not part.strip():
        return req
    return Requirement(req.opt_id, fmt, part, req.produced_by)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _check_shots(shots, kind):
    for s in shots:
        if s.kind is not kind:
            raise ValueError(f"expected {kind.value} shots, got {s.kind.value}")


def _summarize_block(instr: str, source: str, requirement: str | None) -> str:
    return _block([("Instruction", instr), ("Source", _fence(source)), ("Requirement", requirement)])


def build_summarization_prompt(target: Optimization, shots: list[FewShotExample], descriptor: SutDescriptor,
                               config: PromptConfig = DEFAULT_CONFIG) -> PromptBundle:
    _check_shots(shots, ShotKind.SUMMARIZATION)
    family = "summarize_pattern" if target.kind is OptKind.PATTERN_MATCHER else "summarize"
    instr = instruction(family, descriptor, target.name)
    head = [
        _summarize_block(fill(s.instruction, descriptor, s.opt_name), s.opt_source, s.requirement.text)
        for s in shots
    ]
    for source in (target.full_source(), target.main_source):
        text = _join(head + [_summarize_block(instr, source, None)])
        if len(text) <= config.budget:
            return PromptBundle(text, target.name, Family.SUMMARIZE)
    raise ContextOverflow(f"summarization prompt for {target.name} exceeds {config.budget} characters")


def _generate_block(instr: str, requirement: str, test: str | None) -> str:
    return _block([("Instruction", instr), ("Requirement", requirement),
                   ("Program", None if test is None else _fence(test))])


def build_generation_prompt(target_req: Requirement, shots: list[FewShotExample], descriptor: SutDescriptor,
                            config: PromptConfig = DEFAULT_CONFIG, opt_name: str | None = None) -> PromptBundle:
    _check_shots(shots, ShotKind.GENERATION)
    name = opt_name or target_req.opt_id
    tail = _generate_block(instruction("generate", descriptor, name), target_req.text, None)
    rendered = [
        _generate_block(fill(s.instruction, descriptor, s.opt_name), s.requirement.text, s.test) for s in shots
    ]
    while True:
        text = _join(rendered + [tail])
        if len(text) <= config.budget:
            return PromptBundle(text, name, Family.GENERATE)
        if not rendered:
            raise ContextOverflow(f"generation prompt for {name} exceeds {config.budget} characters")
        rendered.pop(0)


def build_feedback_prompt(target_req: Requirement, trigger_examples: list[TestProgram], descriptor: SutDescriptor,
                          config: PromptConfig = DEFAULT_CONFIG, opt_name: str | None = None) -> PromptBundle:
    if not trigger_examples:
        raise ValueError("feedback prompts need at least one triggering example")
    name = opt_name or target_req.opt_id
    instr = instruction("feedback", descriptor, name)
    examples = list(trigger_examples)
    while True:
        shown = "\n\n".join(f"Example {k}:\n{_fence(t.code)}" for k, t in enumerate(examples, start=1))
        text = _block([("Instruction", instr), ("Requirement", target_req.text),
                       ("Triggering examples", shown), ("New program", None)])
        if len(text) <= config.budget:
            return PromptBundle(text, name, Family.FEEDBACK, tuple(t.id for t in examples))
        if len(examples) == 1:
            raise ContextOverflow(f"feedback prompt for {name} exceeds {config.budget} characters")
        largest = max(range(len(examples)), key=lambda k: (len(examples[k].code), k))
        del examples[largest]


# ---------------------------------------------------------------------------
# seed shots
# ---------------------------------------------------------------------------


@dataclass
class SeedShots:
    summarization: list[FewShotExample] = field(default_factory=list)
    generation: list[FewShotExample] = field(default_factory=list)


def make_seed_shots(opt: Optimization, requirement_text: str, test: str) -> SeedShots:
    """One summarization shot and one generation shot built from a hand-written pair."""
    family = "summarize_pattern" if opt.kind is OptKind.PATTERN_MATCHER else "summarize"
    req = Requirement(opt.name, RequirementFormat.MIXED, requirement_text, "human")
    return SeedShots(
        [FewShotExample(load_template(family), ShotKind.SUMMARIZATION, opt.main_source, req, None, opt.name)],
        [FewShotExample(load_template("generate"), ShotKind.GENERATION, None, req, test, opt.name)],
    )


def load_seed_shots(path, catalog: list[Optimization]) -> SeedShots:
    """Read a ``{opt, requirement, test}`` YAML seed file; the source comes from the catalog."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    by_name = {o.name: o for o in catalog}
    if data["opt"] not in by_name:
        raise ValueError(f"seed optimization {data['opt']!r} is not in the catalog")
    return make_seed_shots(by_name[data["opt"]], data["requirement"], data["test"])
