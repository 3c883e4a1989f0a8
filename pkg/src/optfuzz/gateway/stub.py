"""Deterministic stand-in for both models.

Every sample is a pure function of ``(prompt hash, seed, sample index)``.
For generation the stub decides first whether the sample will trigger the
target optimization, then renders a program from the matching template family
(or a non-triggering filler).  The trigger probability is the per-optimization
*competence* for the initial prompt.  A feedback prompt uses the competence of
the template family the sample is drawn from: with probability
``inheritance`` that is the family of a randomly chosen example in the
prompt, otherwise a uniformly random family.
"""

from __future__ import annotations

import hashlib
import random
import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from ..prompts.engine import Family, PromptBundle
from . import stub_minilang
from .core import ModelRole

_VARIANT_TAG = re.compile(r"^# variant: (\d+)$", re.MULTILINE)


@dataclass(frozen=True)
class StubConfig:
    base_competence: float = 0.1
    competence: Mapping[str, float] = field(default_factory=dict)
    feedback_competence: float = 0.6
    variant_competence: tuple[float, ...] | None = None
    inheritance: float = 0.5
    invalid_rate: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "competence", dict(self.competence))
        probs = [self.base_competence, self.feedback_competence, self.inheritance, self.invalid_rate,
                 *self.competence.values(), *(self.variant_competence or ())]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("stub probabilities must lie in [0, 1]")
        if self.variant_competence is not None and len(self.variant_competence) != stub_minilang.VARIANTS:
            raise ValueError(f"variant_competence needs {stub_minilang.VARIANTS} entries")

    def initial(self, opt: str) -> float:
        return self.competence.get(opt, self.base_competence)

    def with_feedback(self, opt: str, variant: int) -> float:
        if self.variant_competence is not None:
            lifted = self.variant_competence[variant]
        else:
            lifted = self.feedback_competence
        return max(self.initial(opt), lifted)

    @classmethod
    def from_dict(cls, d: dict) -> "StubConfig":
        d = dict(d)
        if d.get("variant_competence") is not None:
            d["variant_competence"] = tuple(d["variant_competence"])
        return cls(**d)


# Example families differ sharply in how well they guide generation.
HETEROGENEOUS = StubConfig(variant_competence=(0.95, 0.6, 0.3, 0.1, 0.05, 0.05), inheritance=0.5)


def sample_rng(prompt_hash: str, seed: int, index: int) -> random.Random:
    digest = hashlib.sha256(f"{prompt_hash}:{seed}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def example_variants(text: str) -> list[int]:
    """Template families of the triggering examples shown in a feedback prompt."""
    k = text.rfind("### Triggering examples")
    if k < 0:
        return []
    return [int(v) for v in _VARIANT_TAG.findall(text[k:])]


class StubBackend:
    name = "stub"

    def __init__(self, config: StubConfig | None = None):
        self.config = config or StubConfig()
        self.calls = 0

    def generate(self, prompt: PromptBundle, role: ModelRole, seed: int) -> list[str]:
        self.calls += 1
        if prompt.family is Family.SUMMARIZE:
            return [self._summary(prompt, seed, i) for i in range(role.samples_per_call)]
        return [self._program(prompt, seed, i) for i in range(role.samples_per_call)]

    # -- generation -------------------------------------------------------

    def _program(self, prompt: PromptBundle, seed: int, index: int) -> str:
        rng = sample_rng(prompt.hash, seed, index)
        target = prompt.target_opt
        cfg = self.config
        if prompt.family is Family.FEEDBACK:
            parents = example_variants(prompt.text)
            parent = rng.choice(parents) if parents else None
            inherit = rng.random() < cfg.inheritance
            variant = parent if parent is not None and inherit else rng.randrange(stub_minilang.VARIANTS)
            p = cfg.with_feedback(target, variant)
        else:
            variant = rng.randrange(stub_minilang.VARIANTS)
            p = cfg.initial(target)
        hit = rng.random() < p
        if hit and target in stub_minilang.TEMPLATES:
            code = stub_minilang.program(target, variant, rng)
            lead = "Here is a program that should trigger the optimization."
        elif rng.random() < cfg.invalid_rate:
            code = stub_minilang.invalid(rng)
            lead = "Here is a program."
        else:
            code = stub_minilang.filler(rng)
            lead = "Here is a program."
        return f"{lead}\n```\n{code}```\n"

    # -- analysis ---------------------------------------------------------

    def _summary(self, prompt: PromptBundle, seed: int, index: int) -> str:
        text = prompt.text
        k = text.rfind("### Source")
        source = text[k:] if k >= 0 else text
        name = prompt.target_opt
        doc = re.search(r'"""(.+?)(?:\n|""")', source)
        kinds = sorted(set(re.findall(r"\b(BinOp|Neg|Compare|Repeat|MulAdd|Let|Print|Num|Str|Var)\b", source)))
        ops = sorted(set(re.findall(r'op(?:=| == | in \(?)"([^"]+)"', source)))
        lines = [f"{name} rewrites part of the program when every check in its source succeeds."]
        if doc:
            lines.append(doc.group(1).strip())
        if kinds:
            lines.append("The input must contain " + ", ".join(kinds) + " nodes in the shape the function inspects.")
        if ops:
            lines.append("Relevant operators: " + " ".join(ops) + ".")
        lines.append("Operands must have the types the guards accept, and the result must be printed.")
        pseudo = [f"when the program contains the shape matched by {name}:"]
        pseudo += [f"    with operator {op}" for op in ops]
        pseudo.append("    and all type guards hold")
        pseudo.append("then rewrite it")
        return "\n".join(lines) + "\n\n```\n" + "\n".join(pseudo) + "\n```\n"
