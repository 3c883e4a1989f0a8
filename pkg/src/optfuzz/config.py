"""Campaign configuration: a YAML file plus ``section.key=value`` overrides."""

from __future__ import annotations

import copy
import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .gateway.stub import HETEROGENEOUS, StubConfig
from .prompts.engine import DEFAULT_CHARS_PER_TOKEN, DEFAULT_CONTEXT_TOKENS, RequirementFormat

PROFILES = {"mini": {"iterations": 10}, "full": {"iterations": 100}}


class Strategy(str, enum.Enum):
    THOMPSON = "Thompson"
    RANDOM = "Random"
    NO_FEEDBACK = "NoFeedback"


@dataclass
class CampaignConfig:
    iterations: int = 100
    batch_size: int = 10
    feedback_examples: int = 3
    strategy: Strategy = Strategy.THOMPSON
    requirement_format: RequirementFormat = RequirementFormat.MIXED
    seed: int = 0
    workers: int = 4
    time_limit: float = 10.0
    memory_limit: int = 1 << 30
    comparison: str = "bytes"
    rtol: float = 1e-4
    atol: float = 1e-6
    file_timeouts: bool = False
    share_incidental: bool = False
    max_arms: int | None = None
    fail_on_bugs: bool = True
    record: bool = True

    def __post_init__(self):
        try:
            self.strategy = Strategy(self.strategy)
            self.requirement_format = RequirementFormat(self.requirement_format)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("iterations", "batch_size", "feedback_examples", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"campaign.{name} must be >= 1")
        if self.comparison not in ("bytes", "numeric"):
            raise ConfigError("campaign.comparison must be 'bytes' or 'numeric'")
        if self.time_limit <= 0:
            raise ConfigError("campaign.time_limit must be positive")

    @property
    def budget(self) -> int:
        return self.iterations * self.batch_size


@dataclass
class PromptSettings:
    context_tokens: int = DEFAULT_CONTEXT_TOKENS
    chars_per_token: float = DEFAULT_CHARS_PER_TOKEN
    shots: str | None = "default"  # "default", a seed YAML path, or null for zero-shot


@dataclass
class SutSettings:
    kind: str = "minilang"
    planted_bugs: bool = True
    isolation: str = "inprocess"
    manifest: str | None = None
    keywords: list | None = None
    max_source_lines: int | None = None
    aux_depth: int = 1

    def __post_init__(self):
        if self.kind not in ("minilang", "manifest"):
            raise ConfigError("sut.kind must be 'minilang' or 'manifest'")
        if self.kind == "manifest" and not self.manifest:
            raise ConfigError("sut.manifest is required when sut.kind is 'manifest'")


@dataclass
class RoleSettings:
    backend: str = "stub"
    url: str | None = None
    api_key_env: str | None = "OPTFUZZ_API_KEY"
    temperature: float | None = None
    samples_per_call: int | None = None
    max_output: int = 4096
    retries: int = 3
    max_inflight: int = 4
    replay_dir: str | None = None

    def __post_init__(self):
        if self.backend not in ("stub", "http", "replay"):
            raise ConfigError("backend must be one of stub, http, replay")
        if self.backend == "http" and not self.url:
            raise ConfigError("the http backend needs a url")


@dataclass
class StubSettings:
    preset: str = "homogeneous"
    base_competence: float | None = None
    competence: dict = field(default_factory=dict)
    feedback_competence: float | None = None
    variant_competence: list | None = None
    inheritance: float | None = None
    invalid_rate: float | None = None

    def build(self) -> StubConfig:
        if self.preset not in ("homogeneous", "heterogeneous"):
            raise ConfigError("stub.preset must be 'homogeneous' or 'heterogeneous'")
        base = HETEROGENEOUS if self.preset == "heterogeneous" else StubConfig()
        changes = {
            k: v for k, v in dataclasses.asdict(self).items() if k != "preset" and v is not None and v != {}
        }
        if "variant_competence" in changes:
            changes["variant_competence"] = tuple(changes["variant_competence"])
        try:
            return dataclasses.replace(base, **changes)
        except ValueError as exc:
            raise ConfigError(f"stub: {exc}") from None


@dataclass
class RunConfig:
    campaign: CampaignConfig = field(default_factory=CampaignConfig)
    prompt: PromptSettings = field(default_factory=PromptSettings)
    sut: SutSettings = field(default_factory=SutSettings)
    analysis: RoleSettings = field(default_factory=RoleSettings)
    generation: RoleSettings = field(default_factory=RoleSettings)
    stub: StubSettings = field(default_factory=StubSettings)
    base_dir: Path = field(default=Path("."), compare=False)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "base_dir":
                continue
            out[f.name] = {k: _plain(v) for k, v in dataclasses.asdict(getattr(self, f.name)).items()}
        return out

    def resolve(self, path: str | None) -> str | None:
        if path is None:
            return None
        p = Path(path)
        return str(p if p.is_absolute() else (self.base_dir / p).resolve())


SECTIONS = {
    "campaign": CampaignConfig,
    "prompt": PromptSettings,
    "sut": SutSettings,
    "analysis": RoleSettings,
    "generation": RoleSettings,
    "stub": StubSettings,
}


def _plain(v):
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, tuple):
        return list(v)
    return v


def _section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def build_config(data: dict | None, base_dir=".") -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {name: _section(cls, data.get(name, {}) or {}, name) for name, cls in SECTIONS.items()}
    cfg = RunConfig(**parts, base_dir=Path(base_dir))
    cfg.stub.build()  # validate early
    return cfg


def parse_value(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        if len(parts) == 1:
            parts = ["campaign", parts[0]]
        if len(parts) != 2 or parts[0] not in SECTIONS:
            raise ConfigError(f"override key {key!r} must be section.key")
        data.setdefault(parts[0], {})
        if data[parts[0]] is None:
            data[parts[0]] = {}
        data[parts[0]][parts[1]] = parse_value(value)
    return data


def load_config(path=None, overrides: list[str] = (), profile: str | None = None) -> RunConfig:
    data: dict = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
        base = path.resolve().parent
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        data = apply_overrides(data, [f"campaign.{k}={v}" for k, v in PROFILES[profile].items()])
    data = apply_overrides(data, list(overrides))
    return build_config(data, base)


def dump_config(cfg: RunConfig) -> str:
    """YAML for ``cfg`` with every path made absolute, so it loads from anywhere."""
    data = cfg.to_dict()
    if data["sut"]["manifest"]:
        data["sut"]["manifest"] = cfg.resolve(data["sut"]["manifest"])
    if data["prompt"]["shots"] not in (None, "default"):
        data["prompt"]["shots"] = cfg.resolve(data["prompt"]["shots"])
    for role in ("analysis", "generation"):
        if data[role]["replay_dir"]:
            data[role]["replay_dir"] = cfg.resolve(data[role]["replay_dir"])
    return yaml.safe_dump(data, sort_keys=True)
