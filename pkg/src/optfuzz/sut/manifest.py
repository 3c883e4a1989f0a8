"""Adapter for external compilers described by a manifest file.

A manifest (YAML or JSON) looks like::

    name: llvm
    input_kind: C program
    input_spec: standard C99 without undefined behaviour
    source_roots: [llvm/lib/Transforms]
    opt_keywords: [combine, fold]
    max_source_lines: 400
    program_suffix: .c
    commands:
      compile_run_optimized: ./run.sh -O2
      compile_run_baseline: ./run.sh -O0
    exit_codes: {compile_reject: [2], compile_crash: [3], timeout: [124]}
    run_phase_marker: "WFPHASE run"
    forbidden_patterns: [INTERNAL_ASSERT_FAILED]

Each command receives the program path as its last argument and must print
one ``WFOPT <name>`` line on stderr per optimization activation.  Relative
paths (the program, and arguments starting with ``./`` or ``../``) are
resolved against the manifest's directory.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..errors import ConfigError
from .base import DEFAULT_OUTPUT_CAP, ExitConvention, Mode, RunRequest, RunResult, SutDescriptor, classify
from .sandbox import run_sandboxed

_KEYS = {
    "name", "input_kind", "input_spec", "source_roots", "opt_keywords", "max_source_lines",
    "keyword_regex", "program_suffix", "commands", "exit_codes", "run_phase_marker",
    "forbidden_patterns", "output_cap",
}


@dataclass(frozen=True)
class Manifest:
    descriptor: SutDescriptor
    optimized_cmd: tuple[str, ...]
    baseline_cmd: tuple[str, ...]
    convention: ExitConvention
    program_suffix: str = ".txt"
    forbidden_patterns: tuple[str, ...] = ()
    output_cap: int = DEFAULT_OUTPUT_CAP


def _command(value, base: Path) -> tuple[str, ...]:
    argv = shlex.split(value) if isinstance(value, str) else [str(v) for v in value]
    if not argv:
        raise ConfigError("empty command in manifest")
    for i, arg in enumerate(argv):
        relative = arg.startswith(("./", "../")) or (i == 0 and "/" in arg and not Path(arg).is_absolute())
        if relative:
            argv[i] = str((base / arg).resolve())
    return tuple(argv)


def parse_manifest(data: dict, base: Path) -> Manifest:
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown manifest keys: {sorted(unknown)}")
    try:
        commands = data["commands"]
        roots = [str((base / r).resolve()) for r in data["source_roots"]]
        descriptor = SutDescriptor(
            name=data["name"],
            input_kind=data["input_kind"],
            input_spec=data.get("input_spec", ""),
            source_roots=tuple(roots),
            opt_keywords=tuple(data["opt_keywords"]),
            max_source_lines=data.get("max_source_lines"),
            keyword_regex=bool(data.get("keyword_regex", False)),
        )
        codes = data.get("exit_codes", {})
        convention = ExitConvention(
            compile_reject=tuple(codes.get("compile_reject", (2,))),
            compile_crash=tuple(codes.get("compile_crash", (3,))),
            timeout=tuple(codes.get("timeout", (124,))),
            run_phase_marker=data.get("run_phase_marker"),
        )
        return Manifest(
            descriptor=descriptor,
            optimized_cmd=_command(commands["compile_run_optimized"], base),
            baseline_cmd=_command(commands["compile_run_baseline"], base),
            convention=convention,
            program_suffix=data.get("program_suffix", ".txt"),
            forbidden_patterns=tuple(data.get("forbidden_patterns", ())),
            output_cap=int(data.get("output_cap", DEFAULT_OUTPUT_CAP)),
        )
    except KeyError as exc:
        raise ConfigError(f"manifest is missing required key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid manifest: {exc}") from None


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"manifest {path} must be a mapping")
    return parse_manifest(data, path.resolve().parent)


class ManifestSut:
    def __init__(self, manifest: Manifest):
        self.manifest = manifest
        self.name = manifest.descriptor.name
        self.program_suffix = manifest.program_suffix
        self.forbidden_patterns = manifest.forbidden_patterns

    @classmethod
    def from_file(cls, path) -> "ManifestSut":
        return cls(load_manifest(path))

    def descriptor(self) -> SutDescriptor:
        return self.manifest.descriptor

    def compile_and_run(self, request: RunRequest) -> RunResult:
        cmd = self.manifest.optimized_cmd if request.mode is Mode.OPTIMIZED else self.manifest.baseline_cmd
        name = "program" + self.program_suffix
        outcome = run_sandboxed(
            list(cmd) + ["{dir}/" + name],
            time_limit=request.time_limit,
            memory_limit=request.memory_limit,
            output_cap=self.manifest.output_cap,
            files={name: request.code},
        )
        return classify(
            outcome.returncode,
            outcome.stdout,
            outcome.stderr,
            timed_out=outcome.timed_out,
            truncated=outcome.truncated,
            convention=self.manifest.convention,
        )
