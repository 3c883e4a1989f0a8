"""Run a command in a throwaway directory with a wall-clock and output cap."""

from __future__ import annotations

import os
import resource
import signal
import subprocess
import tempfile
from dataclasses import dataclass

from ..errors import SandboxFailure
from .base import DEFAULT_OUTPUT_CAP, GRACE_PERIOD


@dataclass(frozen=True)
class SandboxOutcome:
    returncode: int | None
    stdout: bytes
    stderr: bytes
    timed_out: bool
    truncated: bool


def _read_capped(path: str, cap: int) -> tuple[bytes, bool]:
    with open(path, "rb") as f:
        data = f.read(cap + 1)
    if len(data) > cap:
        return data[:cap], True
    return data, False


def _limit_memory(limit: int | None):
    if not limit:
        return None

    def apply():
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))

    return apply


def run_sandboxed(
    argv: list[str],
    *,
    time_limit: float,
    memory_limit: int | None = None,
    output_cap: int = DEFAULT_OUTPUT_CAP,
    files: dict[str, str] | None = None,
    env: dict[str, str] | None = None,
) -> SandboxOutcome:
    """Run ``argv`` inside a fresh temp directory.

    ``files`` maps relative names to text written into that directory before
    the run; a ``{dir}`` token in ``argv`` is replaced by the directory path.
    """
    with tempfile.TemporaryDirectory(prefix="optfuzz-run-") as workdir:
        for name, text in (files or {}).items():
            with open(os.path.join(workdir, name), "w", encoding="utf-8") as f:
                f.write(text)
        argv = [a.replace("{dir}", workdir) for a in argv]
        out_path = os.path.join(workdir, ".stdout")
        err_path = os.path.join(workdir, ".stderr")
        try:
            with open(out_path, "wb") as out, open(err_path, "wb") as err:
                proc = subprocess.Popen(
                    argv,
                    cwd=workdir,
                    stdin=subprocess.DEVNULL,
                    stdout=out,
                    stderr=err,
                    env=env,
                    start_new_session=True,
                    preexec_fn=_limit_memory(memory_limit),
                )
                timed_out = False
                try:
                    proc.wait(timeout=time_limit)
                except subprocess.TimeoutExpired:
                    timed_out = True
                    try:
                        os.killpg(proc.pid, signal.SIGKILL)
                    except ProcessLookupError:
                        pass
                    proc.wait(timeout=GRACE_PERIOD)
        except (OSError, subprocess.SubprocessError) as exc:
            raise SandboxFailure(f"could not run {argv[0]!r}: {exc}") from exc
        stdout, t1 = _read_capped(out_path, output_cap)
        stderr, t2 = _read_capped(err_path, output_cap)
    return SandboxOutcome(
        returncode=None if timed_out else proc.returncode,
        stdout=stdout,
        stderr=stderr,
        timed_out=timed_out,
        truncated=t1 or t2,
    )
