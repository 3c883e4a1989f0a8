"""One-off desk checks of the bundled MiniLang compiler, run as a subprocess.

Runs ``python -m optfuzz.sut.minilang`` directly (no adapter, no oracle) on
the documented fixture programs and freezes the raw exit codes, stdout and
trigger lines.  Writes tests/fixtures/desk_checks.json.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

OUT = Path("tests/fixtures/desk_checks.json")

CASES = {
    "add_zero": ("let a = x + 0\nprint(a)\n", "optimized", {"x": 2}, False),
    "crash_intrinsic": ("print(crash_if_fused())\n", "optimized", {}, True),
    "miscompile_optimized": ("let x = 7\nlet y = x * 3 - 1\nprint(y)\n", "optimized", {}, True),
    "miscompile_baseline": ("let x = 7\nlet y = x * 3 - 1\nprint(y)\n", "baseline", {}, True),
    "repeat_crash_optimized": ('let s = "ab"\nprint(s + s + s)\n', "optimized", {}, True),
    "repeat_crash_baseline": ('let s = "ab"\nprint(s + s + s)\n', "baseline", {}, True),
}


def run(code, mode, inputs, planted):
    with tempfile.NamedTemporaryFile("w", suffix=".ml.txt", delete=False) as f:
        f.write(code)
    argv = [sys.executable, "-m", "optfuzz.sut.minilang", "--mode", mode, "--inputs", json.dumps(inputs), f.name]
    if planted:
        argv.append("--planted-bugs")
    p = subprocess.run(argv, capture_output=True, text=True)
    Path(f.name).unlink()
    triggers = [line for line in p.stderr.splitlines() if line.startswith("WFOPT ")]
    return {"returncode": p.returncode, "stdout": p.stdout, "triggers": triggers}


def main():
    out = {name: run(*case) for name, case in CASES.items()}
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
