"""Subprocess entry point: ``python -m optfuzz.sut.minilang --mode optimized prog.ml.txt``.

Exit codes: 0 ok, 2 compile error, 3 internal compiler error, 4 runtime
error, 124 evaluation budget exhausted.  Planted-bug crashes abort the
process (SIGABRT).
"""

import argparse
import json
import os
import sys

from .driver import BASELINE, OPTIMIZED, run_program


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="minilang")
    parser.add_argument("program")
    parser.add_argument("--mode", choices=[OPTIMIZED, BASELINE], default=BASELINE)
    parser.add_argument("--planted-bugs", action="store_true")
    parser.add_argument("--inputs", default="{}", help="JSON object of input bindings")
    args = parser.parse_args(argv)

    with open(args.program, encoding="utf-8") as f:
        source = f.read()
    outcome = run_program(source, args.mode, args.planted_bugs, json.loads(args.inputs))
    sys.stdout.write(outcome.stdout)
    sys.stderr.write(outcome.stderr)
    sys.stdout.flush()
    sys.stderr.flush()
    if outcome.signal is not None:
        os.abort()
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
