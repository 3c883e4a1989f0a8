"""Expected triggering tests for the homogeneous stub, closed form.

Each optimization gets ITERS batches of BATCH samples.  Before the first hit
the trigger probability is P0; once any test has triggered, every later
batch uses a feedback prompt with probability P1.  The feedback-free run
always uses P0.  Writes tests/fixtures/feedback_oracle.json.
"""

import json
from fractions import Fraction
from pathlib import Path

P0, P1 = Fraction(1, 10), Fraction(6, 10)
ITERS, BATCH = 10, 10
OUT = Path("tests/fixtures/feedback_oracle.json")


def expected_with_feedback():
    total = Fraction(0)
    for t in range(ITERS):
        no_hit_yet = (1 - P0) ** (BATCH * t)
        total += BATCH * (no_hit_yet * P0 + (1 - no_hit_yet) * P1)
    return total


def main():
    fb = expected_with_feedback()
    nofb = ITERS * BATCH * P0
    # six passes with competence 0.1 and two with 0: chance all six trigger at least once
    p_one = 1 - (1 - P0) ** (ITERS * BATCH)
    out = {
        "p_six_of_six_triggered": float(p_one ** 6),
        "per_opt_feedback": float(fb),
        "per_opt_no_feedback": float(nofb),
        "ratio": float(fb / nofb),
    }
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(out)


if __name__ == "__main__":
    main()
