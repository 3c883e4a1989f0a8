"""Monte-Carlo reference for Thompson Sampling on three fixed arms.

Plain numpy, no library code: arms with true rates 0.1, 0.3, 0.6 start at
Beta(1, 1); each round draws one Beta sample per arm, pulls the argmax and
observes a Binomial(10, p) batch.  After 500 rounds we record the best arm's
share of the last 100 pulls and each posterior mean's error, overall and for
arms pulled at least 200 times.  Also records the 3-sigma band for pick
counts when all arms are equal.
Writes tests/fixtures/convergence_oracle.json.
"""

import json
from pathlib import Path

import numpy as np

TRUTH = (0.1, 0.3, 0.6)
ROUNDS, BATCH, TAIL, TOL, TRIALS = 500, 10, 100, 0.05, 400
OUT = Path("tests/fixtures/convergence_oracle.json")


def trial(seed):
    rng = np.random.default_rng(seed)
    a, b = np.ones(3), np.ones(3)
    picks = []
    for _ in range(ROUNDS):
        j = int(np.argmax(rng.beta(a, b)))
        k = rng.binomial(BATCH, TRUTH[j])
        a[j] += k
        b[j] += BATCH - k
        picks.append(j)
    share = np.mean(np.array(picks[-TAIL:]) == 2)
    err = np.abs(a / (a + b) - np.array(TRUTH))
    pulls = np.bincount(picks, minlength=3)
    return share, err, pulls


def uniformity(arms=3, reps=10000, seed=0):
    """Equal Beta(1, 1) arms: per-arm pick counts against the binomial 3-sigma band."""
    rng = np.random.default_rng(seed)
    picks = np.argmax(rng.beta(np.ones((reps, arms)), np.ones((reps, arms))), axis=1)
    counts = np.bincount(picks, minlength=arms)
    mu = reps / arms
    sigma = float(np.sqrt(reps * (1 / arms) * (1 - 1 / arms)))
    return {"arms": arms, "reps": reps, "expected": mu, "sigma": round(sigma, 3),
            "band": [mu - 3 * sigma, mu + 3 * sigma], "reference_counts": counts.tolist()}


def main():
    rows = [trial(s) for s in range(TRIALS)]
    shares = np.array([r[0] for r in rows])
    errs = np.array([r[1] for r in rows])
    pulls = np.array([r[2] for r in rows])
    well_pulled = pulls >= 200
    out = {
        "trials": TRIALS,
        "p_share_ok": float(np.mean(shares >= 0.6)),
        "mean_share": round(float(shares.mean()), 4),
        "p_each_mean_ok": [round(float(x), 4) for x in np.mean(errs <= TOL, axis=0)],
        "p_all_means_ok": float(np.mean(np.all(errs <= TOL, axis=1))),
        "p_mean_ok_given_200_pulls": float(np.mean(errs[well_pulled] <= TOL)),
        "uniformity": uniformity(),
    }
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(out)


if __name__ == "__main__":
    main()
