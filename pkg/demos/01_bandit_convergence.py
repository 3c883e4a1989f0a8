"""Watch Thompson sampling settle on the best of three arms.

Each arm stands for a test program used as a few-shot example; its true
trigger rate is hidden from the pool.  Every round picks one arm and feeds
back the outcome of a batch of ten generated tests.
"""

from collections import Counter

import numpy as np

from optfuzz.bandit import ArmPool

truth = {"weak": 0.1, "fair": 0.3, "strong": 0.6}
pool = ArmPool(rng_seed=0)
for name in truth:
    pool.seed_arm(name)

env = np.random.default_rng(1)
picks = []
for round_ in range(1, 501):
    (arm,) = pool.select(1)
    hits = int(env.binomial(10, truth[arm]))
    pool.update([arm], hits, 10 - hits)
    picks.append(arm)
    if round_ in (10, 50, 100, 500):
        means = ", ".join(f"{a} {pool.arms[a].mean:.2f}" for a in truth)
        print(f"round {round_:3d}: posterior means {means}")

print("pulls:", dict(Counter(picks)))
print("share of 'strong' in the last 100 rounds:", picks[-100:].count("strong") / 100)

# Arms that lose early are rarely pulled again, so their posteriors stay wide.
# That is the price of exploitation: the pool knows the winner precisely and
# the losers only roughly.
for a in truth:
    s = pool.arms[a]
    print(f"{a:6s} alpha={s.alpha:6.1f} beta={s.beta:6.1f} mean={s.mean:.3f} (true {truth[a]})")
