"""Compare the three example-selection strategies on the same budget.

NoFeedback keeps asking with the initial prompt.  Random and Thompson both
show triggering tests back to the model; Thompson prefers examples whose
descendants triggered often.  The heterogeneous stub preset makes some
example families far more useful than others, which is where the choice of
strategy can matter.
"""

import tempfile
from pathlib import Path

from optfuzz.campaign import Campaign
from optfuzz.config import load_config

work = Path(tempfile.mkdtemp(prefix="demo-strategies-"))

for preset in ("homogeneous", "heterogeneous"):
    print(f"stub preset: {preset}")
    for strategy in ("NoFeedback", "Random", "Thompson"):
        counts = []
        for seed in range(3):
            cfg = load_config(None, [f"campaign.strategy={strategy}", f"campaign.seed={seed}",
                                     f"stub.preset={preset}"], profile="mini")
            r = Campaign(cfg, work / f"{preset}-{strategy}-{seed}").run()
            counts.append(r["totals"]["triggering_tests"])
        print(f"  {strategy:10s} triggering tests per seed {counts}")
