"""Run a ten-iteration campaign against MiniLang and look at what it found.

MiniLang ships with two planted bugs: a miscompile in the multiply-add fusion
and an internal assertion in the string repeat fusion.  The stub model stands
in for both language models, so the run needs no network.
"""

import json
import tempfile
from pathlib import Path

from optfuzz.campaign import Campaign, render_report
from optfuzz.config import load_config

work = Path(tempfile.mkdtemp(prefix="demo-campaign-"))

cfg = load_config(None, ["campaign.seed=0"], profile="mini")
report = Campaign(cfg, work / "run").run()
print(render_report(report))

# Every bug report keeps the program that exposed it.
for bug in report["bugs"]:
    print(bug["dedup_key"])
    print("  first seen in", bug["first_test_id"], "with", bug["occurrences"], "occurrences")

# Turning the planted bugs off must leave the oracle silent.
clean = load_config(None, ["sut.planted_bugs=false"], profile="mini")
quiet = Campaign(clean, work / "clean").run()
print("bugs with planted bugs disabled:", quiet["totals"]["bugs"])

# Iteration metrics are one JSON row per line.
rows = [json.loads(x) for x in (work / "run" / "metrics.jsonl").read_text().splitlines()]
print("triggered optimizations per iteration:", [r["triggered_opt_count"] for r in rows])
