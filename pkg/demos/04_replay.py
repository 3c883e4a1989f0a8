"""Record a campaign, then replay it without calling any model.

Every model answer is stored under the campaign's replay/ directory keyed by
prompt hash and seed.  Replaying rebuilds the same tests and must reproduce
report.json byte for byte.
"""

import tempfile
from pathlib import Path

from optfuzz.cli import main

work = Path(tempfile.mkdtemp(prefix="demo-replay-"))
original = work / "run"

main(["fuzz", "--profile", "mini", "--campaign", str(original)])
code = main(["replay", "--campaign", str(original), "--out", str(work / "again")])
print("replay exit code:", code, "(1 because the replayed run reproduces the bugs)")

same = (original / "report.json").read_bytes() == (work / "again" / "report.json").read_bytes()
print("report.json identical:", same)
