#!/usr/bin/env python3
"""Ten-seed certified-agent benchmark on one environment (default: omnibot).

Writes episode CSVs, per-seed summaries, a combined summary, and a
certificate report under runs/.  Usage:

    python scripts/run_calf_benchmark.py [env] [episodes]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from goalbench.cli import main

env = sys.argv[1] if len(sys.argv) > 1 else "omnibot"
episodes = sys.argv[2] if len(sys.argv) > 2 else "20"
OUT = "runs"

main(["run", "--agent", "nominal", "--env", env, "--seeds", "1",
      "--episodes", "1", "--out", OUT])
main(["run", "--agent", "calf", "--env", env, "--seeds", "1..10",
      "--episodes", episodes, "--out", OUT])
main(["summarize", "--in", OUT, "--out", f"{OUT}/all_returns.csv"])
main(["certify", "--in", OUT, "--out", f"{OUT}/certificates.txt"])
