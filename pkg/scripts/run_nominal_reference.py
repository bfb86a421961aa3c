#!/usr/bin/env python3
"""Run the deterministic fallback controller on all six systems and certify.

Produces runs/nominal/<env>/seed_1/... plus a goal-reaching certificate
report.  Takes a few seconds.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from goalbench.cli import main
from goalbench.environments import ENV_NAMES

OUT = "runs"

for env in ENV_NAMES:
    main(["run", "--agent", "nominal", "--env", env, "--seeds", "1",
          "--episodes", "1", "--out", OUT])
main(["certify", "--in", OUT, "--out", f"{OUT}/nominal_certificates.txt"])
