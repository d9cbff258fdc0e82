#!/usr/bin/env python3
"""Hidden-bonus localization cost: mean value queries vs the 2^(n-2) floor.

Usage: run_value_query_experiment.py [n] [trials] [seed]
"""

import sys

sys.path.insert(0, "src")

from contractlab.cli import main


if __name__ == "__main__":
    n = sys.argv[1] if len(sys.argv) > 1 else "8"
    trials = sys.argv[2] if len(sys.argv) > 2 else "10000"
    seed = sys.argv[3] if len(sys.argv) > 3 else "0"
    sys.exit(
        main(["experiment", "value-query", "--n", n, "--trials", trials, "--seed", seed])
    )
