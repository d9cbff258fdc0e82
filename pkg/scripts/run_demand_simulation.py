#!/usr/bin/env python3
"""Demand queries answered by value queries only: agreement and query counts.

Usage: run_demand_simulation.py [n] [random-prices-per-k] [seed]
"""

import sys

sys.path.insert(0, "src")

from contractlab.cli import main


if __name__ == "__main__":
    n = sys.argv[1] if len(sys.argv) > 1 else "6"
    trials = sys.argv[2] if len(sys.argv) > 2 else "1000"
    seed = sys.argv[3] if len(sys.argv) > 3 else "0"
    sys.exit(
        main(["experiment", "demand-sim", "--n", n, "--trials", trials, "--seed", seed])
    )
