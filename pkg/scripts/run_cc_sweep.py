#!/usr/bin/env python3
"""Disjointness-reduction sweep over indicator-vector pairs.

Exits nonzero when any pair's reduction answer mismatches the intersection
truth (the shipped constructions are known to mismatch on intersecting
pairs; see README).

Usage: run_cc_sweep.py [variant] [n] [trials|exhaustive] [seed]
"""

import sys

sys.path.insert(0, "src")

from contractlab.cli import main


if __name__ == "__main__":
    variant = sys.argv[1] if len(sys.argv) > 1 else "sub-sub"
    n = sys.argv[2] if len(sys.argv) > 2 else "4"
    trials = sys.argv[3] if len(sys.argv) > 3 else "100"
    seed = sys.argv[4] if len(sys.argv) > 4 else "0"
    argv = ["experiment", "cc-sweep", "--variant", variant, "--n", n, "--seed", seed]
    if trials == "exhaustive":
        argv.append("--exhaustive")
    else:
        argv += ["--trials", trials]
    sys.exit(main(argv))
