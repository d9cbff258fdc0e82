#!/usr/bin/env python3
"""Approximation scheme vs exact solver across eps values.

Usage: run_fptas_comparison.py [n]
"""

import sys

sys.path.insert(0, "src")

from contractlab.constructions import (
    build_equal_revenue_submod_f,
    build_equal_revenue_supmod_c,
)
from contractlab.solver import fptas, optimal_contract


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 6
    for inst in (build_equal_revenue_submod_f(n), build_equal_revenue_supmod_c(n)):
        exact = optimal_contract(inst)
        print(f"{inst.name}: exact u_p = {float(exact.principal_utility):.6f}")
        for eps in (0.2, 0.1, 0.01):
            inst.ledger.reset()
            approx = fptas(inst, eps)
            ratio = float(approx.principal_utility / exact.principal_utility)
            print(
                f"  eps={eps:<5} ratio={ratio:.6f}"
                f" value_queries={approx.value_queries}"
                f" br_queries={approx.best_response_queries}"
            )


if __name__ == "__main__":
    main()
