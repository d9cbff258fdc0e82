#!/usr/bin/env python3
"""Print the breakpoint table of an equal-revenue instance (default n=3).

Usage: print_breakpoints.py [n] [submod_f|supmod_c]
"""

import sys

sys.path.insert(0, "src")

from contractlab.constructions import (
    build_equal_revenue_submod_f,
    build_equal_revenue_supmod_c,
)
from contractlab.solver import enumerate_breakpoints


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    kind = sys.argv[2] if len(sys.argv) > 2 else "submod_f"
    build = build_equal_revenue_submod_f if kind == "submod_f" else build_equal_revenue_supmod_c
    inst = build(n)
    table = enumerate_breakpoints(inst)
    print(f"{'t':>4} {'alpha':>12} {'set':>16} {'f':>12} {'c':>10} {'u_p':>10}")
    for b in table:
        print(
            f"{b.position:>4} {float(b.alpha):>12.6f} {str(b.aset):>16}"
            f" {float(b.f_value):>12.6f} {float(b.c_value):>10.4f}"
            f" {float(b.principal_utility):>10.6f}"
        )


if __name__ == "__main__":
    main()
