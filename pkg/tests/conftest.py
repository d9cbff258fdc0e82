"""Shared brute-force oracles and hypothesis strategies.

The brute-force functions here are written independently of the library
internals (plain loops over masks, no tie-break helpers) so they can serve
as ground truth for the solver and query modules.
"""

from __future__ import annotations

from fractions import Fraction

import hypothesis.strategies as st

from contractlab.core import ContractInstance, SetFunctionOracle
from contractlab.reals import RealContext


# --- brute-force ground truth ----------------------------------------------


def brute_argmax(util, tie, size):
    """First scan: max utility; second: max tie value; third: lowest mask."""
    best_u = max(util[m] for m in range(size))
    cands = [m for m in range(size) if util[m] == best_u]
    best_t = max(tie[m] for m in cands)
    return min(m for m in cands if tie[m] == best_t)

def brute_best_response(ftab, ctab, alpha):
    size = len(ftab)
    util = [alpha * ftab[m] - ctab[m] for m in range(size)]
    return brute_argmax(util, ftab, size)


def brute_demand(ftab, prices):
    n = len(prices)
    size = 1 << n
    psum = [sum(prices[i] for i in range(n) if m >> i & 1) for m in range(size)]
    util = [ftab[m] - psum[m] for m in range(size)]
    return brute_argmax(util, ftab, size)


def brute_supply(ctab, prices):
    n = len(prices)
    size = 1 << n
    psum = [sum(prices[i] for i in range(n) if m >> i & 1) for m in range(size)]
    util = [psum[m] - ctab[m] for m in range(size)]
    # ties favor the higher cost (mirror of higher f), then lowest mask
    return brute_argmax(util, ctab, size)


def brute_breakpoints(ftab, ctab):
    """Independent enumeration: evaluate the best response just above every
    candidate slope and collect the distinct responses in alpha order.

    Uses exact rational midpoints, so only valid on rational tables.
    """
    size = len(ftab)
    slopes = {Fraction(0)}
    for a in range(size):
        for b in range(size):
            if ftab[b] > ftab[a]:
                s = Fraction(ctab[b] - ctab[a], ftab[b] - ftab[a])
                if 0 <= s < 1:
                    slopes.add(s)
    probes = sorted(slopes)
    out = []
    for lo, hi in zip(probes, probes[1:] + [Fraction(1)]):
        mid = (lo + hi) / 2
        m = brute_best_response(ftab, ctab, mid)
        if not out or out[-1][1] != m:
            # critical value of m is the largest slope <= mid where it starts
            out.append((lo, m))
    return out


def brute_submodular(tab, n, strict=False):
    for s in range(1 << n):
        for t in range(1 << n):
            if s & ~t:
                continue  # need s subset of t
            for i in range(n):
                bit = 1 << i
                if (t | s) & bit:
                    continue
                d = (tab[s | bit] - tab[s]) - (tab[t | bit] - tab[t])
                if s != t and strict and not d > 0:
                    return False
                if not strict and d < 0:
                    return False
    return True


def brute_supermodular(tab, n, strict=False):
    neg = [-v for v in tab]
    return brute_submodular(neg, n, strict=strict)


# --- instance factories ------------------------------------------------------


def instance_from_tables(ftab, ctab, bits=53, f_class="general-monotone",
                         c_class="general-monotone"):
    n = (len(ftab) - 1).bit_length()
    f = SetFunctionOracle(n, table=list(ftab), declared_class=f_class)
    c = SetFunctionOracle(n, table=list(ctab), declared_class=c_class)
    return ContractInstance(n=n, f=f, c=c, ctx=RealContext(bits))


def random_monotone_tables(rng, n, granularity=64):
    """Random monotone rational tables with f(empty)=c(empty)=0 and f
    strictly increasing along supersets often enough to be interesting."""
    size = 1 << n
    ftab = [Fraction(0)] * size
    ctab = [Fraction(0)] * size
    for m in range(1, size):
        low = m & (m - 1)
        f_floor = max(ftab[m & ~(1 << i)] for i in range(n) if m >> i & 1)
        c_floor = max(ctab[m & ~(1 << i)] for i in range(n) if m >> i & 1)
        ftab[m] = f_floor + Fraction(rng.randrange(1, granularity), granularity)
        ctab[m] = c_floor + Fraction(rng.randrange(0, granularity), granularity)
    return ftab, ctab


# --- hypothesis strategies ---------------------------------------------------


@st.composite
def monotone_instance_tables(draw, max_n=4):
    n = draw(st.integers(min_value=1, max_value=max_n))
    size = 1 << n
    f_incr = draw(st.lists(st.integers(1, 40), min_size=size, max_size=size))
    c_incr = draw(st.lists(st.integers(0, 40), min_size=size, max_size=size))
    ftab = [Fraction(0)] * size
    ctab = [Fraction(0)] * size
    for m in range(1, size):
        f_floor = max(ftab[m & ~(1 << i)] for i in range(n) if m >> i & 1)
        c_floor = max(ctab[m & ~(1 << i)] for i in range(n) if m >> i & 1)
        ftab[m] = f_floor + Fraction(f_incr[m], 16)
        ctab[m] = c_floor + Fraction(c_incr[m], 16)
    return n, ftab, ctab


@st.composite
def price_vectors(draw, n):
    raw = draw(st.lists(st.integers(-64, 256), min_size=n, max_size=n))
    return tuple(Fraction(v, 16) for v in raw)
