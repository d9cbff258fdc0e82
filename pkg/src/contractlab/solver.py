"""Agent utility, breakpoint enumeration, exact optimum, and the FPTAS.

A breakpoint (critical value) is the minimal contract alpha incentivizing a
given set.  The optimal linear contract always sits on a breakpoint, so the
exact solver enumerates the breakpoint table and scans it for the maximal
principal utility (1 - alpha) * f(S).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import ActionSet, ContractInstance, _argmax_with_tie_break


class ParameterError(ValueError):
    pass


class BracketUndefinedError(ValueError):
    pass


def agent_utility(inst: ContractInstance, alpha, s: ActionSet):
    """u_a(alpha, S) = alpha * f(S) - c(S)."""
    with inst.ctx.workprec():
        return alpha * inst.f.eval_mask(s.mask) - inst.c.eval_mask(s.mask)


def principal_utility(inst: ContractInstance, alpha, s: ActionSet):
    """u_p(alpha, S) = (1 - alpha) * f(S)."""
    with inst.ctx.workprec():
        return (1 - alpha) * inst.f.eval_mask(s.mask)


@dataclass(frozen=True)
class Breakpoint:
    position: int
    alpha: object
    aset: ActionSet
    f_value: object
    c_value: object
    agent_utility: object
    principal_utility: object


@dataclass
class BreakpointTable:
    instance: ContractInstance
    breakpoints: list[Breakpoint] = field(default_factory=list)

    def __len__(self):
        return len(self.breakpoints)

    def __iter__(self):
        return iter(self.breakpoints)

    def __getitem__(self, i):
        return self.breakpoints[i]

    def alphas(self):
        return [b.alpha for b in self.breakpoints]

    def csv_rows(self):
        """Rows t, alpha, set_mask, f, c, agent_utility, principal_utility."""
        header = ("t", "alpha", "set_mask", "f", "c", "agent_utility", "principal_utility")
        rows = [header]
        for b in self.breakpoints:
            rows.append(
                (
                    b.position,
                    repr(b.alpha),
                    b.aset.mask,
                    repr(b.f_value),
                    repr(b.c_value),
                    repr(b.agent_utility),
                    repr(b.principal_utility),
                )
            )
        return rows


def _make_breakpoint(inst, position, alpha, mask, ftab, ctab) -> Breakpoint:
    fv = ftab[mask]
    cv = ctab[mask]
    return Breakpoint(
        position=position,
        alpha=alpha,
        aset=ActionSet(inst.n, mask),
        f_value=fv,
        c_value=cv,
        agent_utility=alpha * fv - cv,
        principal_utility=(1 - alpha) * fv,
    )


def _initial_mask(ftab, ctab, size) -> int:
    """Best response at alpha = 0: minimal cost, ties to higher f, lower index."""
    util = [-cv for cv in ctab]
    return _argmax_with_tie_break(util, ftab, size)


def _enumerate_scan(inst, ftab, ctab, zero, one):
    size = inst.size
    cur = _initial_mask(ftab, ctab, size)
    bps = [_make_breakpoint(inst, 0, zero, cur, ftab, ctab)]
    while True:
        fc = ftab[cur]
        cc = ctab[cur]
        best_alpha = None
        best_mask = -1
        best_f = None
        for m in range(size):
            fm = ftab[m]
            if fm > fc:
                a = (ctab[m] - cc) / (fm - fc)
                if best_alpha is None or a < best_alpha or (a == best_alpha and fm > best_f):
                    best_alpha = a
                    best_mask = m
                    best_f = fm
        if best_alpha is None or best_alpha >= one:
            break
        cur = best_mask
        bps.append(_make_breakpoint(inst, len(bps), best_alpha, cur, ftab, ctab))
    return bps


def _enumerate_hull(inst, ftab, ctab, zero, one):
    """Lower convex hull of the (f, c) cloud; slopes are the critical values.

    Equivalent to the stepwise scan (property-tested), but O(n 2^n).
    """
    size = inst.size
    order = sorted(range(size), key=lambda m: (ftab[m], ctab[m], m))
    hull: list[int] = []
    for m in order:
        if hull and ftab[hull[-1]] == ftab[m]:
            continue  # same f, weakly larger c: never preferred
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # pop b if it is on or above segment a-m (collinear middles drop:
            # the higher-f tie-break skips them)
            lhs = (ftab[b] - ftab[a]) * (ctab[m] - ctab[a])
            rhs = (ftab[m] - ftab[a]) * (ctab[b] - ctab[a])
            if lhs <= rhs:
                hull.pop()
            else:
                break
        hull.append(m)
    # start from the alpha=0 best response, drop hull vertices before it
    start = _initial_mask(ftab, ctab, size)
    k = hull.index(start)
    chain = hull[k:]
    bps = [_make_breakpoint(inst, 0, zero, chain[0], ftab, ctab)]
    for prev, cur in zip(chain, chain[1:]):
        a = (ctab[cur] - ctab[prev]) / (ftab[cur] - ftab[prev])
        if a >= one:
            break
        bps.append(_make_breakpoint(inst, len(bps), a, cur, ftab, ctab))
    return bps


def enumerate_breakpoints(inst: ContractInstance, method: str = "auto") -> BreakpointTable:
    """All critical values of the instance, in increasing order.

    method: "scan" (stepwise next-breakpoint minimum over full 2^n scans),
    "hull" (lower convex hull, same output, faster), or "auto" (analytic
    table if the construction attached one, else "scan").
    """
    if method == "auto":
        analytic = inst.meta.get("analytic_breakpoints")
        if analytic is not None:
            return analytic() if callable(analytic) else analytic
        method = "scan"
    if method not in ("scan", "hull"):
        raise ParameterError(f"unknown enumeration method {method!r}")
    with inst.ctx.workprec():
        ftab = inst.f.value_table()
        ctab = inst.c.value_table()
        # int 0/1 stay exact under float, mpf, and Fraction tables alike
        zero = 0
        one = 1
        if method == "scan":
            bps = _enumerate_scan(inst, ftab, ctab, zero, one)
        else:
            bps = _enumerate_hull(inst, ftab, ctab, zero, one)
    table = BreakpointTable(inst, bps)
    _check_table_invariants(table)
    return table


def _check_table_invariants(table: BreakpointTable) -> None:
    bps = table.breakpoints
    if not bps:
        raise AssertionError("breakpoint table cannot be empty")
    if not bps[0].alpha == 0:
        raise AssertionError("first breakpoint must have alpha = 0")
    if len(bps) > table.instance.size:
        raise AssertionError("more breakpoints than subsets")
    for a, b in zip(bps, bps[1:]):
        if not (a.alpha < b.alpha and a.f_value < b.f_value and a.c_value < b.c_value):
            raise AssertionError("alpha, f, c must be strictly increasing along the table")


@dataclass
class ContractSolution:
    alpha_star: object
    set_star: ActionSet
    principal_utility: object
    all_maximizers: list[Breakpoint]
    table: BreakpointTable


def optimal_contract(
    inst: ContractInstance,
    method: str = "auto",
    table: BreakpointTable | None = None,
) -> ContractSolution:
    """Scan the breakpoint table for max (1 - alpha) * f(S_alpha).

    Canonical answer is the smallest maximizing alpha; all_maximizers lists
    every breakpoint within tolerance tau = 2^(-precision_bits/2) of the max.
    """
    if table is None:
        table = enumerate_breakpoints(inst, method=method)
    with inst.ctx.workprec():
        best = table[0]
        for b in table:
            if b.principal_utility > best.principal_utility:
                best = b
        tau = inst.ctx.maximizer_tolerance
        near = [b for b in table if best.principal_utility - b.principal_utility <= tau]
    return ContractSolution(
        alpha_star=best.alpha,
        set_star=best.aset,
        principal_utility=best.principal_utility,
        all_maximizers=near,
        table=table,
    )


@dataclass
class FptasResult:
    alpha: object
    aset: ActionSet
    principal_utility: object
    value_queries: int
    best_response_queries: int


def fptas(inst: ContractInstance, eps) -> FptasResult:
    """(1 - eps)-approximation using only value and best-response oracles.

    Geometric grid over each singleton-cost bracket; O(n^2 / eps) queries.
    """
    if not (0 < eps < 1):
        raise ParameterError("eps must be in (0, 1)")
    from .core import best_response, subset_from_index, value

    before = (inst.ledger.value_queries, inst.ledger.best_response_queries)
    ledgers = [inst.f.ledger, inst.c.ledger]
    before_oracles = [(l.value_queries) for l in ledgers]

    def val_f(s):
        return value(inst.f, s)

    def val_c(s):
        return value(inst.c, s)

    with inst.ctx.workprec():
        one = inst.ctx.make(1)
        # step 1: the f-maximal zero-cost set, via a best response at alpha=0
        best_set = best_response(inst, inst.ctx.make(0))
        best_alpha = inst.ctx.make(0)
        best_util = (one - best_alpha) * val_f(best_set)
        # step 2: welfare optimum via a best response at alpha=1
        s_opt = best_response(inst, one)
        opt = val_f(s_opt) - val_c(s_opt)
        if opt > 0:
            k_max = math.ceil(
                math.log(inst.n * (1 << inst.n)) / -math.log(1 - float(eps))
            )
            shrink = one - eps
            for j in range(1, inst.n + 1):
                cj = val_c(subset_from_index(inst.n, 1 << (j - 1)))
                if not cj > 0:
                    continue
                scale = opt / (cj + opt)
                # k = 0 first: the optimum can sit exactly on the bracket edge
                factor = one
                for _ in range(k_max + 1):
                    alpha = one - factor * scale
                    s = best_response(inst, alpha)
                    util = (one - alpha) * val_f(s)
                    if util > best_util:
                        best_util = util
                        best_alpha = alpha
                        best_set = s
                    factor = factor * shrink

    vq = (
        inst.ledger.value_queries
        - before[0]
        + sum(l.value_queries - b for l, b in zip(ledgers, before_oracles))
    )
    return FptasResult(
        alpha=best_alpha,
        aset=best_set,
        principal_utility=best_util,
        value_queries=vq,
        best_response_queries=inst.ledger.best_response_queries - before[1],
    )


def alpha_bracket(inst: ContractInstance, opt, j_star_cost):
    """Bracket [alpha_min, alpha_max] containing the optimal contract."""
    if not opt > 0:
        raise BracketUndefinedError("bracket requires positive welfare optimum")
    with inst.ctx.workprec():
        denom = j_star_cost + opt
        alpha_min = 1 - opt / denom
        alpha_max = 1 - opt / (inst.n * (1 << inst.n) * denom)
    return alpha_min, alpha_max
