"""Approximate argmax sets, ambiguity intervals, and demand-oracle simulation.

D^sigma(p) collects every set within sigma of the maximal quasi-linear
utility f(S) - p(S).  For the equal-revenue reward function and small enough
sigma, this collection stays O(n^2)-sized at every price vector, which is
what lets a handful of value queries simulate a demand query.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .core import ActionSet, SetFunctionOracle, price_sums
from .reals import RealContext


class InvariantError(AssertionError):
    pass


def sparseness_ceiling(n: int) -> int:
    """2(n+1)(n+2): the proved cap on |D^sigma(p)| for valid sigma."""
    return 2 * (n + 1) * (n + 2)


@dataclass
class ApproxArgmaxSet:
    kind: str  # "demand" | "supply" | "best-response"
    parameter: object
    sigma: object
    members: list[ActionSet]
    max_value: object

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def masks(self):
        return [m.mask for m in self.members]


def _approx_argmax(kind, parameter, util, n, sigma, ctx):
    with ctx.workprec():
        best = max(util)
        cut = best - sigma
        members = [ActionSet(n, m) for m in range(1 << n) if util[m] >= cut]
    return ApproxArgmaxSet(
        kind=kind, parameter=parameter, sigma=sigma, members=members, max_value=best
    )


def approx_demand(f: SetFunctionOracle, prices, sigma, ctx=None) -> ApproxArgmaxSet:
    """All S with f(S) - p(S) >= max - sigma, by full enumeration."""
    ctx = ctx or RealContext()
    n = f.n
    with ctx.workprec():
        psum = price_sums(prices, n)
        ftab = f.value_table()
        util = [ftab[m] - psum[m] for m in range(1 << n)]
    return _approx_argmax("demand", tuple(prices), util, n, sigma, ctx)


def approx_supply(c: SetFunctionOracle, prices, sigma, ctx=None) -> ApproxArgmaxSet:
    """All S with p(S) - c(S) >= max - sigma."""
    ctx = ctx or RealContext()
    n = c.n
    with ctx.workprec():
        psum = price_sums(prices, n)
        ctab = c.value_table()
        util = [psum[m] - ctab[m] for m in range(1 << n)]
    return _approx_argmax("supply", tuple(prices), util, n, sigma, ctx)


def approx_best_response(inst, alpha, sigma) -> ApproxArgmaxSet:
    """All S with alpha f(S) - c(S) >= max - sigma."""
    with inst.ctx.workprec():
        ftab = inst.f.value_table()
        ctab = inst.c.value_table()
        util = [alpha * ftab[m] - ctab[m] for m in range(inst.size)]
    return _approx_argmax("best-response", alpha, util, inst.n, sigma, inst.ctx)


@dataclass
class SigmaBound:
    """Strict supremum on admissible sigma plus the default (half of it)."""

    bound: object
    sigma: object
    argmin_pair: tuple


def sigma_bound_demand(base) -> SigmaBound:
    """sigma < min over l < h of (1/alpha_l - 1/alpha_h) / 2.

    1/alpha is strictly decreasing in the breakpoint index, so the pairwise
    minimum is realized at an adjacent pair (property-tested against the
    full quadratic scan).
    """
    alphas = base.meta.get("alpha_table")
    if alphas is None:
        raise ValueError("base must be an equal-revenue construction")
    with base.ctx.workprec():
        best = None
        pair = None
        for l in range(1, len(alphas) - 1):
            if not alphas[l] > 0:
                continue
            v = (1 / alphas[l] - 1 / alphas[l + 1]) / 2
            if best is None or v < best:
                best = v
                pair = (l, l + 1)
        return SigmaBound(bound=best, sigma=best / 2, argmin_pair=pair)


def sigma_bound_supply(base) -> SigmaBound:
    """Mirror bound sigma < min over l < h of (alpha_h - alpha_l) / 2."""
    alphas = base.meta.get("alpha_table")
    if alphas is None:
        raise ValueError("base must be an equal-revenue construction")
    with base.ctx.workprec():
        best = None
        pair = None
        for l in range(len(alphas) - 1):
            v = (alphas[l + 1] - alphas[l]) / 2
            if best is None or v < best:
                best = v
                pair = (l, l + 1)
        return SigmaBound(bound=best, sigma=best / 2, argmin_pair=pair)


@dataclass
class AmbiguityInterval:
    action: int
    r: int
    l: int


def ambiguity_intervals(approx: ApproxArgmaxSet, n: int) -> list[AmbiguityInterval]:
    """Per action i: r_i = max member index containing i (0 if none),
    l_i = max(r_i - 2^i, 0).  Validates the forced-membership invariant:
    members above r_i exclude i, members below l_i include i.
    """
    intervals = []
    masks = [m.mask for m in approx.members]
    for i in range(1, n + 1):
        bit = 1 << (i - 1)
        containing = [t for t in masks if t & bit]
        r = max(containing) if containing else 0
        l = max(r - (1 << i), 0)
        intervals.append(AmbiguityInterval(action=i, r=r, l=l))
    for iv in intervals:
        bit = 1 << (iv.action - 1)
        for t in masks:
            if t > iv.r and (t & bit):
                raise InvariantError(
                    f"member {t} above r_{iv.action}={iv.r} contains action {iv.action}"
                )
            if t < iv.l and not (t & bit):
                raise InvariantError(
                    f"member {t} below l_{iv.action}={iv.l} misses action {iv.action}"
                )
    return intervals


def minimal_ambiguous_census(approx: ApproxArgmaxSet, n: int) -> dict[int, int]:
    """Count members by their minimal ambiguous action
    m(S_t) = min {i : l_i <= t <= r_i}, with n+1 when no interval covers t.

    Asserts the per-bucket caps: 4 i* for i* <= n, and n+1 for the overflow
    bucket.
    """
    intervals = ambiguity_intervals(approx, n)
    census = {i: 0 for i in range(1, n + 2)}
    for m in approx.members:
        t = m.mask
        star = n + 1
        for iv in intervals:
            if iv.l <= t <= iv.r:
                star = iv.action
                break
        census[star] += 1
    for i, cnt in census.items():
        cap = 4 * i if i <= n else n + 1
        if cnt > cap:
            raise InvariantError(f"census bucket {i} holds {cnt} > cap {cap}")
    return census


def simulate_demand_by_values(base_f, hidden_f, prices, eps, ctx=None):
    """Answer a demand query on hidden_f using only value queries.

    base_f is public (computations on it are free); hidden_f agrees with it
    except for a bonus of at most eps on one set, so the true demand lies in
    D^eps(prices) of base_f.  Queries hidden_f only on those members.
    Returns (chosen set, value queries used).
    """
    from .core import value

    ctx = ctx or RealContext()
    candidates = approx_demand(base_f, prices, eps, ctx)
    n = base_f.n
    with ctx.workprec():
        psum = price_sums(prices, n)
        best = None
        best_util = None
        best_f = None
        for s in sorted(candidates.members, key=lambda a: a.mask):
            fv = value(hidden_f, s)
            u = fv - psum[s.mask]
            if best is None or u > best_util or (u == best_util and fv > best_f):
                best, best_util, best_f = s, u, fv
    return best, len(candidates.members)


def simulate_supply_by_values(base_c, hidden_c, prices, eps, ctx=None):
    """Mirror of simulate_demand_by_values for p(S) - c(S) and a discount."""
    from .core import value

    ctx = ctx or RealContext()
    candidates = approx_supply(base_c, prices, eps, ctx)
    n = base_c.n
    with ctx.workprec():
        psum = price_sums(prices, n)
        best = None
        best_util = None
        best_c = None
        for s in sorted(candidates.members, key=lambda a: a.mask):
            cv = value(hidden_c, s)
            u = psum[s.mask] - cv
            if best is None or u > best_util or (u == best_util and cv > best_c):
                best, best_util, best_c = s, u, cv
    return best, len(candidates.members)


def random_prices(n: int, rng, snap_to=None):
    """p_i = 2^u with u uniform on [-n, n]; or breakpoint prices c_i/alpha
    when snap_to = (cost_weights, alpha)."""
    if snap_to is not None:
        weights, alpha = snap_to
        return tuple(w / alpha for w in weights)
    return tuple(2.0 ** rng.uniform(-n, n) for _ in range(n))


@dataclass
class ExperimentStats:
    n: int
    trials: int
    strategy: str
    seed: int | None
    mean_queries: float
    stderr: float
    exact_expectation: float
    lower_bound: float
    identified_all: bool
    per_trial: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.identified_all
            and self.mean_queries >= self.lower_bound
            and abs(self.mean_queries - self.exact_expectation) <= 3 * self.stderr + 1e-12
        )

    def as_dict(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "strategy": self.strategy,
            "seed": self.seed,
            "mean_queries": self.mean_queries,
            "stderr": self.stderr,
            "exact_expectation": self.exact_expectation,
            "lower_bound": self.lower_bound,
            "identified_all": self.identified_all,
            "ok": self.ok,
        }


def value_query_experiment(
    base,
    trials: int,
    seed: int | None = 0,
    strategy: str = "scan",
    epsilon=None,
    keep_trials: bool = False,
) -> ExperimentStats:
    """Locate a hidden reward bonus by value queries against the public base.

    The hidden index k is uniform on [1, 2^n - 1].  The "scan" strategy
    queries sets in fixed increasing order and stops at the first deviation
    from the base table, so its query count is k's scan position; the exact
    expectation is 2^(n-1) and the proved floor is 2^(n-2).  The "never"
    strategy makes no queries and cannot identify k.
    """
    import random

    from .perturb import epsilon_bound_reward

    if strategy not in ("scan", "never"):
        raise ValueError(f"unknown strategy {strategy!r}")
    n = base.n
    size = 1 << n
    if epsilon is None:
        epsilon = epsilon_bound_reward(base).default_epsilon
    ftab = base.f.value_table()
    rng = random.Random(seed)
    counts = []
    identified_all = True
    with base.ctx.workprec():
        for _ in range(trials):
            k = rng.randrange(1, size)
            if strategy == "never":
                counts.append(0)
                identified_all = False
                continue
            queries = 0
            found = None
            for t in range(1, size):
                queries += 1
                hidden_value = ftab[t] + (epsilon if t == k else 0)
                if hidden_value != ftab[t]:
                    found = t
                    break
            counts.append(queries)
            if found != k:
                identified_all = False
    mean = statistics.fmean(counts)
    stderr = (statistics.stdev(counts) / len(counts) ** 0.5) if len(counts) > 1 else 0.0
    return ExperimentStats(
        n=n,
        trials=trials,
        strategy=strategy,
        seed=seed,
        mean_queries=mean,
        stderr=stderr,
        exact_expectation=float(size / 2),
        lower_bound=float(size // 4),
        identified_all=identified_all,
        per_trial=counts if keep_trials else [],
    )
