"""Closed-form equal-revenue instances, structure checks, and rounding.

Two families:
  * submodular reward / additive cost: f(S_t) = 1/(1 - alpha_t) with the
    square-root recurrence for alpha_t, costs c_i = 2^(i-1) so c(S_t) = t;
  * additive reward / supermodular cost: f_i = 2^(i-1) so f(S_t) = t, costs
    c_t = c_(t-1) + (t-1)/t held as exact rationals, alpha_t = (t-1)/t.
Every nonempty incentivizable set yields principal utility exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import ActionSet, ContractInstance, SetFunctionOracle
from .reals import DEFAULT_BITS, RealContext
from .solver import Breakpoint, BreakpointTable


class PrecisionError(ValueError):
    pass


class RoundingCollisionError(ValueError):
    pass


class ConstructionIntegrityError(ValueError):
    pass


def default_bits_for(n: int) -> int:
    """Default mantissa width: native floats up to n=10, then >= 30n bits."""
    if n <= 10:
        return DEFAULT_BITS
    return max(256, 30 * n)


def _alpha_recurrence(ctx: RealContext, steps: int):
    """alpha_0 = 0; alpha_(t+1) = alpha_t + (sqrt(4 a^2 - 8 a + 5) - 1) / 2."""
    alphas = [ctx.make(0)]
    a = alphas[0]
    with ctx.workprec():
        for _ in range(steps):
            a = a + (ctx.sqrt(4 * a * a - 8 * a + 5) - 1) / 2
            alphas.append(a)
    return alphas


def _chain_breakpoint_table(inst, alphas, f_chain, c_chain, masks):
    bps = []
    with inst.ctx.workprec():
        for pos, (a, fv, cv, m) in enumerate(zip(alphas, f_chain, c_chain, masks)):
            bps.append(
                Breakpoint(
                    position=pos,
                    alpha=a,
                    aset=ActionSet(inst.n, m),
                    f_value=fv,
                    c_value=cv,
                    agent_utility=a * fv - cv,
                    principal_utility=(1 - a) * fv,
                )
            )
    return BreakpointTable(inst, bps)


def build_equal_revenue_submod_f(n: int, precision_bits: int | None = None) -> ContractInstance:
    """Equal-revenue instance with strictly submodular reward, additive cost.

    f(S_t) = 1/(1 - alpha_t) with f(empty) = 1; c_i = 2^(i-1) so c(S_t) = t.
    """
    if not (1 <= n <= 24):
        raise ValueError("n out of range")
    bits = default_bits_for(n) if precision_bits is None else precision_bits
    ctx = RealContext(bits)
    size = 1 << n
    alphas = _alpha_recurrence(ctx, size - 1)
    with ctx.workprec():
        ftab = [1 / (1 - a) for a in alphas]
        for t in range(size - 1):
            if not alphas[t] < alphas[t + 1]:
                raise PrecisionError(
                    f"adjacent critical values collide at t={t}; "
                    f"need roughly {18 * n + 20} mantissa bits, have {bits}"
                )
        if not alphas[size - 1] < 1:
            raise PrecisionError("critical values exceed 1; increase precision")
    f = SetFunctionOracle(n, table=ftab, declared_class="submodular", name="equal_revenue_reward")
    c = SetFunctionOracle(
        n,
        weights=[1 << (i - 1) for i in range(1, n + 1)],
        declared_class="additive",
        name="binary_weights_cost",
    )
    inst = ContractInstance(n=n, f=f, c=c, ctx=ctx, name=f"equal_revenue_submod_f(n={n})")
    inst.meta["kind"] = "equal_revenue_submod_f"
    inst.meta["alpha_table"] = alphas
    inst.meta["analytic_breakpoints"] = _chain_breakpoint_table(
        inst, alphas, ftab, list(range(size)), list(range(size))
    )
    return inst


def supmod_c_cost_fractions(n: int) -> list[Fraction]:
    """c_0 = 0, c_t = c_(t-1) + (t-1)/t, as exact rationals."""
    size = 1 << n
    ctab = [Fraction(0)]
    for t in range(1, size):
        ctab.append(ctab[-1] + Fraction(t - 1, t))
    return ctab


def build_equal_revenue_supmod_c(n: int) -> ContractInstance:
    """Equal-revenue instance with additive reward, strictly supermodular cost.

    f_i = 2^(i-1) so f(S_t) = t; costs and critical values alpha_t = (t-1)/t
    are exact rationals end to end.
    """
    if not (1 <= n <= 24):
        raise ValueError("n out of range")
    size = 1 << n
    ctab = supmod_c_cost_fractions(n)
    f = SetFunctionOracle(
        n,
        weights=[1 << (i - 1) for i in range(1, n + 1)],
        declared_class="additive",
        name="binary_weights_reward",
    )
    c = SetFunctionOracle(n, table=ctab, declared_class="supermodular", name="equal_revenue_cost")
    inst = ContractInstance(n=n, f=f, c=c, name=f"equal_revenue_supmod_c(n={n})")
    inst.meta["kind"] = "equal_revenue_supmod_c"
    alphas = [Fraction(t - 1, t) for t in range(1, size)]
    inst.meta["alpha_table"] = alphas
    inst.meta["analytic_breakpoints"] = _chain_breakpoint_table(
        inst,
        alphas,
        list(range(1, size)),
        ctab[1:],
        list(range(1, size)),
    )
    return inst


@dataclass
class StructureReport:
    declared_class: str
    strict: bool
    monotonicity_violations: list = field(default_factory=list)
    class_violations: list = field(default_factory=list)
    max_recorded: int = 50

    @property
    def ok(self) -> bool:
        return not self.monotonicity_violations and not self.class_violations


def verify_structure(
    oracle: SetFunctionOracle,
    declared_class: str | None = None,
    strict: bool = False,
    tol=0,
    strict_monotone: bool = False,
) -> StructureReport:
    """Exhaustive monotonicity and structure-class check.

    Sub/supermodularity is checked on all adjacent marginal pairs
    v(i | S) vs v(i | S + j), which is equivalent to the full nested-pair
    quantification.  ``strict`` applies to the class inequality only;
    monotonicity is weak unless ``strict_monotone``.  Report-only:
    violations are listed, nothing raised.
    """
    cls = declared_class or oracle.declared_class
    n = oracle.n
    if n > 12:
        raise ValueError("exhaustive structure check limited to n <= 12")
    tab = oracle.value_table()
    report = StructureReport(declared_class=cls, strict=strict)
    size = 1 << n
    bits = [1 << i for i in range(n)]

    def record(bucket, item):
        if len(bucket) < report.max_recorded:
            bucket.append(item)

    for m in range(size):
        for i in range(n):
            bi = bits[i]
            if m & bi:
                continue
            marg_i = tab[m | bi] - tab[m]
            if (marg_i <= tol) if strict_monotone else (marg_i < -tol):
                record(report.monotonicity_violations, (m, i + 1, marg_i))
            if cls == "general-monotone":
                continue
            for j in range(n):
                bj = bits[j]
                if j == i or (m & bj):
                    continue
                marg_ij = tab[m | bj | bi] - tab[m | bj]
                diff = marg_i - marg_ij  # >= 0 iff diminishing marginals
                if cls == "submodular":
                    bad = diff <= tol if strict else diff < -tol
                elif cls == "supermodular":
                    bad = -diff <= tol if strict else -diff < -tol
                elif cls == "additive":
                    bad = diff < -tol or diff > tol
                else:
                    raise ValueError(f"unknown class {cls!r}")
                if bad:
                    record(report.class_violations, (m, i + 1, j + 1, diff))
    return report


@dataclass
class EqualRevenueReport:
    breakpoint_count: int
    expected_count: int
    max_deviation: object
    worst: Breakpoint | None
    tol: object

    @property
    def ok(self) -> bool:
        return self.breakpoint_count == self.expected_count and not (
            self.max_deviation > self.tol
        )


def verify_equal_revenue(inst: ContractInstance, tol, table=None) -> EqualRevenueReport:
    """Check that every nonempty incentivized set yields principal utility 1."""
    from .solver import enumerate_breakpoints

    if table is None:
        table = enumerate_breakpoints(inst)
    nonempty = [b for b in table if b.aset.mask != 0]
    worst = None
    max_dev = 0
    with inst.ctx.workprec():
        for b in nonempty:
            dev = b.principal_utility - 1
            if dev < 0:
                dev = -dev
            if dev > max_dev:
                max_dev = dev
                worst = b
    return EqualRevenueReport(
        breakpoint_count=len(nonempty),
        expected_count=inst.size - 1,
        max_deviation=max_dev,
        worst=worst,
        tol=tol,
    )


def default_grid_bits(n: int) -> int:
    """Grid exponent kappa = max(18n + 20, 20n)."""
    return max(18 * n + 20, 20 * n)


@dataclass
class RoundedInstance:
    n: int
    grid_bits: int
    instance: ContractInstance
    alpha_exact: list
    alpha_rounded: list
    f_rounded: list
    betas: list

    @property
    def revenue_tolerance(self):
        """1 +- tol bound on (1 - beta_t) * f_t for the rounded instance."""
        return self.instance.ctx.make(Fraction(1, 1 << (self.grid_bits - 6 * self.n - 1)))


def build_rounded(n: int, grid_bits: int | None = None) -> RoundedInstance:
    """Round each critical value down to a 2^-kappa grid and rebuild rewards.

    f_t = 1/(1 - rounded alpha_t); the resulting instance has distinct
    breakpoints beta_t and principal revenues within 1 +- 2^(6n+1-kappa).
    """
    kappa = default_grid_bits(n) if grid_bits is None else int(grid_bits)
    if kappa < 18 * n + 20:
        raise ValueError(f"grid exponent must be >= {18 * n + 20}")
    bits = max(kappa + 10 * n, 64)
    ctx = RealContext(bits)
    size = 1 << n
    alphas = _alpha_recurrence(ctx, size - 1)
    with ctx.workprec():
        rounded = [ctx.floor_to_grid(a, kappa) for a in alphas]
        for t in range(size - 1):
            if not rounded[t] < rounded[t + 1]:
                raise RoundingCollisionError(
                    f"rounded critical values collide at t={t}; increase kappa"
                )
        ftab = [1 / (1 - a) for a in rounded]
        betas = [ctx.make(0)]
        for t in range(1, size):
            betas.append(1 / (ftab[t] - ftab[t - 1]))
    f = SetFunctionOracle(n, table=ftab, declared_class="submodular", name="rounded_reward")
    c = SetFunctionOracle(
        n,
        weights=[1 << (i - 1) for i in range(1, n + 1)],
        declared_class="additive",
        name="binary_weights_cost",
    )
    inst = ContractInstance(n=n, f=f, c=c, ctx=ctx, name=f"rounded(n={n}, kappa={kappa})")
    inst.meta["kind"] = "rounded"
    inst.meta["grid_bits"] = kappa
    inst.meta["analytic_breakpoints"] = _chain_breakpoint_table(
        inst, betas, ftab, list(range(size)), list(range(size))
    )
    return RoundedInstance(
        n=n,
        grid_bits=kappa,
        instance=inst,
        alpha_exact=alphas,
        alpha_rounded=rounded,
        f_rounded=ftab,
        betas=betas,
    )


@dataclass
class GapBoundReport:
    n: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def check_gap_bounds(n: int, precision_bits: int | None = None) -> GapBoundReport:
    """Numeric bounds on the square-root recurrence, for t = 1..2^n - 1:

    (1 - a_t)^3 < a_(t+1) - a_t < (1 - a_t)^(3/2),
    1 - a_t >= 2^-6n, and a_(t+1) - a_t >= 2^-18n.
    """
    bits = precision_bits or max(default_bits_for(n), 19 * n + 30)
    ctx = RealContext(bits)
    size = 1 << n
    alphas = _alpha_recurrence(ctx, size)  # one extra step for the last gap
    violations = []
    with ctx.workprec():
        dist_floor = ctx.make(Fraction(1, 1 << (6 * n)))
        gap_floor = ctx.make(Fraction(1, 1 << (18 * n)))
        for t in range(1, size):
            rem = 1 - alphas[t]
            gap = alphas[t + 1] - alphas[t]
            if not rem * rem * rem < gap:
                violations.append((t, "cube lower bound"))
            if not gap < rem * ctx.sqrt(rem):
                violations.append((t, "3/2-power upper bound"))
            if not rem >= dist_floor:
                violations.append((t, "distance-from-1 floor"))
            if not gap >= gap_floor:
                violations.append((t, "gap floor"))
    return GapBoundReport(n=n, violations=violations)
