"""Hidden-optimum families: a reward bonus or cost discount on one set.

Starting from an equal-revenue base, adding a bonus epsilon to f(S_k) (or
discounting c(S_k)) breaks the revenue tie so the breakpoint incentivizing
S_k becomes the unique optimal contract, while every other breakpoint stays
exactly where it was.  The admissible epsilon is the minimum of three
structural margins of the base instance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ContractInstance, SetFunctionOracle
from .constructions import ConstructionIntegrityError

REWARD_BONUS = "reward-bonus"
COST_DISCOUNT = "cost-discount"

_DIRECTION_FOR_KIND = {
    "equal_revenue_submod_f": REWARD_BONUS,
    "equal_revenue_supmod_c": COST_DISCOUNT,
}


class BudgetError(ValueError):
    pass


@dataclass
class PerturbationBudget:
    """Strict upper bound on epsilon, with its three component minima:

    reward-bonus: (strict-submodularity margin of f,
                   min_t (c gap)/alpha_(t-1) - (f gap),
                   min_t f gap);
    cost-discount: (strict-supermodularity margin of c,
                    min_t c gap, min_t (alpha gap) * (f gap)).
    """

    epsilon_max: object
    components: tuple
    direction: str

    def __post_init__(self):
        if not self.epsilon_max > 0:
            raise ConstructionIntegrityError(
                f"perturbation budget must be strictly positive, got {self.epsilon_max}"
            )

    @property
    def default_epsilon(self):
        return self.epsilon_max / 2


def _adjacent_submodularity_margin(tab, n, sense):
    """min over (S, i, j disjoint) of +-(v(i|S) - v(i|S+j)).

    sense +1 measures strict submodularity, -1 strict supermodularity.
    Equals the minimum over all nested pairs S < T: any nested marginal
    difference telescopes into nonnegative adjacent steps.
    """
    best = None
    bits = [1 << i for i in range(n)]
    for m in range(1 << n):
        for i in range(n):
            bi = bits[i]
            if m & bi:
                continue
            marg_i = tab[m | bi] - tab[m]
            for j in range(i + 1, n):
                bj = bits[j]
                if m & bj:
                    continue
                marg_j = tab[m | bj] - tab[m]
                # both orientations of the (i, j) pair
                for d in (
                    marg_i - (tab[m | bj | bi] - tab[m | bj]),
                    marg_j - (tab[m | bi | bj] - tab[m | bi]),
                ):
                    d = sense * d
                    if best is None or d < best:
                        best = d
    return best


def _chain_tables(base: ContractInstance):
    ftab = base.f.value_table()
    ctab = base.c.value_table()
    alphas = base.meta.get("alpha_table")
    if alphas is None:
        raise ValueError("base must be an equal-revenue construction")
    return ftab, ctab, alphas


def epsilon_bound_reward(base: ContractInstance) -> PerturbationBudget:
    """Three-way minimum bounding the reward bonus on the submodular-f base."""
    if base.n > 12:
        raise ValueError("exhaustive bound limited to n <= 12")
    ftab, ctab, alphas = _chain_tables(base)
    size = base.size
    with base.ctx.workprec():
        c1 = _adjacent_submodularity_margin(ftab, base.n, +1)
        # alpha_table entry t is the critical value of S_t (alpha_0 = 0)
        c2 = min(
            (ctab[t] - ctab[t - 1]) / alphas[t - 1] - (ftab[t] - ftab[t - 1])
            for t in range(2, size)
        )
        c3 = min(ftab[t] - ftab[t - 1] for t in range(1, size))
        bound = min(c1, c2, c3)
    return PerturbationBudget(epsilon_max=bound, components=(c1, c2, c3), direction=REWARD_BONUS)


def epsilon_bound_cost(base: ContractInstance) -> PerturbationBudget:
    """Three-way minimum bounding the cost discount on the supermodular-c base."""
    if base.n > 12:
        raise ValueError("exhaustive bound limited to n <= 12")
    ftab, ctab, alphas = _chain_tables(base)
    size = base.size
    with base.ctx.workprec():
        c1 = _adjacent_submodularity_margin(ctab, base.n, -1)
        c2 = min(ctab[t] - ctab[t - 1] for t in range(2, size))
        # alpha_table entry t-1 is the critical value of S_t here
        c3 = min(
            (alphas[t - 1] - alphas[t - 2]) * (ftab[t] - ftab[t - 1])
            for t in range(2, size)
        )
        bound = min(c1, c2, c3)
    return PerturbationBudget(epsilon_max=bound, components=(c1, c2, c3), direction=COST_DISCOUNT)


def epsilon_bound(base: ContractInstance) -> PerturbationBudget:
    direction = _DIRECTION_FOR_KIND.get(base.meta.get("kind"))
    if direction == REWARD_BONUS:
        return epsilon_bound_reward(base)
    if direction == COST_DISCOUNT:
        return epsilon_bound_cost(base)
    raise ValueError("base is not a recognized equal-revenue construction")


@dataclass
class PerturbedInstance:
    base: ContractInstance
    k: int
    epsilon: object
    direction: str
    instance: ContractInstance


def valid_k_range(base: ContractInstance, direction: str) -> range:
    """Cost discounts skip k=1: c(S_1) = 0 there, and a discount would
    break nonnegativity."""
    lo = 2 if direction == COST_DISCOUNT else 1
    return range(lo, base.size)


def make_perturbed(base: ContractInstance, k: int, epsilon) -> PerturbedInstance:
    """Bonus f(S_k) += eps (submod-f base) or discount c(S_k) -= eps
    (supmod-c base)."""
    direction = _DIRECTION_FOR_KIND.get(base.meta.get("kind"))
    if direction is None:
        raise ValueError("base is not a recognized equal-revenue construction")
    if k not in valid_k_range(base, direction):
        raise BudgetError(f"k={k} outside valid range for {direction}")
    budget = epsilon_bound(base)
    if not (0 < epsilon < budget.epsilon_max):
        raise BudgetError(f"epsilon {epsilon} outside (0, {budget.epsilon_max})")
    with base.ctx.workprec():
        if direction == REWARD_BONUS:
            tab = list(base.f.value_table())
            tab[k] = tab[k] + epsilon
            f = SetFunctionOracle(
                base.n, table=tab, declared_class="submodular", name=f"{base.f.name}+bonus"
            )
            c = base.c
        else:
            tab = list(base.c.value_table())
            tab[k] = tab[k] - epsilon
            c = SetFunctionOracle(
                base.n, table=tab, declared_class="supermodular", name=f"{base.c.name}-discount"
            )
            f = base.f
    inst = ContractInstance(
        n=base.n, f=f, c=c, ctx=base.ctx, name=f"{base.name} perturbed(k={k})"
    )
    inst.meta["kind"] = "perturbed"
    inst.meta["base_kind"] = base.meta.get("kind")
    inst.meta["k"] = k
    inst.meta["epsilon"] = epsilon
    inst.meta["direction"] = direction
    return PerturbedInstance(base=base, k=k, epsilon=epsilon, direction=direction, instance=inst)


def family_iterator(base: ContractInstance, epsilon=None):
    """All single-set perturbations of the base, in increasing k."""
    direction = _DIRECTION_FOR_KIND.get(base.meta.get("kind"))
    if direction is None:
        raise ValueError("base is not a recognized equal-revenue construction")
    if epsilon is None:
        epsilon = epsilon_bound(base).default_epsilon
    for k in valid_k_range(base, direction):
        yield make_perturbed(base, k, epsilon)
