"""Set functions, the subset/integer bijection, oracles, and query accounting.

An action set over ground set [n] = {1, ..., n} is identified with the
integer t = sum of 2^(i-1) over actions i in the set, which is exactly the
bitmask with bit i-1 set.  Mask and index are therefore one and the same int.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .reals import RealContext

MAX_N = 24

TIE_BREAK_RULE = "higher_f_then_lower_index"


class DegenerateContractError(ValueError):
    pass


@dataclass(frozen=True)
class ActionSet:
    """A subset of [n], carried as a bitmask (== its subset index)."""

    n: int
    mask: int

    def __post_init__(self):
        if not (1 <= self.n <= MAX_N):
            raise ValueError(f"ground-set size must be in [1, {MAX_N}], got {self.n}")
        if not (0 <= self.mask < (1 << self.n)):
            raise ValueError(f"index {self.mask} out of range for n={self.n}")

    @property
    def index(self) -> int:
        return self.mask

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def members(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if (self.mask >> i) & 1)

    def __contains__(self, action: int) -> bool:
        return 1 <= action <= self.n and bool((self.mask >> (action - 1)) & 1)

    def with_action(self, action: int) -> "ActionSet":
        return ActionSet(self.n, self.mask | (1 << (action - 1)))

    def without_action(self, action: int) -> "ActionSet":
        return ActionSet(self.n, self.mask & ~(1 << (action - 1)))

    @classmethod
    def from_members(cls, n: int, members) -> "ActionSet":
        mask = 0
        for i in members:
            if not (1 <= i <= n):
                raise ValueError(f"action {i} outside ground set [1, {n}]")
            mask |= 1 << (i - 1)
        return cls(n, mask)

    def __repr__(self):
        return "{" + ",".join(map(str, self.members())) + "}"


def subset_from_index(n: int, t: int) -> ActionSet:
    """The subset of [n] whose characteristic vector encodes the integer t."""
    return ActionSet(n, t)


@dataclass
class QueryLedger:
    """Monotone counters for the four oracle kinds."""

    value_queries: int = 0
    demand_queries: int = 0
    supply_queries: int = 0
    best_response_queries: int = 0
    log: list | None = None

    def count(self, kind: str, argument=None) -> None:
        setattr(self, kind, getattr(self, kind) + 1)
        if self.log is not None:
            self.log.append((kind, argument))

    def reset(self) -> None:
        self.value_queries = 0
        self.demand_queries = 0
        self.supply_queries = 0
        self.best_response_queries = 0
        if self.log is not None:
            self.log.clear()

    def total(self) -> int:
        return (
            self.value_queries
            + self.demand_queries
            + self.supply_queries
            + self.best_response_queries
        )


DECLARED_CLASSES = ("additive", "submodular", "supermodular", "general-monotone")

# Above this size, full 2^n tables are not materialized for additive oracles.
_TABLE_LIMIT_N = 20


class SetFunctionOracle:
    """A value-queryable set function with a declared structure class.

    The evaluator is pure; query instrumentation lives in the attached ledger.
    Exactly one of ``table``, ``weights``, ``evaluator`` must be given:
      table      -- list of 2^n values indexed by subset index,
      weights    -- per-action values of an additive function (w[i-1] for i),
      evaluator  -- arbitrary pure function mask -> scalar.
    """

    def __init__(
        self,
        n: int,
        *,
        table=None,
        weights=None,
        evaluator=None,
        declared_class: str = "general-monotone",
        name: str = "",
        ledger: QueryLedger | None = None,
    ):
        if not (1 <= n <= MAX_N):
            raise ValueError(f"ground-set size must be in [1, {MAX_N}], got {n}")
        if declared_class not in DECLARED_CLASSES:
            raise ValueError(f"unknown declared_class {declared_class!r}")
        if sum(x is not None for x in (table, weights, evaluator)) != 1:
            raise ValueError("exactly one of table, weights, evaluator required")
        self.n = n
        self.declared_class = declared_class
        self.name = name
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.weights = list(weights) if weights is not None else None
        if table is not None:
            table = list(table)
            if len(table) != 1 << n:
                raise ValueError("table must list all 2^n subset values")
            self.table = table
            self._evaluator = None
        elif weights is not None:
            if len(self.weights) != n:
                raise ValueError("weights must have one entry per action")
            if n <= _TABLE_LIMIT_N:
                self.table = additive_table(self.weights)
            else:
                self.table = None
            self._evaluator = self._additive_eval
        else:
            self.table = None
            self._evaluator = evaluator

    def _additive_eval(self, mask: int):
        total = 0
        w = self.weights
        i = 0
        while mask:
            if mask & 1:
                total = total + w[i]
            mask >>= 1
            i += 1
        return total

    def eval_mask(self, mask: int):
        """Uninstrumented evaluation (for solver internals)."""
        if self.table is not None:
            return self.table[mask]
        return self._evaluator(mask)

    def value_table(self):
        """Full 2^n table (materializing it if necessary)."""
        if self.table is not None:
            return self.table
        return [self._evaluator(m) for m in range(1 << self.n)]

    @property
    def normalized(self) -> bool:
        """Whether the empty set's value is recorded as exactly zero."""
        return self.eval_mask(0) == 0


def additive_table(weights) -> list:
    """Subset-sum table over all masks, via one addition per entry."""
    n = len(weights)
    table = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        table[mask] = table[mask ^ low] + weights[low.bit_length() - 1]
    return table


def value(oracle: SetFunctionOracle, s: ActionSet):
    """Instrumented value query."""
    if s.n != oracle.n:
        raise ValueError("action set over a different ground set")
    oracle.ledger.count("value_queries", s.mask)
    return oracle.eval_mask(s.mask)


def price_sums(prices, n: int) -> list:
    """Sum of prices over each subset mask."""
    if len(prices) != n:
        raise ValueError("need one price per action")
    return additive_table(list(prices))


def _argmax_with_tie_break(objective, tie_value, size: int) -> int:
    """Max objective; ties favor larger tie_value, then smaller mask.

    Both arguments are indexable by mask.  Scanning masks in ascending order
    makes "first seen wins" implement the lower-index rule.
    """
    best = 0
    best_obj = objective[0]
    best_tie = tie_value[0]
    for mask in range(1, size):
        obj = objective[mask]
        if obj > best_obj or (obj == best_obj and tie_value[mask] > best_tie):
            best = mask
            best_obj = obj
            best_tie = tie_value[mask]
    return best


def demand(f: SetFunctionOracle, prices, ctx: RealContext | None = None) -> ActionSet:
    """Set maximizing f(S) - p(S); ties to higher f, then lower index."""
    n = f.n
    with (ctx or RealContext()).workprec():
        psum = price_sums(prices, n)
        ftab = f.value_table()
        util = [ftab[m] - psum[m] for m in range(1 << n)]
        best = _argmax_with_tie_break(util, ftab, 1 << n)
    f.ledger.count("demand_queries", tuple(prices))
    return ActionSet(n, best)


def supply(c: SetFunctionOracle, prices, ctx: RealContext | None = None) -> ActionSet:
    """Set maximizing p(S) - c(S); ties to higher c, then lower index."""
    n = c.n
    with (ctx or RealContext()).workprec():
        psum = price_sums(prices, n)
        ctab = c.value_table()
        util = [psum[m] - ctab[m] for m in range(1 << n)]
        best = _argmax_with_tie_break(util, ctab, 1 << n)
    c.ledger.count("supply_queries", tuple(prices))
    return ActionSet(n, best)


@dataclass
class ContractInstance:
    """A principal-agent instance (n, f, c) with tie-break and precision."""

    n: int
    f: SetFunctionOracle
    c: SetFunctionOracle
    tie_break: str = TIE_BREAK_RULE
    ctx: RealContext = field(default_factory=RealContext)
    name: str = ""
    meta: dict = field(default_factory=dict)
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def __post_init__(self):
        if self.f.n != self.n or self.c.n != self.n:
            raise ValueError("oracle ground sets disagree with instance")
        if self.tie_break != TIE_BREAK_RULE:
            raise ValueError(f"unsupported tie_break rule {self.tie_break!r}")

    @property
    def precision_bits(self) -> int:
        return self.ctx.bits

    @property
    def size(self) -> int:
        return 1 << self.n


def best_response(inst: ContractInstance, alpha) -> ActionSet:
    """Agent's utility-maximizing set at contract alpha.

    Ties favor higher f, then lower subset index.
    """
    with inst.ctx.workprec():
        ftab = inst.f.value_table()
        ctab = inst.c.value_table()
        util = [alpha * ftab[m] - ctab[m] for m in range(inst.size)]
        best = _argmax_with_tie_break(util, ftab, inst.size)
    inst.ledger.count("best_response_queries", alpha)
    return ActionSet(inst.n, best)


def demand_prices_for_contract(c: SetFunctionOracle, alpha):
    """Prices p_i = c_i / alpha turning a demand query into a best response."""
    if c.weights is None:
        raise ValueError("requires an additive cost oracle")
    if alpha == 0:
        raise DegenerateContractError("alpha = 0 yields infinite prices")
    return tuple(w / alpha for w in c.weights)


def supply_prices_for_contract(f: SetFunctionOracle, alpha):
    """Prices p_i = alpha * f_i turning a supply query into a best response."""
    if f.weights is None:
        raise ValueError("requires an additive reward oracle")
    return tuple(alpha * w for w in f.weights)
