"""Two-party hardness constructions and a bit-counted protocol simulator.

An (n+1)th action is grafted onto an equal-revenue base whose costs (or
rewards) were perturbed by +-delta |S|^2.  The new action's marginals encode
two indicator vectors x_f (Alice's) and x_c (Bob's) over the size-n/2 sets;
the optimal contract incentivizes action n+1 exactly when x_f and x_c share
a set, which reduces set disjointness to contract optimization.

Three variants: sub-sub (submodular rewards and costs, base with c-delta|S|^2),
sub-sup (submodular rewards, supermodular costs, base with c+delta|S|^2),
sup-sup (both supermodular, additive-reward base with f+delta|S|^2, exact
rational arithmetic throughout).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .core import ActionSet, ContractInstance, SetFunctionOracle
from .constructions import ConstructionIntegrityError
from .reals import RealContext
from .sparse import sigma_bound_demand, sigma_bound_supply

VARIANTS = ("sub-sub", "sub-sup", "sup-sup")

# mantissa bits for the non-exact variants; the z-scale margins sit far
# below double precision, so the bases are built wide
CC_PRECISION_BITS = 192


class ReductionFailureError(AssertionError):
    pass


class ProtocolError(ValueError):
    pass


class BudgetExceededError(ValueError):
    pass


class SpecialSetVector:
    """Indicator bits over the C(n, n/2) subsets of size n/2, in increasing
    subset-index order."""

    def __init__(self, n: int, bits):
        if n % 2:
            raise ValueError("n must be even")
        self.n = n
        self.masks = [m for m in range(1 << n) if m.bit_count() == n // 2]
        bits = list(bits)
        if len(bits) != comb(n, n // 2):
            raise ValueError(f"need {comb(n, n // 2)} bits, got {len(bits)}")
        self.bits = [int(b) for b in bits]
        self._member = {m for m, b in zip(self.masks, self.bits) if b}

    def __contains__(self, mask) -> bool:
        if isinstance(mask, ActionSet):
            mask = mask.mask
        return mask in self._member

    def __len__(self):
        return len(self.bits)

    def intersects(self, other: "SpecialSetVector") -> bool:
        return bool(self._member & other._member)

    @classmethod
    def all_ones(cls, n):
        return cls(n, [1] * comb(n, n // 2))

    @classmethod
    def all_zeros(cls, n):
        return cls(n, [0] * comb(n, n // 2))

    @classmethod
    def singleton(cls, n, mask):
        v = cls.all_zeros(n)
        if mask not in v.masks:
            raise ValueError("mask is not a size-n/2 subset")
        return cls(n, [1 if m == mask else 0 for m in v.masks])

    @classmethod
    def random(cls, n, rng):
        return cls(n, [rng.randrange(2) for _ in range(comb(n, n // 2))])

    @classmethod
    def from_int(cls, n, packed: int):
        """Bit i of packed indicates the i-th size-n/2 subset."""
        k = comb(n, n // 2)
        return cls(n, [(packed >> i) & 1 for i in range(k)])

    def to_int(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))


def disjointness(a, b) -> bool:
    """True iff the two equal-length bit vectors share no 1."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return not any(x and y for x, y in zip(a, b))


@dataclass
class DeltaBudget:
    bound: object
    components: tuple

    def __post_init__(self):
        if not self.bound > 0:
            raise ConstructionIntegrityError("delta bound must be positive")

    @property
    def default_delta(self):
        return self.bound / 2


def _size_sq(mask: int) -> int:
    s = mask.bit_count()
    return s * s


def _chain_slope_terms(ftab, alphas, n):
    """min_t (alpha_(t+1) - alpha_t) (f gap_t)(f gap_(t+1)) / (f span) / n^2,
    over t in [1, 2^n - 2]; alphas[t] is the critical value of S_t."""
    best = None
    for t in range(1, (1 << n) - 1):
        g1 = ftab[t] - ftab[t - 1]
        g2 = ftab[t + 1] - ftab[t]
        v = (alphas[t + 1] - alphas[t]) * g1 * g2 / ((ftab[t + 1] - ftab[t - 1]) * n * n)
        if best is None or v < best:
            best = v
    return best


def delta_bound(base: ContractInstance, variant: str) -> DeltaBudget:
    """Admissible perturbation scale per variant.

    sub-sub: min of phi_c/n^2, alpha_1 f_1/n^2, (1-alpha_max)(last f gap)/n^2,
    and the slope-separation term; sub-sup drops the first two; sup-sup uses
    its own two terms over the additive-reward base.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n = base.n
    size = 1 << n
    ftab = base.f.value_table()
    ctab = base.c.value_table()
    alphas = base.meta.get("alpha_table")
    if alphas is None:
        raise ValueError("base must be an equal-revenue construction")
    with base.ctx.workprec():
        if variant == "sup-sup":
            # alphas[t-1] is the critical value of S_t on this base
            a = {t: alphas[t - 1] for t in range(1, size)}
            phi_f = min(ftab[t] - ftab[t - 1] for t in range(1, size))
            c1 = min(
                phi_f * (a[t + 1] - a[t]) / (n * n) for t in range(1, size - 1)
            )
            c2 = min(
                (1 / a[t] - 1 / a[t + 1])
                * (ctab[t + 1] - ctab[t])
                * (ctab[t] - ctab[t - 1])
                / ((ctab[t + 1] - ctab[t - 1]) * 2 * n * n)
                for t in range(2, size - 1)
            )
            comps = (c1, c2)
        else:
            c3 = (1 - alphas[size - 1]) * (ftab[size - 1] - ftab[size - 2]) / (n * n)
            c4 = _chain_slope_terms(ftab, alphas, n)
            if variant == "sub-sub":
                phi_c = min(ctab[t] - ctab[t - 1] for t in range(1, size))
                c1 = phi_c / (n * n)
                c2 = alphas[1] * ftab[1] / (n * n)
                comps = (c1, c2, c3, c4)
            else:
                comps = (c3, c4)
        return DeltaBudget(bound=min(comps), components=comps)


def build_perturbed_cost(base: ContractInstance, delta, sign: int = -1) -> ContractInstance:
    """c-tilde(S) = c(S) + sign * delta |S|^2 over the base rewards."""
    budget = delta_bound(base, "sub-sub" if sign < 0 else "sub-sup")
    if not (0 < delta < budget.bound):
        raise ValueError(f"delta {delta} outside (0, {budget.bound})")
    with base.ctx.workprec():
        ctab = [cv + sign * delta * _size_sq(m) for m, cv in enumerate(base.c.value_table())]
    cls = "submodular" if sign < 0 else "supermodular"
    c = SetFunctionOracle(base.n, table=ctab, declared_class=cls, name="perturbed_cost")
    inst = ContractInstance(n=base.n, f=base.f, c=c, ctx=base.ctx, name=f"{base.name} c~")
    inst.meta["kind"] = "cc_perturbed_cost"
    inst.meta["delta"] = delta
    return inst


def build_perturbed_reward(base: ContractInstance, delta) -> ContractInstance:
    """f-tilde(S) = f(S) + delta |S|^2 over the base (supermodular) costs."""
    budget = delta_bound(base, "sup-sup")
    if not (0 < delta < budget.bound):
        raise ValueError(f"delta {delta} outside (0, {budget.bound})")
    ftab = [fv + delta * _size_sq(m) for m, fv in enumerate(base.f.value_table())]
    f = SetFunctionOracle(base.n, table=ftab, declared_class="supermodular", name="perturbed_reward")
    inst = ContractInstance(n=base.n, f=f, c=base.c, ctx=base.ctx, name=f"{base.name} f~")
    inst.meta["kind"] = "cc_perturbed_reward"
    inst.meta["delta"] = delta
    return inst


def _submod_margin(tab, n, sense):
    from .perturb import _adjacent_submodularity_margin

    return _adjacent_submodularity_margin(tab, n, sense)


def _alpha_tilde_by_mask(perturbed: ContractInstance):
    """Critical value of each nonempty chain set in the perturbed instance."""
    from .solver import enumerate_breakpoints

    table = enumerate_breakpoints(perturbed, method="hull")
    out = {}
    for b in table:
        out[b.aset.mask] = b.alpha
    size = perturbed.size
    missing = [t for t in range(1, size) if t not in out]
    if missing:
        raise ConstructionIntegrityError(
            f"perturbed instance lost critical values at indices {missing[:5]}"
        )
    return out


def minimal_half_superset(mask: int, n: int) -> int:
    """h(t): minimal index of a size-n/2 superset of S_t (t itself if
    |S_t| >= n/2).  Minimal index means adding the smallest absent actions."""
    half = n // 2
    if mask.bit_count() >= half:
        return mask
    h = mask
    i = 0
    while h.bit_count() < half:
        if not (h >> i) & 1:
            h |= 1 << i
        i += 1
    return h


@dataclass
class AugmentedCCInstance:
    variant: str
    base: ContractInstance
    perturbed: ContractInstance
    delta: object
    z: object
    z_components: dict
    sigma: object
    x_f: SpecialSetVector
    x_c: SpecialSetVector
    instance: ContractInstance
    alpha_tilde: dict
    f_marginal: list
    c_marginal: list
    h_map: dict | None = None

    @property
    def revenue_halfwidth(self):
        """z (1 - alpha_max) / 16: the sandwich half-width and winner margin."""
        alphas = self.base.meta["alpha_table"]
        with self.base.ctx.workprec():
            return self.z * (1 - alphas[-1]) / 16


def _z_components(variant, base, perturbed, delta, sigma):
    n = base.n
    size = 1 << n
    ftab = base.f.value_table()
    alphas = base.meta["alpha_table"]
    with base.ctx.workprec():
        if variant == "sup-sup":
            ctab = base.c.value_table()
            ftil = perturbed.f.value_table()
            # c(S_1) - c(S_0) = 0 on this base, so the cost chain floor
            # starts at t=2; rewards get the extra 1/2 cap
            phi_c = min(ctab[t] - ctab[t - 1] for t in range(2, size))
            phi_f = min([Fraction(1, 2)] + [ftab[t] - ftab[t - 1] for t in range(1, size)])
            phi_ft = min(ftil[t] - ftil[t - 1] for t in range(1, size))
            psi_c = _submod_margin(ctab, n, -1)
            psi_ft = _submod_margin(ftil, n, -1)
            alpha_max = alphas[-1]
            zeta = delta * (1 - alpha_max) * phi_f / (16 * n * n * (ftab[size - 1] + 1))
            comps = {
                "phi_c": phi_c,
                "psi_c": psi_c,
                "phi_f": phi_f,
                "phi_f_tilde": phi_ft,
                "psi_f_tilde": psi_ft,
                "zeta": zeta,
                "sigma_half": sigma / 2,
            }
        else:
            ctil = perturbed.c.value_table()
            phi_ct = min(ctil[t] - ctil[t - 1] for t in range(1, size))
            psi_ct = _submod_margin(ctil, n, -1 if variant == "sub-sup" else +1)
            phi_f = min(ftab[t] - ftab[t - 1] for t in range(1, size))
            psi_f = _submod_margin(ftab, n, +1)
            alpha_max = alphas[-1]
            zeta = delta * (1 - alpha_max) * phi_f / (16 * n * n * ftab[size - 1])
            comps = {
                "phi_c_tilde": phi_ct,
                "psi_c_tilde": psi_ct,
                "phi_f": phi_f,
                "psi_f": psi_f,
                "zeta": zeta,
                "sigma_half": sigma / 2,
            }
    for k, v in comps.items():
        if not v > 0:
            raise ConstructionIntegrityError(f"z component {k} = {v} not positive")
    return comps


_augment_cache: dict = {}


def build_augmented(
    variant: str,
    base: ContractInstance,
    x_f: SpecialSetVector,
    x_c: SpecialSetVector,
    delta=None,
) -> AugmentedCCInstance:
    """Attach action n+1 with indicator-encoded marginals to the perturbed base.

    base: submodular-reward equal-revenue instance for sub-sub/sub-sup,
    additive-reward (supermodular-cost) instance for sup-sup; n must be even.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n = base.n
    if n % 2:
        raise ValueError("augmentation requires even n")
    if x_f.n != n or x_c.n != n:
        raise ValueError("indicator vectors over wrong ground set")
    size = 1 << n
    half = n // 2
    # everything except the marginal tables is independent of (x_f, x_c);
    # cache it so indicator sweeps only pay for table assembly
    cache_key = (id(base), variant, None if delta is None else repr(delta))
    cached = _augment_cache.get(cache_key)
    if cached is None:
        if variant == "sup-sup":
            sigma = sigma_bound_supply(base).sigma
        else:
            sigma = sigma_bound_demand(base).sigma
        with base.ctx.workprec():
            budget = delta_bound(base, variant)
            # the sparse best-response carryover additionally needs
            # delta < sigma / (2 n^2)
            cap = min(budget.bound, sigma / (2 * n * n))
            if delta is None:
                delta = cap / 2
            if not (0 < delta < cap):
                raise ValueError(f"delta {delta} outside (0, {cap})")
            if variant == "sub-sub":
                perturbed = build_perturbed_cost(base, delta, sign=-1)
            elif variant == "sub-sup":
                perturbed = build_perturbed_cost(base, delta, sign=+1)
            else:
                perturbed = build_perturbed_reward(base, delta)
            atil = _alpha_tilde_by_mask(perturbed)
            comps = _z_components(variant, base, perturbed, delta, sigma)
            z = min(comps.values())
        _augment_cache[cache_key] = (sigma, delta, perturbed, atil, comps, z)
    else:
        sigma, delta, perturbed, atil, comps, z = cached
    with base.ctx.workprec():
        h_map = None
        fmarg = [None] * size
        cmarg = [None] * size
        if variant == "sub-sup":
            h_map = {t: minimal_half_superset(t, n) for t in range(size)}
        for t in range(size):
            s = t.bit_count()
            if variant in ("sub-sub", "sub-sup"):
                if s < half or (s == half and t in x_f):
                    fmarg[t] = z / 4
                else:
                    fmarg[t] = 0
            else:
                if s > half or (s == half and t in x_f):
                    fmarg[t] = z / 4
                else:
                    fmarg[t] = 0
            if variant == "sub-sub":
                if s < half or (s == half and t not in x_c):
                    cmarg[t] = z / 2
                elif s == half:
                    cmarg[t] = atil[t] * z / 4
                else:
                    cmarg[t] = atil[1] * z / 8
            elif variant == "sub-sup":
                if s < half:
                    cmarg[t] = atil[h_map[t]] * z / 4
                elif s == half and t in x_c:
                    cmarg[t] = atil[t] * z / 4
                else:
                    cmarg[t] = z / 2
            else:
                if s < half:
                    cmarg[t] = atil[1] * z / 8
                elif s == half and t in x_c:
                    cmarg[t] = atil[t] * z / 4
                else:
                    cmarg[t] = z / 2

        fbase = perturbed.f.value_table() if variant == "sup-sup" else base.f.value_table()
        cbase = base.c.value_table() if variant == "sup-sup" else perturbed.c.value_table()
        fhat = [None] * (2 * size)
        chat = [None] * (2 * size)
        for m in range(2 * size):
            t = m & (size - 1)
            if m < size:
                fhat[m] = fbase[t]
                chat[m] = cbase[t]
            else:
                fhat[m] = fbase[t] + fmarg[t]
                chat[m] = cbase[t] + cmarg[t]
    f_cls = "submodular" if variant in ("sub-sub", "sub-sup") else "supermodular"
    c_cls = "submodular" if variant == "sub-sub" else "supermodular"
    fhat_o = SetFunctionOracle(n + 1, table=fhat, declared_class=f_cls, name="augmented_reward")
    chat_o = SetFunctionOracle(n + 1, table=chat, declared_class=c_cls, name="augmented_cost")
    inst = ContractInstance(
        n=n + 1, f=fhat_o, c=chat_o, ctx=base.ctx, name=f"augmented {variant} (n={n})"
    )
    inst.meta["kind"] = f"cc_augmented_{variant}"
    return AugmentedCCInstance(
        variant=variant,
        base=base,
        perturbed=perturbed,
        delta=delta,
        z=z,
        z_components=comps,
        sigma=sigma,
        x_f=x_f,
        x_c=x_c,
        instance=inst,
        alpha_tilde=atil,
        f_marginal=fmarg,
        c_marginal=cmarg,
        h_map=h_map,
    )


@dataclass
class ReductionReport:
    variant: str
    n: int
    augmenting: bool  # n+1 in the incentivized optimum
    expected: bool  # x_f and x_c intersect
    set_star: ActionSet
    alpha_star: object

    @property
    def ok(self):
        return self.augmenting == self.expected


def check_reduction(aug: AugmentedCCInstance, strict: bool = True) -> ReductionReport:
    """Solve the augmented instance; (n+1 in S*) must equal (x_f meets x_c)."""
    from .solver import optimal_contract

    sol = optimal_contract(aug.instance, method="hull")
    augmenting = (aug.base.n + 1) in sol.set_star
    expected = aug.x_f.intersects(aug.x_c)
    report = ReductionReport(
        variant=aug.variant,
        n=aug.base.n,
        augmenting=augmenting,
        expected=expected,
        set_star=sol.set_star,
        alpha_star=sol.alpha_star,
    )
    if strict and not report.ok:
        raise ReductionFailureError(
            f"{aug.variant}: n+1 in optimum is {augmenting}, intersection is {expected}"
        )
    return report


def inapprox_table(kind: str, n: int, x_f: SpecialSetVector, x_c: SpecialSetVector):
    """Constant-gap tables: f - c > 0 exactly on size-n/2 sets in both vectors.

    kind "sub-sub" gives submodular f and c; "sup-sup" supermodular.
    """
    if kind not in ("sub-sub", "sup-sup"):
        raise ValueError(f"unknown kind {kind!r}")
    if n % 2 or n < 4:
        raise ValueError("n must be even and >= 4")
    half = n // 2
    ftab, ctab = [], []
    for m in range(1 << n):
        s = m.bit_count()
        if kind == "sub-sub":
            if s < half:
                fv, cv = 8 * s, 8 * s
            elif s == half:
                fv = 4 * n - 3 if m in x_f else 4 * n - 4
                cv = 4 * n - 4 if m in x_c else 4 * n - 2
            else:
                fv, cv = 2 * s + 3 * n - 3, 2 * s + 3 * n - 2
        else:
            if s < half:
                fv, cv = 2 * s, 2 * s
            elif s == half:
                fv = n + 1 if m in x_f else n
                cv = n if m in x_c else n + 2
            else:
                fv, cv = 6 * s - 2 * n - 1, 6 * s - 2 * n
        ftab.append(fv)
        ctab.append(cv)
    cls = "submodular" if kind == "sub-sub" else "supermodular"
    f = SetFunctionOracle(n, table=ftab, declared_class=cls, name=f"inapprox_{kind}_reward")
    c = SetFunctionOracle(n, table=ctab, declared_class=cls, name=f"inapprox_{kind}_cost")
    return f, c


# --- protocol simulator ---------------------------------------------------


@dataclass
class Message:
    sender: str
    tag: str
    bit_length: int


@dataclass
class Transcript:
    width_bits: int
    messages: list[Message] = field(default_factory=list)
    br_calls: int = 0

    @property
    def total_bits(self) -> int:
        return sum(m.bit_length for m in self.messages)


class Channel:
    """Alternation-checked message channel with fixed-point payload width."""

    def __init__(self, width_bits: int, br_budget: int | None = None):
        if width_bits <= 0:
            raise ProtocolError("width_bits must be positive")
        self.transcript = Transcript(width_bits=width_bits)
        self.br_budget = br_budget

    def send(self, sender: str, values, tag: str = ""):
        if sender not in ("Alice", "Bob"):
            raise ProtocolError(f"unknown sender {sender!r}")
        values = list(values)
        if not values:
            raise ProtocolError("empty message")
        self.transcript.messages.append(
            Message(sender=sender, tag=tag, bit_length=len(values) * self.transcript.width_bits)
        )
        return values

    def charge_br_call(self):
        self.transcript.br_calls += 1
        if self.br_budget is not None and self.transcript.br_calls > self.br_budget:
            raise BudgetExceededError(f"best-response budget {self.br_budget} exceeded")


def run_protocol(protocol, f_holder, c_holder, width_bits: int, br_budget: int | None = None):
    """Execute a deterministic two-party protocol; returns (answer, Transcript)."""
    channel = Channel(width_bits, br_budget)
    answer = protocol(channel, f_holder, c_holder)
    return answer, channel.transcript


def full_streaming_protocol(channel: Channel, f_holder, c_holder):
    """Bob ships his whole cost table; Alice solves locally."""
    from .solver import optimal_contract

    ctab = channel.send("Bob", c_holder.c.value_table(), tag="full-cost-table")
    c = SetFunctionOracle(f_holder.n, table=ctab, declared_class=c_holder.c.declared_class)
    inst = ContractInstance(n=f_holder.n, f=f_holder.f, c=c, ctx=f_holder.ctx)
    sol = optimal_contract(inst, method="hull")
    return sol.alpha_star, sol.set_star


def make_additive_cost_protocol():
    """Bob sends just his n per-action costs (additive c)."""
    from .solver import optimal_contract

    def protocol(channel: Channel, f_holder, c_holder):
        weights = channel.send("Bob", c_holder.c.weights, tag="cost-weights")
        c = SetFunctionOracle(f_holder.n, weights=weights, declared_class="additive")
        inst = ContractInstance(n=f_holder.n, f=f_holder.f, c=c, ctx=f_holder.ctx)
        sol = optimal_contract(inst, method="hull")
        return sol.alpha_star, sol.set_star

    return protocol


def augmented_br_protocol(aug: AugmentedCCInstance, alpha, channel: Channel) -> ActionSet:
    """Best response of the augmented instance via public sparse candidates.

    Both parties know the perturbed base, so both enumerate its sigma/2
    approximate best response at alpha; the true augmented best response,
    stripped of n+1, always lies there.  Bob sends the augmented cost of
    each candidate and of its n+1-extension (2 |candidates| values); Alice,
    who knows every reward, picks the argmax under the standard tie-break.
    """
    from .sparse import approx_best_response

    n = aug.base.n
    channel.charge_br_call()
    with aug.base.ctx.workprec():
        cand = approx_best_response(aug.perturbed, alpha, aug.sigma / 2)
        masks = sorted(s.mask for s in cand.members)
        chat = aug.instance.c
        payload = []
        for m in masks:
            payload.append(chat.eval_mask(m))
            payload.append(chat.eval_mask(m | (1 << n)))
        payload = channel.send("Bob", payload, tag="candidate-costs")
        fhat = aug.instance.f
        best = None
        best_u = None
        best_f = None
        for i, m in enumerate(masks):
            for mm, cv in ((m, payload[2 * i]), (m | (1 << n), payload[2 * i + 1])):
                fv = fhat.eval_mask(mm)
                u = alpha * fv - cv
                if best is None or u > best_u or (u == best_u and fv > best_f):
                    best, best_u, best_f = mm, u, fv
    return ActionSet(n + 1, best)
