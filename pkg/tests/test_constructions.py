"""Equal-revenue constructions, structure verification, rounding, gap bounds."""

from fractions import Fraction

import pytest

from contractlab.constructions import (
    PrecisionError,
    build_equal_revenue_submod_f,
    build_equal_revenue_supmod_c,
    build_rounded,
    check_gap_bounds,
    default_grid_bits,
    supmod_c_cost_fractions,
    verify_equal_revenue,
    verify_structure,
)
from contractlab.core import SetFunctionOracle
from contractlab.solver import enumerate_breakpoints, optimal_contract

from conftest import brute_submodular, brute_supermodular

# frozen goldens, derived once from the closed forms and pinned
GOLDEN_N3_ALPHAS = [0.0, 0.618, 0.747, 0.807, 0.843, 0.867, 0.885, 0.898]
GOLDEN_N3_F = [1.0, 2.618, 3.956, 5.195, 6.381, 7.534, 8.664, 9.778]


class TestSubmodFBase:
    def test_n3_breakpoint_goldens(self):
        inst = build_equal_revenue_submod_f(3)
        table = enumerate_breakpoints(inst)
        assert len(table) == 8
        assert [round(float(b.alpha), 3) for b in table] == GOLDEN_N3_ALPHAS
        assert [round(float(b.f_value), 3) for b in table] == GOLDEN_N3_F
        # chain order: breakpoint t incentivizes the index-t subset
        assert [b.aset.mask for b in table] == list(range(8))

    def test_equal_revenue_within_1e9(self):
        for n in (2, 4, 6):
            inst = build_equal_revenue_submod_f(n)
            rep = verify_equal_revenue(inst, 1e-9)
            assert rep.ok, (n, float(rep.max_deviation))
            assert rep.breakpoint_count == (1 << n) - 1

    def test_reward_is_strictly_submodular(self):
        for n in (2, 3, 4):
            inst = build_equal_revenue_submod_f(n)
            assert verify_structure(inst.f, strict=True).ok
            assert brute_submodular(inst.f.value_table(), n, strict=True)

    def test_costs_are_binary_weights(self):
        inst = build_equal_revenue_submod_f(4)
        assert inst.c.weights == [1, 2, 4, 8]
        assert inst.c.eval_mask(0b1010) == 10

    def test_scan_hull_analytic_agree(self):
        inst = build_equal_revenue_submod_f(4)
        scan = enumerate_breakpoints(inst, method="scan")
        hull = enumerate_breakpoints(inst, method="hull")
        analytic = enumerate_breakpoints(inst, method="auto")
        assert [b.aset.mask for b in scan] == [b.aset.mask for b in hull]
        assert [b.alpha for b in scan] == [b.alpha for b in hull]
        assert [b.aset.mask for b in analytic] == [b.aset.mask for b in scan]
        tol = inst.ctx.maximizer_tolerance
        for x, y in zip(analytic, scan):
            assert abs(x.alpha - y.alpha) <= tol

    def test_low_precision_collides(self):
        # 24-bit mantissas cannot separate 2^14 - 1 chain values near 1
        with pytest.raises(PrecisionError):
            build_equal_revenue_submod_f(14, precision_bits=24)

    def test_all_breakpoints_co_optimal(self):
        inst = build_equal_revenue_submod_f(3)
        sol = optimal_contract(inst)
        assert len(sol.all_maximizers) == 8


class TestSupmodCBase:
    def test_n2_cost_column(self):
        assert supmod_c_cost_fractions(2) == [
            Fraction(0),
            Fraction(0),
            Fraction(1, 2),
            Fraction(7, 6),
        ]

    def test_alphas_are_t_minus_1_over_t(self):
        inst = build_equal_revenue_supmod_c(3)
        assert inst.meta["alpha_table"] == [Fraction(t - 1, t) for t in range(1, 8)]

    def test_equal_revenue_exact(self):
        for n in (2, 3, 4):
            inst = build_equal_revenue_supmod_c(n)
            rep = verify_equal_revenue(inst, 0)
            assert rep.ok
            assert rep.max_deviation == 0

    def test_cost_is_strictly_supermodular_weak_monotone(self):
        for n in (2, 3, 4):
            inst = build_equal_revenue_supmod_c(n)
            assert verify_structure(inst.c, strict=True).ok
            assert brute_supermodular(inst.c.value_table(), n, strict=True)
            # c(S_1) = 0 = c(empty): strictly monotone it is not
            assert not verify_structure(inst.c, strict=True, strict_monotone=True).ok

    def test_rewards_additive_binary(self):
        inst = build_equal_revenue_supmod_c(3)
        assert inst.f.weights == [1, 2, 4]
        assert inst.f.eval_mask(0b111) == 7

    def test_first_breakpoint_alpha_zero_incentivizes_s1(self):
        inst = build_equal_revenue_supmod_c(3)
        table = enumerate_breakpoints(inst, method="hull")
        assert table[0].alpha == 0
        assert table[0].aset.mask == 1
        assert table[0].agent_utility == 0
        assert len(table) == 7


class TestVerifyStructure:
    def test_additive_passes_both_weak_classes(self):
        f = SetFunctionOracle(4, weights=[1, 3, 5, 7], declared_class="additive")
        assert verify_structure(f, declared_class="submodular").ok
        assert verify_structure(f, declared_class="supermodular").ok
        assert not verify_structure(f, declared_class="submodular", strict=True).ok

    def test_detects_violations(self):
        # f({1,2}) too large: submodularity broken
        f = SetFunctionOracle(2, table=[0, 1, 1, 5], declared_class="submodular")
        rep = verify_structure(f)
        assert not rep.ok and rep.class_violations

    def test_detects_non_monotone(self):
        f = SetFunctionOracle(2, table=[0, 2, 1, 0], declared_class="general-monotone")
        assert not verify_structure(f).ok

    def test_matches_brute_force_on_goldens(self):
        inst = build_equal_revenue_submod_f(4)
        tab = inst.f.value_table()
        assert verify_structure(inst.f).ok == brute_submodular(tab, 4)


class TestRounded:
    @pytest.mark.parametrize("n", [2, 3])
    def test_grid_membership_and_distinct_betas(self, n):
        r = build_rounded(n)
        scale = 1 << r.grid_bits
        with r.instance.ctx.workprec():
            for a in r.alpha_rounded:
                assert a * scale == int(a * scale)
            assert all(x < y for x, y in zip(r.betas, r.betas[1:]))

    def test_revenue_within_tolerance(self):
        r = build_rounded(3)
        tol = r.revenue_tolerance
        table = enumerate_breakpoints(r.instance)
        with r.instance.ctx.workprec():
            for b in table:
                if b.aset.mask:
                    assert abs(b.principal_utility - 1) <= tol

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            build_rounded(3, grid_bits=10)

    def test_default_grid_bits(self):
        assert default_grid_bits(1) == 38
        assert default_grid_bits(10) == 200
        assert default_grid_bits(20) == 400


class TestGapBounds:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_bounds_hold(self, n):
        assert check_gap_bounds(n).ok
