"""Command-line front end: construct, solve, verify, experiment.

Every command is deterministic given its flags (all randomness flows through
one seeded generator recorded in the output), and verification failures exit
nonzero.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from .core import ContractInstance
from .serialize import (
    NAMED_CONSTRUCTIONS,
    dump_csv,
    dump_json,
    instance_to_dict,
    build_named,
    load_instance,
    number_to_str,
    save_instance,
)

CHECKS = ("structure", "equal-revenue", "gap-bounds", "sparse-demand", "cc-invariants")
EXPERIMENTS = ("value-query", "demand-sim", "supply-sim", "cc-sweep", "protocol-bench")


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> ContractInstance:
    if not args.instance:
        raise SystemExit("--instance required")
    return load_instance(args.instance)


def cmd_construct(args) -> int:
    params = {"n": args.n}
    if args.precision_bits:
        params["precision_bits"] = args.precision_bits
    if args.grid_bits:
        params["grid_bits"] = args.grid_bits
    inst = build_named(args.name, params)
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(dump_json(instance_to_dict(inst)))
    return 0


def cmd_solve(args) -> int:
    from .solver import enumerate_breakpoints, fptas, optimal_contract

    inst = _load(args)
    table = enumerate_breakpoints(inst, method=args.method)
    sol = optimal_contract(inst, table=table)
    if args.format == "csv":
        _emit(dump_csv(table.csv_rows()), args.out)
        return 0
    report = {
        "instance": inst.name,
        "n": inst.n,
        "alpha_star": number_to_str(sol.alpha_star),
        "set_star_mask": sol.set_star.mask,
        "set_star": sorted(sol.set_star.members()),
        "principal_utility": number_to_str(sol.principal_utility),
        "co_optimal_breakpoints": [b.position for b in sol.all_maximizers],
        "breakpoint_count": len(table),
    }
    if args.fptas is not None:
        approx = fptas(inst, args.fptas)
        with inst.ctx.workprec():
            ratio = approx.principal_utility / sol.principal_utility
        report["fptas"] = {
            "eps": args.fptas,
            "alpha": number_to_str(approx.alpha),
            "set_mask": approx.aset.mask,
            "principal_utility": number_to_str(approx.principal_utility),
            "ratio": float(ratio),
            "value_queries": approx.value_queries,
            "best_response_queries": approx.best_response_queries,
        }
    _emit(dump_json(report), args.out)
    return 0


def _check_structure(inst, report):
    from .constructions import verify_structure

    ok = True
    for label, oracle in (("f", inst.f), ("c", inst.c)):
        r = verify_structure(oracle, strict=False)
        report[f"structure_{label}"] = {
            "declared_class": oracle.declared_class,
            "ok": r.ok,
            "monotonicity_violations": len(r.monotonicity_violations),
            "class_violations": len(r.class_violations),
            "first_violations": [
                str(v) for v in (r.monotonicity_violations + r.class_violations)[:5]
            ],
        }
        ok = ok and r.ok
    return ok


def _check_equal_revenue(inst, report):
    from .constructions import verify_equal_revenue

    tol = inst.ctx.maximizer_tolerance
    r = verify_equal_revenue(inst, tol)
    report["equal_revenue"] = {
        "ok": r.ok,
        "breakpoints": r.breakpoint_count,
        "expected": r.expected_count,
        "max_deviation": number_to_str(r.max_deviation),
    }
    return r.ok


def _check_gap_bounds(inst, report):
    from .constructions import check_gap_bounds

    r = check_gap_bounds(inst.n)
    report["gap_bounds"] = {"ok": r.ok, "violations": [list(v) for v in r.violations[:10]]}
    return r.ok


def _check_sparse_demand(inst, report, seed):
    from .sparse import (
        approx_demand,
        minimal_ambiguous_census,
        random_prices,
        sigma_bound_demand,
        sparseness_ceiling,
    )

    if inst.c.weights is None or "alpha_table" not in inst.meta:
        report["sparse_demand"] = {"ok": False, "reason": "needs additive-cost equal-revenue base"}
        return False
    sigma = sigma_bound_demand(inst).sigma
    rng = random.Random(seed)
    cap = sparseness_ceiling(inst.n)
    max_size = 0
    trials = 200
    for _ in range(trials):
        prices = random_prices(inst.n, rng)
        d = approx_demand(inst.f, prices, sigma, inst.ctx)
        minimal_ambiguous_census(d, inst.n)  # raises on any interval-invariant violation
        max_size = max(max_size, len(d))
    ok = max_size <= cap
    report["sparse_demand"] = {
        "ok": ok,
        "trials": trials,
        "sigma": number_to_str(sigma),
        "max_demand_size": max_size,
        "ceiling": cap,
    }
    return ok


def _check_cc_invariants(inst, report):
    from .commlab import SpecialSetVector, build_augmented
    from .constructions import verify_structure

    n = inst.n
    if n % 2:
        report["cc_invariants"] = {"ok": False, "reason": "even n required"}
        return False
    kind = inst.meta.get("kind")
    variant = "sup-sup" if kind == "equal_revenue_supmod_c" else "sub-sub"
    ones = SpecialSetVector.all_ones(n)
    aug = build_augmented(variant, inst, ones, ones)
    ok = True
    details = {"variant": variant, "z": number_to_str(aug.z), "delta": number_to_str(aug.delta)}
    for label, oracle in (("f_hat", aug.instance.f), ("c_hat", aug.instance.c)):
        r = verify_structure(oracle, strict=False)
        details[label] = {"declared_class": oracle.declared_class, "ok": r.ok}
        ok = ok and r.ok
    with inst.ctx.workprec():
        details["z_positive"] = bool(aug.z > 0)
        ok = ok and aug.z > 0
    details["ok"] = ok
    report["cc_invariants"] = details
    return ok


def cmd_verify(args) -> int:
    inst = _load(args)
    checks = args.checks or ["structure"]
    for chk in checks:
        if chk not in CHECKS:
            raise SystemExit(f"unknown check {chk!r}; choose from {CHECKS}")
    report = {"instance": inst.name, "n": inst.n, "checks": list(checks)}
    all_ok = True
    for chk in checks:
        if chk == "structure":
            ok = _check_structure(inst, report)
        elif chk == "equal-revenue":
            ok = _check_equal_revenue(inst, report)
        elif chk == "gap-bounds":
            ok = _check_gap_bounds(inst, report)
        elif chk == "sparse-demand":
            ok = _check_sparse_demand(inst, report, args.seed)
        else:
            ok = _check_cc_invariants(inst, report)
        all_ok = all_ok and ok
    report["ok"] = all_ok
    _emit(dump_json(report), args.out)
    return 0 if all_ok else 1


def _experiment_value_query(args):
    from .constructions import build_equal_revenue_submod_f
    from .sparse import value_query_experiment

    base = build_equal_revenue_submod_f(args.n)
    stats = value_query_experiment(base, trials=args.trials, seed=args.seed)
    return stats.as_dict(), stats.ok


def _experiment_demand_sim(args):
    from .constructions import build_equal_revenue_submod_f
    from .core import demand, demand_prices_for_contract
    from .perturb import epsilon_bound, family_iterator
    from .sparse import random_prices, simulate_demand_by_values, sparseness_ceiling

    base = build_equal_revenue_submod_f(args.n)
    eps = epsilon_bound(base).default_epsilon
    alphas = base.meta["alpha_table"]
    rng = random.Random(args.seed)
    agree = total = 0
    max_queries = 0
    with base.ctx.workprec():
        for fam in family_iterator(base):
            hidden = fam.instance.f
            price_sets = [
                demand_prices_for_contract(base.c, alphas[t]) for t in range(1, len(alphas))
            ]
            price_sets += [random_prices(base.n, rng) for _ in range(args.trials)]
            for prices in price_sets:
                got, used = simulate_demand_by_values(base.f, hidden, prices, eps, base.ctx)
                want = demand(hidden, prices, base.ctx)
                total += 1
                agree += got == want
                max_queries = max(max_queries, used)
    out = {
        "n": args.n,
        "seed": args.seed,
        "random_prices_per_k": args.trials,
        "comparisons": total,
        "agreement": agree / total,
        "max_value_queries": max_queries,
        "query_ceiling": sparseness_ceiling(args.n),
    }
    return out, agree == total and max_queries <= sparseness_ceiling(args.n)


def _experiment_supply_sim(args):
    from .constructions import build_equal_revenue_supmod_c
    from .core import supply, supply_prices_for_contract
    from .perturb import epsilon_bound, family_iterator
    from .sparse import random_prices, simulate_supply_by_values, sparseness_ceiling

    base = build_equal_revenue_supmod_c(args.n)
    eps = epsilon_bound(base).default_epsilon
    alphas = base.meta["alpha_table"]
    rng = random.Random(args.seed)
    agree = total = 0
    max_queries = 0
    for fam in family_iterator(base):
        hidden = fam.instance.c
        price_sets = [supply_prices_for_contract(base.f, a) for a in alphas if a > 0]
        price_sets += [random_prices(base.n, rng) for _ in range(args.trials)]
        for prices in price_sets:
            got, used = simulate_supply_by_values(base.c, hidden, prices, eps, base.ctx)
            want = supply(hidden, prices, base.ctx)
            total += 1
            agree += got == want
            max_queries = max(max_queries, used)
    out = {
        "n": args.n,
        "seed": args.seed,
        "random_prices_per_k": args.trials,
        "comparisons": total,
        "agreement": agree / total,
        "max_value_queries": max_queries,
        "query_ceiling": sparseness_ceiling(args.n),
    }
    return out, agree == total and max_queries <= sparseness_ceiling(args.n)


def _cc_base(variant, n):
    from .constructions import build_equal_revenue_submod_f, build_equal_revenue_supmod_c

    if variant == "sup-sup":
        return build_equal_revenue_supmod_c(n)
    from .commlab import CC_PRECISION_BITS

    return build_equal_revenue_submod_f(n, precision_bits=CC_PRECISION_BITS)


def _experiment_cc_sweep(args):
    from math import comb

    from .commlab import SpecialSetVector, build_augmented, check_reduction

    variant = args.variant
    n = args.n
    base = _cc_base(variant, n)
    rng = random.Random(args.seed)
    k = comb(n, n // 2)
    rows = [("pair_id", "x_f", "x_c", "disjoint", "augmenting", "match")]
    mismatches = 0
    if args.exhaustive:
        pairs = (
            (a, b) for a in range(1 << k) for b in range(1 << k)
        )
        count = (1 << k) * (1 << k)
    else:
        count = args.trials
        pairs = ((rng.getrandbits(k), rng.getrandbits(k)) for _ in range(count))
    for pid, (a, b) in enumerate(pairs):
        x_f = SpecialSetVector.from_int(n, a)
        x_c = SpecialSetVector.from_int(n, b)
        aug = build_augmented(variant, base, x_f, x_c)
        rep = check_reduction(aug, strict=False)
        rows.append((pid, a, b, not rep.expected, rep.augmenting, rep.ok))
        mismatches += not rep.ok
    summary = {
        "variant": variant,
        "n": n,
        "seed": args.seed,
        "pairs": count,
        "mismatches": mismatches,
    }
    return {"summary": summary, "rows": rows}, mismatches == 0


def _experiment_protocol_bench(args):
    from .commlab import SpecialSetVector, augmented_br_protocol, build_augmented, Channel
    from .core import best_response

    n = args.n
    base = _cc_base(args.variant, n)
    ones = SpecialSetVector.all_ones(n)
    aug = build_augmented(args.variant, base, ones, ones)
    width = base.precision_bits
    alphas = [b.alpha for b in aug.instance.meta.get("analytic_breakpoints", [])]
    if not alphas:
        alphas = base.meta["alpha_table"]
    matches = 0
    max_bits = 0
    br_calls = 0
    tested = list(alphas[: args.trials]) if args.trials else list(alphas)
    for a in tested:
        channel = Channel(width)
        got = augmented_br_protocol(aug, a, channel)
        want = best_response(aug.instance, a)
        matches += got == want
        max_bits = max(max_bits, channel.transcript.total_bits)
        br_calls += channel.transcript.br_calls
    out = {
        "variant": args.variant,
        "n": n,
        "width_bits": width,
        "alphas_tested": len(tested),
        "matches": matches,
        "max_bits_per_br": max_bits,
        "total_br_calls": br_calls,
    }
    return out, matches == len(tested)


def cmd_experiment(args) -> int:
    runners = {
        "value-query": _experiment_value_query,
        "demand-sim": _experiment_demand_sim,
        "supply-sim": _experiment_supply_sim,
        "cc-sweep": _experiment_cc_sweep,
        "protocol-bench": _experiment_protocol_bench,
    }
    if args.name not in runners:
        raise SystemExit(f"unknown experiment {args.name!r}; choose from {EXPERIMENTS}")
    result, ok = runners[args.name](args)
    if args.format == "csv" and isinstance(result, dict) and "rows" in result:
        _emit(dump_csv(result["rows"]), args.out)
    elif args.format == "csv":
        data = result if "rows" not in result else result["summary"]
        rows = [tuple(data.keys()), tuple(data.values())]
        _emit(dump_csv(rows), args.out)
    else:
        if isinstance(result, dict) and "rows" in result:
            result = {"summary": result["summary"], "rows": [list(r) for r in result["rows"][1:]]}
        _emit(dump_json(result), args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contractlab",
        description="Construct, verify, solve, and experiment on contract instances.",
    )
    default_bits = int(os.environ.get("CONTRACTLAB_PRECISION_BITS", "0")) or None
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write a named instance as JSON")
    p.add_argument("name", choices=NAMED_CONSTRUCTIONS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--precision-bits", type=int, default=default_bits)
    p.add_argument("--grid-bits", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("solve", help="breakpoints and the optimal contract")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", default="auto", choices=("auto", "scan", "hull"))
    p.add_argument("--fptas", type=float, default=None, metavar="EPS")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run named checks; nonzero exit on failure")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("checks", nargs="*", metavar="CHECK", help=f"subset of {CHECKS}")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name", metavar="NAME", help=f"one of {EXPERIMENTS}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--variant", default="sub-sub", choices=("sub-sub", "sub-sup", "sup-sup"))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
