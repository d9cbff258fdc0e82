"""JSON (de)serialization of instances and experiment outputs.

Numbers are serialized losslessly: floats as C99 hex, multiprecision reals
as mantissa*2^exponent, rationals as p/q.  Named instance kinds reference
the constructors in the constructions module.
"""

from __future__ import annotations

import json
from fractions import Fraction

import mpmath

from .core import ContractInstance, SetFunctionOracle
from .reals import RealContext

NAMED_CONSTRUCTIONS = ("equal_revenue_submod_f", "equal_revenue_supmod_c", "rounded")


def number_to_str(x) -> str:
    if isinstance(x, bool):
        raise TypeError("bool is not a serializable number")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return x.hex()
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        return f"{-man if sign else man}p{exp}"
    raise TypeError(f"cannot serialize number of type {type(x).__name__}")


def number_from_str(s: str):
    s = s.strip()
    if s.startswith(("0x", "-0x")):
        return float.fromhex(s)
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    if "p" in s:
        man, exp = s.split("p")
        man, exp = int(man), int(exp)
        # exact: widen precision to hold the whole mantissa
        with mpmath.workprec(max(man.bit_length(), 2) + 8):
            return mpmath.ldexp(mpmath.mpf(man), exp)
    return int(s)


def _oracle_to_dict(oracle: SetFunctionOracle) -> dict:
    d = {"declared_class": oracle.declared_class, "name": oracle.name}
    if oracle.weights is not None:
        d["kind"] = "additive"
        d["weights"] = [number_to_str(w) for w in oracle.weights]
    else:
        d["kind"] = "table"
        d["values"] = [number_to_str(v) for v in oracle.value_table()]
    return d


def _oracle_from_dict(n: int, d: dict) -> SetFunctionOracle:
    kind = d["kind"]
    if kind == "additive":
        return SetFunctionOracle(
            n,
            weights=[number_from_str(w) for w in d["weights"]],
            declared_class=d.get("declared_class", "additive"),
            name=d.get("name", ""),
        )
    if kind == "table":
        return SetFunctionOracle(
            n,
            table=[number_from_str(v) for v in d["values"]],
            declared_class=d.get("declared_class", "general-monotone"),
            name=d.get("name", ""),
        )
    raise ValueError(f"unknown oracle kind {kind!r}")


_META_NUMBER_LISTS = ("alpha_table",)
_META_SCALARS = ("kind", "base_kind", "k", "epsilon", "direction", "grid_bits")


def instance_to_dict(inst: ContractInstance) -> dict:
    d = {
        "n": inst.n,
        "f": _oracle_to_dict(inst.f),
        "c": _oracle_to_dict(inst.c),
        "precision_bits": inst.precision_bits,
        "tie_break": inst.tie_break,
        "name": inst.name,
        "meta": {},
    }
    for key in _META_SCALARS:
        if key in inst.meta:
            v = inst.meta[key]
            d["meta"][key] = v if isinstance(v, (str, int)) else number_to_str(v)
    for key in _META_NUMBER_LISTS:
        if key in inst.meta:
            d["meta"][key] = [number_to_str(v) for v in inst.meta[key]]
    bps = inst.meta.get("analytic_breakpoints")
    if bps is not None:
        d["meta"]["analytic_breakpoints"] = [
            {
                "position": b.position,
                "alpha": number_to_str(b.alpha),
                "mask": b.aset.mask,
                "f": number_to_str(b.f_value),
                "c": number_to_str(b.c_value),
                "agent_utility": number_to_str(b.agent_utility),
                "principal_utility": number_to_str(b.principal_utility),
            }
            for b in bps
        ]
    return d


def instance_from_dict(d: dict) -> ContractInstance:
    from .solver import Breakpoint, BreakpointTable
    from .core import ActionSet

    n = d["n"]
    if d["f"].get("kind") == "named" or d["c"].get("kind") == "named":
        return _instance_from_named(d)
    ctx = RealContext(bits=d.get("precision_bits", 53))
    inst = ContractInstance(
        n=n,
        f=_oracle_from_dict(n, d["f"]),
        c=_oracle_from_dict(n, d["c"]),
        tie_break=d.get("tie_break", "higher_f_then_lower_index"),
        ctx=ctx,
        name=d.get("name", ""),
    )
    meta = d.get("meta", {})
    for key in _META_SCALARS:
        if key in meta:
            v = meta[key]
            inst.meta[key] = number_from_str(v) if key == "epsilon" else v
    for key in _META_NUMBER_LISTS:
        if key in meta:
            inst.meta[key] = [number_from_str(v) for v in meta[key]]
    if "analytic_breakpoints" in meta:
        table = BreakpointTable(instance=inst)
        for row in meta["analytic_breakpoints"]:
            table.breakpoints.append(
                Breakpoint(
                    position=row["position"],
                    alpha=number_from_str(row["alpha"]),
                    aset=ActionSet(n, row["mask"]),
                    f_value=number_from_str(row["f"]),
                    c_value=number_from_str(row["c"]),
                    agent_utility=number_from_str(row["agent_utility"]),
                    principal_utility=number_from_str(row["principal_utility"]),
                )
            )
        inst.meta["analytic_breakpoints"] = table
    return inst


def build_named(name: str, params: dict) -> ContractInstance:
    from . import constructions

    if name == "equal_revenue_submod_f":
        return constructions.build_equal_revenue_submod_f(
            params["n"], precision_bits=params.get("precision_bits")
        )
    if name == "equal_revenue_supmod_c":
        return constructions.build_equal_revenue_supmod_c(params["n"])
    if name == "rounded":
        return constructions.build_rounded(params["n"], grid_bits=params.get("grid_bits")).instance
    raise ValueError(f"unknown named construction {name!r}")


def _instance_from_named(d: dict) -> ContractInstance:
    spec_f, spec_c = d["f"], d["c"]
    name = spec_f.get("construction") or spec_c.get("construction")
    params = spec_f.get("params") or spec_c.get("params") or {"n": d["n"]}
    inst = build_named(name, dict(params))
    if inst.n != d["n"]:
        raise ValueError("named construction n disagrees with instance n")
    return inst


def save_instance(inst: ContractInstance, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_instance(source) -> ContractInstance:
    """Accepts a dict, a JSON string, or a file path."""
    if isinstance(source, dict):
        return instance_from_dict(source)
    text = source
    if not source.lstrip().startswith("{"):
        with open(source) as fh:
            text = fh.read()
    return instance_from_dict(json.loads(text))


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def dump_csv(rows, path=None) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text
