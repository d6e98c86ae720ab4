"""Command-line entry point (``esum-lab``).

All inputs are JSON documents (schemas under ``docs/schemas/``); all
subcommands print JSON to stdout.  ``verify`` runs the deterministic case
suite and exits nonzero when any non-loose case fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import derivations as dv
from . import esum as es
from . import gamma as gm
from . import jsum as js
from . import lattice as lt
from .verify import emit_tables, report_csv, verify_all


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_values(raw):
    """Coefficients as numbers or [re, im] pairs."""
    out = []
    for v in raw:
        if isinstance(v, (list, tuple)):
            out.append(complex(v[0], v[1]))
        else:
            out.append(complex(v))
    return np.asarray(out, dtype=complex)


def _emit(payload):
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _summand_from_dict(s):
    algebra = es.FiniteAlgebra(s["structure"], es.coordinate_norm_from_json(s["norm"]))
    if "dim" in s and algebra.dim != int(s["dim"]):
        raise ValueError(f"declared dim {s['dim']} disagrees with the structure cube")
    return algebra


def _algebra_from_dict(d):
    summands = [_summand_from_dict(s) for s in d["summands"]]
    lattice = lt.spec_from_dict(d["lattice"])
    return es.ESumAlgebra(summands, lattice)


def _element_from_dict(algebra, d):
    return algebra.element([_parse_values(v) for v in d["values"]])


def _finite_algebra_from_dict(d):
    if "summands" in d:
        return _algebra_from_dict(d).as_finite_algebra()
    return es.FiniteAlgebra(d["structure"], es.coordinate_norm_from_json(d["norm"]))


def cmd_norm(args):
    spec = lt.load_spec(args.spec)
    vec = _parse_values(_load(args.vector))
    _emit({"norm": lt.norm_eval(spec, vec)})


def cmd_ce(args):
    spec = lt.load_spec(args.spec)
    _emit(lt.ce_constant(spec).as_dict())


def cmd_esum_norm(args):
    algebra = _algebra_from_dict(_load(args.algebra))
    element = _element_from_dict(algebra, _load(args.element))
    _emit({"norm": es.esum_norm(element)})


def cmd_esum_mul(args):
    algebra = _algebra_from_dict(_load(args.algebra))
    x = _element_from_dict(algebra, _load(args.x))
    y = _element_from_dict(algebra, _load(args.y))
    out = es.esum_mul(x, y)
    _emit({
        "values": [[ [v.real, v.imag] for v in vec ] for vec in out.values],
        "norm": es.esum_norm(out),
    })


def cmd_bai_check(args):
    algebra = _algebra_from_dict(_load(args.algebra))
    _emit(es.unit_and_bai_bound_check(algebra))


def cmd_am(args):
    spec = lt.load_spec(args.spec)
    budget = gm.BracketBudget(scale=args.budget)
    bracket = gm.am_pointwise(args.n, spec, budget=budget,
                              rng=np.random.default_rng(args.seed))
    payload = bracket.as_dict()
    if not args.witnesses:
        payload.pop("witness_lower")
        payload.pop("witness_upper")
    _emit(payload)


def cmd_jnorm(args):
    system = js.system_from_dict(_load(args.system))
    element = js.JElement(system, [_parse_values(c) for c in _load(args.element)["coords"]])
    _emit({"jnorm": js.jnorm(element)})


def cmd_jcheck(args):
    system = js.system_from_dict(_load(args.system))
    rng = np.random.default_rng(args.seed)
    x = js.JElement(system, [
        rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in system.dims
    ])
    report = {"bimonotone": js.bimonotone_check(x, samples=args.samples, rng=rng)}
    report["bimonotone"]["violations"] = len(report["bimonotone"]["violations"])
    if system.has_algebra:
        report["omega_submultiplicative"] = js.omega_submult_check(
            system, samples=args.samples, rng=rng)
    _emit(report)


def cmd_wa(args):
    algebra = _finite_algebra_from_dict(_load(args.algebra))
    rep = dv.derivation_space(algebra)
    flag, _ = dv.is_weakly_amenable(algebra, rep)
    out = rep.as_dict()
    out["weakly_amenable"] = flag
    out["essential"] = dv.essential_check(algebra)
    _emit(out)


def cmd_wam(args):
    algebra = _finite_algebra_from_dict(_load(args.algebra))
    _emit(dv.wam_bracket(algebra, samples=args.samples, seed=args.seed))


def cmd_lp_demo(args):
    base = _finite_algebra_from_dict(_load(args.base))
    if args.psi:
        psi = _parse_values(_load(args.psi))
    elif isinstance(base.norm, es.MatrixOperatorNorm) and base.norm.side >= 2:
        psi = np.zeros(base.dim)
        psi[1] = 1.0   # the (1,2) matrix-unit functional
    else:
        raise SystemExit("--psi is required unless the base is a matrix algebra")
    sizes = [int(s) for s in args.sizes.split(",")]
    _emit(dv.lp_obstruction_demo(base, psi, args.p, sizes, seed=args.seed))


def cmd_verify(args):
    start = time.perf_counter()
    report = verify_all(seed=args.seed, budget=args.budget)
    elapsed = time.perf_counter() - start
    if args.out:
        formats = ("csv", "json") if args.format == "both" else (args.format,)
        for path in emit_tables(report, args.out, formats=formats):
            print(f"wrote {path}", file=sys.stderr)
    print(report_csv(report), end="")
    counts = {}
    for row in report["cases"]:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
    print(f"# {counts} in {elapsed:.1f}s", file=sys.stderr)
    return 0 if report["passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="esum-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="evaluate a lattice norm on a vector")
    p.add_argument("--spec", required=True)
    p.add_argument("--vector", required=True)
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("ce", help="uniformity constant of a norm spec")
    p.add_argument("--spec", required=True)
    p.set_defaults(fn=cmd_ce)

    p = sub.add_parser("esum-norm", help="norm of an element of a summed algebra")
    p.add_argument("--algebra", required=True)
    p.add_argument("--element", required=True)
    p.set_defaults(fn=cmd_esum_norm)

    p = sub.add_parser("esum-mul", help="coordinatewise product of two elements")
    p.add_argument("--algebra", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(fn=cmd_esum_mul)

    p = sub.add_parser("bai-check", help="unit norm versus indicator norms")
    p.add_argument("--algebra", required=True)
    p.set_defaults(fn=cmd_bai_check)

    p = sub.add_parser("am", help="diagonal tensor-norm bracket for C^n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--witnesses", action="store_true")
    p.set_defaults(fn=cmd_am)

    p = sub.add_parser("jnorm", help="chain-sum norm of an element")
    p.add_argument("--system", required=True)
    p.add_argument("--element", required=True)
    p.set_defaults(fn=cmd_jnorm)

    p = sub.add_parser("jcheck", help="sampled window/limit checks on a system")
    p.add_argument("--system", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_jcheck)

    p = sub.add_parser("wa", help="derivation-space weak amenability decision")
    p.add_argument("--algebra", required=True)
    p.set_defaults(fn=cmd_wa)

    p = sub.add_parser("wam", help="weak amenability constant bracket")
    p.add_argument("--algebra", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_wam)

    p = sub.add_parser("lp-demo", help="per-coordinate growth obstruction demo")
    p.add_argument("--base", required=True, help="base algebra JSON")
    p.add_argument("--psi", default=None, help="dual coefficient vector JSON")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--sizes", default="2,4,8")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_lp_demo)

    p = sub.add_parser("verify", help="run the full deterministic case suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json", "both"], default="both")
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    code = args.fn(args)
    return 0 if code is None else code


if __name__ == "__main__":
    raise SystemExit(main())
