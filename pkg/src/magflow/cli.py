"""Command-line front end.

Exit codes: 0 success, 1 validation or realizability failure, 2 non-Bott or
degenerate request, 3 parse error, 4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

import numpy as np

from .errors import DegeneracyError, MagflowError, ParseError
from .serialize import emit_json

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3, 4


def _load_pair(path: str, overrides, grid: Optional[int]):
    from .dsl import parse_profile
    from .singularity import ProfilePair
    with open(path, encoding="utf-8") as fh:
        spec = parse_profile(fh.read())
    for item in overrides or []:
        if "=" not in item:
            raise ParseError("tolerance override must look like name=value", 1, 1)
        name, value = item.split("=", 1)
        try:
            spec.tolerances[name.strip()] = float(value)
        except ValueError:
            raise ParseError("tolerance %r is not a number" % name, 1, 1) from None
    env_grid = os.environ.get("MGA_GRID")
    if grid is None and env_grid:
        grid = int(env_grid)
    if grid is not None:
        spec.tolerances["grid"] = float(grid)
    try:
        pair = ProfilePair.from_spec(spec)
    except KeyError as exc:
        raise ParseError(str(exc.args[0]) if exc.args else "unknown tolerance", 1, 1) from None
    pair.name = os.path.basename(path)
    return pair


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _require_admissible(pair):
    from .singularity import validate_admissible
    from .errors import ValidationFailed
    report = validate_admissible(pair)
    if not report.ok:
        bad = report.failures()[0]
        raise ValidationFailed("condition %d (%s) fails; witness r=%s" % (bad.condition, bad.name, bad.witness))
    return report


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    from .singularity import validate_admissible, validate_strong
    pair = _load_pair(args.spec, args.tol, args.grid)
    report = validate_admissible(pair)
    if report.ok:
        report.verdicts.extend(validate_strong(pair).verdicts)
    _write(args.json, emit_json(report.to_dict(), "validation"))
    for v in report.failures():
        w = "" if v.witness is None else " witness r=%.12g" % v.witness
        print("condition %d (%s) failed:%s %s" % (v.condition, v.name, w, v.detail), file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_classify(args) -> int:
    from .singularity import (circle_type_intervals, classify_equilibrium, critical_sets,
                              rank0_points)
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    cs = critical_sets(pair)
    L = pair.L
    eq = []
    for lo, hi in zip([0.0] + cs.rStar.values, cs.rStar.values + [L]):
        if hi - lo > 1e-9:
            eq.append(classify_equilibrium(pair, 0.5 * (lo + hi)).to_dict())
    doc = {
        "criticalSets": cs.to_dict(),
        "rank0": [p.to_dict() for p in rank0_points(pair)],
        "circleTypes": [{"rRange": [lo, hi], "type": t} for lo, hi, t in circle_type_intervals(pair)],
        "equilibria": eq,
    }
    _write(args.json, emit_json(doc, "classification"))
    return EXIT_OK


def cmd_diagram(args) -> int:
    from .bifdiag import diagram
    from .svg import render_svg
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    d = diagram(pair)
    if args.svg:
        _write(args.svg, render_svg(pair, d, args.hmax))
    if args.json or not args.svg:
        _write(args.json, emit_json(d.to_dict(), "diagram"))
    return EXIT_OK


def cmd_molecule(args) -> int:
    from .molecule import molecule_dot, reeb_molecule
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    mol = reeb_molecule(pair, args.h)
    if args.dot:
        _write(args.dot, molecule_dot(mol))
    if args.json or not args.dot:
        _write(args.json, emit_json({"molecule": mol.to_dict()}, "molecule"))
    return EXIT_OK


def cmd_complex(args) -> int:
    from .bifdiag import build_complex, complex_dot
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    cx = build_complex(pair, args.hmax)
    if args.dot:
        _write(args.dot, complex_dot(cx))
    doc = cx.to_dict()
    doc = dict({"faceCount": len(cx.faces)}, **doc)
    _write(args.json, emit_json(doc, "complex"))
    if not cx.right_adjacency_ok:
        print("right adjacency fails for some cell", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_dual(args) -> int:
    from .duality import dual_of_profile, dual_to_dict
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    dual = dual_of_profile(pair)
    doc = dual_to_dict(pair)
    doc["asymptotes"] = [p.to_dict() for p in dual.poles]
    _write(args.json, emit_json(doc, "dual"))
    return EXIT_OK


def cmd_realize(args) -> int:
    from .duality import load_dual, realize
    with open(args.curve, encoding="utf-8") as fh:
        text = fh.read()
    try:
        dual = load_dual(text)
    except (ValueError, KeyError) as exc:
        raise ParseError("bad dual-curve file: %s" % exc, 1, 1) from None
    report = realize(dual)
    doc = report.to_dict()
    if report.pair is not None:
        doc["profile"] = {"L": report.pair.L, "f.series": list(report.pair.f.coeffs),
                          "lambda.series": list(report.pair.lam.coeffs)}
    else:
        doc["profile"] = None
    _write(args.json, emit_json(doc, "realizability"))
    for v in report.verdicts:
        if not v.passed:
            print("(%s) failed at t=%s: %s" % (v.name, v.witness, v.detail), file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    from .flow import PhaseState, energy, integrate
    from .singularity import effective_potential
    pair = _load_pair(args.spec, args.tol, args.grid)
    _require_admissible(pair)
    U = float(effective_potential(pair, args.k, args.r0, 0).value)
    if args.h < U:
        raise DegeneracyError("h=%.10g is below the effective potential %.10g at r0" % (args.h, U))
    s0 = PhaseState(float(np.sqrt(2.0 * (args.h - U))), args.k, args.r0, 0.0)
    tr = integrate(pair, s0, args.time, args.dt, args.every)
    if args.csv:
        _write(args.csv, tr.to_csv())
    doc = {"maxDeltaH": tr.max_dH, "maxDeltaK": tr.max_dK, "termination": tr.termination,
           "samples": len(tr.t), "initialEnergy": float(energy(pair, s0.p_r, s0.K, s0.r)),
           "final": {"t": float(tr.t[-1]), "p_r": float(tr.p_r[-1]), "K": float(tr.K[-1]),
                     "r": float(tr.r[-1]), "phi": float(tr.phi[-1])}}
    _write(args.json, emit_json(doc, "trajectory"))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magflow", description="Singularities of integrable magnetic geodesic flows "
                                "on a sphere of revolution.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("spec", help="profile file")
        sp.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")
        sp.add_argument("--grid", type=int, default=None, help="root-finding grid size (default MGA_GRID or 4096)")
        sp.add_argument("--json", default=None, metavar="F", help="write JSON to F instead of stdout")

    sp = sub.add_parser("validate", help="check admissibility and strong genericity")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("classify", help="critical sets and circle types")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("diagram", help="bifurcation diagram")
    common(sp)
    sp.add_argument("--svg", default=None, metavar="F")
    sp.add_argument("--hmax", type=float, default=None, help="h range of the diagram pane")
    sp.set_defaults(func=cmd_diagram)

    sp = sub.add_parser("molecule", help="marked molecule on an energy level")
    common(sp)
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--dot", default=None, metavar="F")
    sp.set_defaults(func=cmd_molecule)

    sp = sub.add_parser("complex", help="bifurcation complex up to an energy")
    common(sp)
    sp.add_argument("--hmax", type=float, required=True)
    sp.add_argument("--dot", default=None, metavar="F")
    sp.set_defaults(func=cmd_complex)

    sp = sub.add_parser("dual", help="dual curve of the profile")
    common(sp)
    sp.set_defaults(func=cmd_dual)

    sp = sub.add_parser("realize", help="check a dual curve and reconstruct the profile")
    sp.add_argument("curve", help="dual-curve JSON file")
    sp.add_argument("--json", default=None, metavar="F")
    sp.set_defaults(func=cmd_realize)

    sp = sub.add_parser("simulate", help="integrate the reduced flow")
    common(sp)
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--r0", type=float, required=True)
    sp.add_argument("--time", type=float, required=True)
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--every", type=int, default=1, help="record every n-th step")
    sp.add_argument("--csv", default=None, metavar="F")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except MagflowError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INVALID
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
