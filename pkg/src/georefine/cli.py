"""Command-line front end: ``georefine {refine,analyze,omega,demo}``.

Exit status 0 on success, 2 on invalid input, 3 on numerical or geodesic
domain failures. Errors are reported on one stderr line starting ``E:``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .analysis import contractivity, omega_angle, omega_boundary
from .errors import GeoRefineError, NumericError, ValidationError
from .geometry import manifold_from_json, mesh_size
from .refine import global_refine_step, make_plan
from .samples import DEMOS, demo
from .serialize import dumps, polyline_from_json, polyline_to_json, write_csv
from .symbol import Mask, SymbolFactorization, bspline_mask, factorize, order_factors, validate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"usage: {message}")


def parse_mask(text):
    """``"c0,c1,...@L"``; coefficients may be fractions such as ``1/4``."""
    body, _, first = text.partition("@")
    try:
        coeffs = [float(Fraction(c.strip())) for c in body.split(",") if c.strip()]
        first_index = int(first) if first.strip() else 0
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse mask {text!r}; expected c0,c1,...@L") from None
    if not coeffs:
        raise ValidationError("mask has no coefficients")
    return Mask(tuple(coeffs), first_index)


def parse_preset(text):
    name, _, arg = text.partition(":")
    if name != "bspline":
        raise ValidationError(f"unknown preset {text!r}; expected bspline:m")
    try:
        return bspline_mask(int(arg))
    except ValueError:
        raise ValidationError(f"preset {text!r} needs an integer degree") from None


def parse_factorization(text):
    """Inline JSON or a path to a JSON file."""
    path = Path(text)
    raw = path.read_text(encoding="utf-8") if path.is_file() else text
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"factorization is neither a file nor valid JSON: {exc.msg}") from None
    return SymbolFactorization.from_json(obj)


def parse_manifold(text):
    """``euclidean:d``, ``sphere:d``, ``so3`` or ``spd:n``."""
    kind, _, arg = text.partition(":")
    fields = {"euclidean": "dim", "sphere": "dim", "spd": "n"}
    obj = {"kind": kind}
    if kind in fields:
        try:
            obj[fields[kind]] = int(arg)
        except ValueError:
            raise ValidationError(f"manifold {text!r} needs an integer size") from None
    return manifold_from_json(obj)


def _symbol(args):
    sources = [s for s in (args.mask, args.preset, args.factorization) if s is not None]
    if len(sources) != 1:
        raise ValidationError("give exactly one of --mask, --preset, --factorization")
    if args.factorization is not None:
        return None, parse_factorization(args.factorization)
    mask = parse_mask(args.mask) if args.mask is not None else parse_preset(args.preset)
    check = validate(mask)
    if not check.ok:
        raise ValidationError(f"mask invariant violated: {check.message}")
    return mask, factorize(mask)


def _write(path, text):
    if path is None:
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def _load_polyline(args):
    try:
        obj = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {args.input}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.input} is not valid JSON: {exc.msg}") from None
    if args.manifold is not None:
        kind = parse_manifold(args.manifold)
        if isinstance(obj, dict) and "manifold" in obj and manifold_from_json(obj["manifold"]) != kind:
            raise ValidationError(f"--manifold {args.manifold} disagrees with the input file")
        obj = dict(obj, manifold=kind.to_json())
    if args.boundary is not None and isinstance(obj, dict):
        obj = dict(obj, topology=args.boundary)
    return polyline_from_json(obj)


def cmd_refine(args, out):
    p = _load_polyline(args)
    _, f = _symbol(args)
    plan = make_plan(f, p.topology)
    if args.steps < 0:
        raise ValidationError("--steps must be nonnegative")
    rows = [(len(p), mesh_size(p))]
    traces = []
    result = p
    for _ in range(args.steps):
        result, trace = global_refine_step(result, plan)
        traces.append(trace)
        rows.append((len(result), mesh_size(result)))
    print(f"{'step':>4}  {'points':>7}  {'delta':>22}  {'ratio':>10}", file=out)
    for k, (size, d) in enumerate(rows):
        prev = rows[k - 1][1] if k else 0.0
        ratio = f"{d / prev:.6f}" if prev > 0 else ""
        print(f"{k:>4}  {size:>7}  {d:>22.17g}  {ratio:>10}", file=out)
    print(f"final: {len(result)} points, delta {mesh_size(result):.17g}", file=out)
    _write(args.out, dumps(polyline_to_json(result)))
    _write(args.trace_out, dumps({"plan": plan.to_json(), "steps": [t.to_json() for t in traces]}))
    return 0


def cmd_analyze(args, out):
    mask, f = _symbol(args)
    # no plan here: the analysis also covers weights outside the extrapolation window
    f = order_factors(f)
    rep = contractivity(f)
    print(f"shift s = {f.shift}", file=out)
    print("real alphas: " + ", ".join(f"{a:.17g}" for a in f.real_alphas), file=out)
    print("complex alphas: " + (", ".join(f"{a.real:.17g}{a.imag:+.17g}i" for a in f.quadratic_alphas) or "none"), file=out)
    print(f"mu1 = {rep.mu1 if rep.mu1 is None else format(rep.mu1, '.17g')}", file=out)
    for a, x in rep.xi_factors:
        print(f"  xi({a}) = {x:.17g}", file=out)
    if rep.mu is not None:
        print(f"mu = {rep.mu:.17g}", file=out)
        print(f"displacement K = {rep.displacement_K:.17g}", file=out)
    for a, v in rep.omega_verdicts:
        print(f"  Omega({a}): {v}", file=out)
    print(f"verdict: {rep.verdict} ({rep.reason})", file=out)
    report = rep.to_json()
    if mask is not None:
        report["mask"] = mask.to_json()
    _write(args.report_out, dumps(report))
    return 0


def cmd_omega(args, out):
    if args.mu1 is None:
        raise ValidationError("--mu1 is required")
    v = omega_angle(args.mu1)
    rows = omega_boundary(args.mu1, args.samples)
    print(f"upsilon = {v:.17g}", file=out)
    if args.out is not None:
        write_csv(args.out, ["phi", "rho1", "rho2"], rows)
    else:
        for row in rows:
            print(",".join(format(float(x), ".17g") for x in row), file=out)
    return 0


def cmd_demo(args, out):
    p = demo(args.name)
    text = dumps(polyline_to_json(p))
    if args.out is None:
        out.write(text)
    else:
        _write(args.out, text)
    return 0


def build_parser():
    parser = _Parser(prog="georefine", description="Refinement of manifold-valued polylines.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def symbol_flags(p):
        p.add_argument("--mask", help='mask coefficients "c0,c1,...@L" (fractions allowed)')
        p.add_argument("--preset", help="named scheme, e.g. bspline:3")
        p.add_argument("--factorization", help="factorization JSON (inline or file)")

    r = sub.add_parser("refine", help="refine a polyline")
    r.add_argument("--input", required=True)
    r.add_argument("--manifold", help="euclidean:d, sphere:d, so3 or spd:n")
    symbol_flags(r)
    r.add_argument("--steps", type=int, default=1)
    r.add_argument("--boundary", choices=["periodic", "open"])
    r.add_argument("--out")
    r.add_argument("--trace-out")
    r.set_defaults(func=cmd_refine)

    a = sub.add_parser("analyze", help="certify convergence of a symbol")
    symbol_flags(a)
    a.add_argument("--report-out")
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("omega", help="sample the boundary of the Omega domain")
    o.add_argument("--mu1", type=float)
    o.add_argument("--samples", type=int, default=200)
    o.add_argument("--out")
    o.set_defaults(func=cmd_omega)

    d = sub.add_parser("demo", help="write a bundled data set")
    d.add_argument("name", help="one of " + ", ".join(sorted(DEMOS)))
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo)
    return parser


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except ValidationError as exc:
        print("E: " + " ".join(str(exc).split()), file=err)
        return 2
    except NumericError as exc:
        print("E: " + " ".join(str(exc).split()), file=err)
        return 3
    except GeoRefineError as exc:
        print("E: " + " ".join(str(exc).split()), file=err)
        return 2
    except OSError as exc:
        print(f"E: {exc.strerror}: {exc.filename}", file=err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
