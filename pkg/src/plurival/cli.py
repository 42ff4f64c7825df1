"""``plurival`` command-line front end.

Rationals are written ``p/q``, vectors comma-separated.  Toric weights are
``piece;piece[@scale]`` (e.g. ``2,0;0,3@1/2``), ideals ``gen;gen``; both also
accept inline JSON or a path to a JSON file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from importlib import resources

from . import __version__
from .approximation import green_approximant, pointwise_convergence, product_grid
from .errors import PlurivalError, PreconditionError, ValidationError, VerificationError
from .integrability import (
    JumpingQuery,
    divides,
    inclusion_equivalence,
    jumping_number,
    lct,
    multiplier_ideal,
    thmA_check,
    zhou_valuation,
)
from .integrals import _closed_form_exact, mass_asymptotics, sublevel_closed_form, sublevel_monte_carlo
from .lattice import MonomialIdeal, as_rational, format_rational
from .tian import tian_function
from .weights import DiagonalZhouWeight, ReferencePair, ToricWeight, relative_type

# ---------------------------------------------------------------------------
# Parsing


def parse_vector(text: str) -> tuple:
    try:
        return tuple(as_rational(x.strip()) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse vector {text!r}: {exc}") from exc


def parse_int_vector(text: str) -> tuple:
    vec = parse_vector(text)
    if any(x.denominator != 1 for x in vec):
        raise ValidationError(f"integer vector expected, got {text!r}")
    return tuple(int(x) for x in vec)


def _load_json(text: str):
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    if text.endswith(".json") and os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    return None


def parse_weight(text: str) -> ToricWeight:
    data = _load_json(text)
    if data is not None:
        return ToricWeight.from_json(data)
    body, _, scale = text.partition("@")
    pieces = tuple(parse_vector(p) for p in body.split(";") if p.strip())
    return ToricWeight(pieces, as_rational(scale) if scale else Fraction(1))


def parse_ideal(text: str) -> MonomialIdeal:
    data = _load_json(text)
    if data is not None:
        return MonomialIdeal.from_json(data)
    gens = tuple(parse_int_vector(g) for g in text.split(";") if g.strip())
    if not gens:
        raise ValidationError("empty ideal")
    return MonomialIdeal(len(gens[0]), gens)


def parse_range(text: str, kind=as_rational) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"range must be lo:hi, got {text!r}")
    return kind(parts[0]), kind(parts[1])


def parse_t_grid(text: str) -> tuple:
    """``lo:hi:geometric`` (powers of 2), ``lo:hi:k`` (k even steps) or a comma list."""
    if ":" not in text:
        return parse_vector(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"t-grid must be lo:hi:geometric or lo:hi:steps, got {text!r}")
    lo, hi = as_rational(parts[0]), as_rational(parts[1])
    if lo <= 0 or hi <= lo:
        raise ValidationError("t-grid needs 0 < lo < hi")
    if parts[2] == "geometric":
        out, t = [], lo
        while t <= hi:
            out.append(t)
            t *= 2
        return tuple(out)
    steps = int(parts[2])
    if steps < 2:
        raise ValidationError("t-grid needs at least 2 steps")
    return tuple(lo + (hi - lo) * k / (steps - 1) for k in range(steps))


def _diagonal(args) -> DiagonalZhouWeight:
    return DiagonalZhouWeight(parse_vector(args.a), as_rational(args.scale))


def _weight(args, attr="weight"):
    text = getattr(args, attr, None)
    if text:
        return parse_weight(text)
    if getattr(args, "a", None):
        return _diagonal(args).toric
    raise ValidationError(f"--{attr} or --a is required")


def _reference(args, dim) -> ReferencePair:
    f0 = parse_ideal(args.f0) if getattr(args, "f0", None) else MonomialIdeal.unit(dim)
    phi0 = parse_weight(args.phi0) if getattr(args, "phi0", None) else ToricWeight.zero(dim)
    return ReferencePair(f0, phi0)


# ---------------------------------------------------------------------------
# Output


def _cell(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, tuple):
        return ",".join(_cell(y) for y in x)
    return str(x)


def _json_value(x):
    if isinstance(x, Fraction):
        return {"exact": format_rational(x), "decimal": float(x)}
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, tuple):
        return [_json_value(y) for y in x]
    return x


def render(result, fmt: str) -> str:
    """``result`` is a scalar or a list of row dicts."""
    if fmt == "json":
        if isinstance(result, list):
            payload = [{k: _json_value(v) for k, v in row.items()} for row in result]
        else:
            payload = _json_value(result)
        return json.dumps(payload, sort_keys=True) + "\n"
    if not isinstance(result, list):
        return _cell(result) + "\n"
    buf = io.StringIO()
    if result:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(result[0].keys())
        for row in result:
            writer.writerow(_cell(v) for v in row.values())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands


def cmd_lct(args):
    return lct(_weight(args))


def cmd_jump(args):
    w = _weight(args)
    g = parse_ideal(args.g)
    twist = parse_weight(args.phi0) if args.phi0 else None
    return jumping_number(JumpingQuery(w, g, twist))


def cmd_type(args):
    psi = parse_weight(args.psi)
    phi = parse_weight(args.phi) if args.phi else _diagonal(args)
    return relative_type(psi, phi)


def cmd_valuation(args):
    return zhou_valuation(parse_int_vector(args.g), _diagonal(args))


def cmd_mideal(args):
    I = multiplier_ideal(_weight(args), as_rational(args.t))
    return [{f"alpha{j + 1}": x for j, x in enumerate(g)} for g in I.generators]


def cmd_tian(args):
    w = _weight(args)
    f = parse_vector(args.f) if args.f else None
    v = parse_weight(args.v) if args.v else None
    T = tian_function(w, f=f, psi=v, ref=_reference(args, w.dim), t_range=parse_range(args.range))
    return [{"breakpoint": t, "value": val, "slope": s} for t, val, s in T.rows()]


def cmd_integral(args):
    phi = _diagonal(args)
    ref = _reference(args, phi.dim)
    grid = parse_t_grid(args.t_grid)
    if args.mode == "mass":
        rep = mass_asymptotics(ref, phi, grid)
        return [
            {"t": t, "mass": m, "scaled_mass": s, "log_rate": r, "normalized": rep.normalized}
            for t, m, s, r in zip(rep.t_grid, rep.masses, rep.scaled, rep.log_rates)
        ]
    psi = parse_weight(args.psi) if args.psi else None
    method = args.method
    if method == "auto":
        try:
            _closed_form_exact(ref, phi, psi, grid[0])
            method = "closed"
        except PreconditionError:
            method = "mc"
    rows = []
    for t in grid:
        if method == "closed":
            r = sublevel_closed_form(ref, phi, psi, t)
        else:
            if args.seed is None:
                raise ValidationError("--seed is mandatory for Monte Carlo integrals")
            r = sublevel_monte_carlo(ref, phi, psi, t, args.samples, args.seed, args.workers)
        rows.append({"t": t, "mass": r.mass, "moment": r.moment, "ratio": r.ratio, "stderr": r.stderr})
    return rows


def cmd_approx(args):
    phi = _diagonal(args)
    lo, hi = parse_range(args.m, int)
    glo, ghi, steps = args.grid.split(":")
    grid = product_grid(float(glo), float(ghi), int(steps), phi.dim)
    rep = pointwise_convergence(phi, grid, range(lo, hi + 1))
    return [{"m": m, "sigma_m": s, "sup_gap": g, "bound_ok": ok} for m, s, g, ok in rep.rows()]


def cmd_thmA(args):
    rep = thmA_check(parse_ideal(args.ideal), parse_weight(args.weight), as_rational(args.resolution))
    return [{
        "jumping_number": rep.lhs,
        "a_star": rep.a_star or "",
        "sigma_at_a_star": rep.sigma_at_a_star if rep.sigma_at_a_star is not None else "",
        "product": rep.product if rep.product is not None else "",
        "grid_max": rep.grid_max,
        "grid_points": rep.grid_points,
        "grid_exceeds": rep.grid_exceeds,
        "ok": rep.ok,
    }]


def cmd_include(args):
    v = inclusion_equivalence(parse_weight(args.u), parse_weight(args.v), t_max=args.t_max)
    return [{
        "sigma_le": v.sigma_le,
        "ideals_included": v.ideals_included,
        "agree": v.agree,
        "sigma_witness": v.sigma_witness or "",
        "ideal_witness": _cell(v.ideal_witness[0]) + ":" + _cell(v.ideal_witness[1]) if v.ideal_witness else "",
    }]


def cmd_divides(args):
    d = divides(parse_int_vector(args.f), parse_int_vector(args.g))
    return [{"componentwise": d.componentwise, "valuative": d.valuative, "agree": d.agree, "witness": d.witness or ""}]


def cmd_green(args):
    z = tuple(float(x) for x in args.z.split(","))
    return green_approximant(args.m, len(z), z)


def cmd_verify(args):
    from .verify import SUITES, run_all

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        raise ValidationError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all")
    results = run_all(args.seed, names)
    report = {"suites": [r.to_json() for r in results], "passed": all(r.ok for r in results)}
    return report, results


# ---------------------------------------------------------------------------
# Job specs


def _schema(name: str) -> dict:
    return json.loads(resources.files("plurival").joinpath("schemas", name).read_text(encoding="utf-8"))


def job_argv(spec: dict) -> list:
    import jsonschema

    try:
        jsonschema.validate(spec, _schema("jobspec.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"job spec invalid: {exc.message}") from exc
    argv = [spec["command"]]
    for key, val in spec.get("args", {}).items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
            continue
        if isinstance(val, (dict, list)):
            val = json.dumps(val)
        argv += [flag, str(val)]
    if "output" in spec:
        argv += ["--output", spec["output"]]
    if "output_path" in spec:
        argv += ["--out", spec["output_path"]]
    return argv


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # malformed arguments are validation errors (exit 1)
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plurival", description="Exact invariants of toric plurisubharmonic weights.")
    p.add_argument("--version", action="version", version=f"plurival {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--output", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="write to this path instead of stdout")
        sp.set_defaults(func=fn)
        return sp

    def diag(sp, required=False):
        sp.add_argument("--a", required=required, help="diagonal direction, sum 1/a_j = 1")
        sp.add_argument("--scale", default="1")

    def ref(sp):
        sp.add_argument("--f0", help="reference ideal (default: unit)")
        sp.add_argument("--phi0", help="reference twist weight (default: 0)")

    sp = add("lct", cmd_lct, "log canonical threshold of a weight")
    sp.add_argument("--weight")
    diag(sp)
    sp = add("jump", cmd_jump, "jumping number of |g|^2 e^{-2c weight}")
    sp.add_argument("--g", required=True, help="exponent or ideal")
    sp.add_argument("--weight")
    sp.add_argument("--phi0", help="optional twist weight")
    diag(sp)
    sp = add("type", cmd_type, "relative type sigma(psi, phi)")
    sp.add_argument("--psi", required=True)
    sp.add_argument("--phi")
    diag(sp)
    sp = add("valuation", cmd_valuation, "Zhou valuation of a monomial")
    sp.add_argument("--g", required=True)
    diag(sp, required=True)
    sp = add("mideal", cmd_mideal, "generators of the multiplier ideal I(t weight)")
    sp.add_argument("--weight")
    sp.add_argument("--t", required=True)
    diag(sp)
    sp = add("tian", cmd_tian, "exact Tian function breakpoints")
    sp.add_argument("--weight")
    sp.add_argument("--f", help="monomial exponent raised to the power t")
    sp.add_argument("--v", help="weight multiplied by t")
    sp.add_argument("--range", default="-1:4")
    diag(sp)
    ref(sp)
    sp = add("integral", cmd_integral, "sublevel-set mass and moment integrals")
    sp.add_argument("--mode", choices=("ratio", "mass"), default="ratio")
    sp.add_argument("--psi")
    sp.add_argument("--t-grid", default="1:32:geometric")
    sp.add_argument("--method", choices=("auto", "closed", "mc"), default="auto")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--workers", type=int, default=1)
    diag(sp, required=True)
    ref(sp)
    sp = add("approx", cmd_approx, "multiplier-ideal approximation of a diagonal weight")
    diag(sp, required=True)
    sp.add_argument("--m", default="1:64")
    sp.add_argument("--grid", default="0.1:0.9:17")
    sp = add("thmA", cmd_thmA, "jumping number versus sup over diagonal Zhou weights")
    sp.add_argument("--ideal", required=True)
    sp.add_argument("--weight", required=True)
    sp.add_argument("--resolution", default="1/100")
    sp = add("include", cmd_include, "multiplier-ideal inclusion versus Zhou numbers")
    sp.add_argument("--u", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--t-max", type=int, default=20)
    sp = add("divides", cmd_divides, "monomial division, componentwise and valuative")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp = add("green", cmd_green, "Green-function approximant on the unit polydisc")
    sp.add_argument("--z", required=True)
    sp.add_argument("--m", type=int, default=1)
    sp = add("verify", cmd_verify, "run theorem suites")
    sp.add_argument("--suite", default="all")
    sp.add_argument("--seed", type=int, default=20240601)
    sp = add("run", None, "run a JSON job spec")
    sp.add_argument("--spec", required=True)
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            spec = _load_json(args.spec)
            if spec is None:
                raise ValidationError(f"cannot read job spec {args.spec!r}")
            return main(job_argv(spec))
        if args.command == "verify":
            report, results = args.func(args)
            if args.output == "json":
                _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
            else:
                _emit("".join(r.line() + "\n" for r in results), args.out)
            failed = [r for r in results if not r.ok]
            if failed:
                raise VerificationError(
                    f"{len(failed)} suite(s) failed", anchor=",".join(r.anchor for r in failed)
                )
            return 0
        _emit(render(args.func(args), args.output), args.out)
        return 0
    except VerificationError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "anchor": exc.anchor}) + "\n")
        return exc.exit_code
    except PlurivalError as exc:
        sys.stderr.write(f"plurival: error: {exc}\n")
        return exc.exit_code


def entry():  # pragma: no cover - console script
    sys.exit(main())
