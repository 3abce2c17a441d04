"""Command-line front end.

Exit codes: 0 success or match, 1 mismatch or inconsistency, 2 bad input.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .autom import compose_word, factorize_ordered
from .cluster import FGVar, fg_relations, y_system_run
from .degeneration import Glossary, SlabGluingSpec, assemble_ideal, specialize_and_compare
from .errors import (
    InconsistentPairings,
    InconsistentStructure,
    NonconvergentOrder,
    SchemaError,
    WallCrossError,
)
from .io import (
    _get,
    _int_list,
    diagram_to_json,
    dumps,
    lattice_to_json,
    load_json,
    parse_diagram,
    parse_lattice,
    parse_truncation,
    parse_word,
    word_to_json,
    word_to_text,
)
from .lattice import Charge
from .scattering import bps_initial_diagram, complete, is_consistent, nontrivial_added, spectrum_order_key
from .series import format_rational, format_series, parse_rational, series_to_json

RESULT_FAILURES = (InconsistentStructure, InconsistentPairings, NonconvergentOrder)


class Mismatch(Exception):
    """Carries a fully rendered report for exit code 1."""

    def __init__(self, report):
        self.report = report
        super().__init__("mismatch")


def _order_key(spec, ctx, model):
    kind = spec.get("type", "angle") if isinstance(spec, dict) else spec
    if kind == "angle":
        if ctx.rank != 2:
            raise SchemaError("/order_key/type", "angle ordering needs a rank-2 lattice")
        sign = -1 if spec.get("reverse", False) else 1
        return lambda g: sign * math.atan2(g[1], g[0])
    if kind == "phase":
        if model is None:
            raise SchemaError("/lattice/central_charges", "phase ordering needs central charges")
        return spectrum_order_key(model, spec.get("theta"))
    if kind == "list":
        order = [tuple(Charge(c).primitive()[0]) for c in spec.get("charges", [])]

        def key(g):
            prim = tuple(Charge(g).primitive()[0])
            if prim not in order:
                raise SchemaError("/order_key/charges", f"charge direction {prim} not listed")
            return float(order.index(prim))
        return key
    raise SchemaError("/order_key/type", f"unknown order key {kind!r}")


def cmd_factorize(data, args):
    ctx, ref, model = parse_lattice(_get(data, "lattice", ""))
    trunc = parse_truncation(data, ctx, order=args.order)
    if "target" in data:
        word = parse_word(_get(data["target"], "word", "/target"), ctx, "/target/word")
    else:
        word = parse_word(_get(data, "lhs", ""), ctx, "/lhs")
    key = _order_key(data.get("order_key", {"type": "angle", "reverse": True}), ctx, model)
    target = compose_word(ctx, ref, word, trunc)
    result = factorize_ordered(ctx, ref, target, key, trunc.order)
    return {"order": trunc.order, "word": word_to_json(result)}, word_to_text(result)


def cmd_verify(data, args):
    ctx, ref, _ = parse_lattice(_get(data, "lattice", ""))
    trunc = parse_truncation(data, ctx, order=args.order)
    lhs = parse_word(_get(data, "lhs", ""), ctx, "/lhs")
    rhs = parse_word(_get(data, "rhs", ""), ctx, "/rhs")
    a = compose_word(ctx, ref, lhs, trunc)
    b = compose_word(ctx, ref, rhs, trunc)
    verdict = f"mod degree {trunc.order + 1}"
    if a == b:
        out = {"verdict": "identity", "order": trunc.order, "lhs": word_to_json(lhs), "rhs": word_to_json(rhs)}
        return out, f"{word_to_text(lhs)} = {word_to_text(rhs)}\nidentity {verdict}"
    diffs = []
    for i, (u, v) in enumerate(zip(a.multipliers, b.multipliers)):
        if u != v:
            diffs.append({"coordinate": i, "difference": series_to_json(u - v)})
    out = {"verdict": "mismatch", "order": trunc.order, "differences": diffs}
    lines = [f"{word_to_text(lhs)} != {word_to_text(rhs)}", f"mismatch {verdict}"]
    for d, (u, v) in zip(diffs, [(a.multipliers[x["coordinate"]], b.multipliers[x["coordinate"]]) for x in diffs]):
        lines.append(f"  X{d['coordinate'] + 1}: lhs - rhs = {format_series(u - v)}")
    raise Mismatch((out, "\n".join(lines)))


def cmd_spectrum(data, args):
    ctx, ref, model = parse_lattice(_get(data, "lattice", ""))
    if model is None:
        raise SchemaError("/lattice/central_charges", "missing field")
    trunc = parse_truncation(data, ctx, order=args.order)
    word = parse_word(_get(data, "generator", ""), ctx, "/generator")
    theta = data.get("theta")
    S = compose_word(ctx, ref, word, trunc)
    result = factorize_ordered(ctx, ref, S, spectrum_order_key(model, theta), trunc.order)
    return {"order": trunc.order, "word": word_to_json(result)}, word_to_text(result)


def cmd_complete(data, args):
    d = parse_diagram(data, order=args.order)
    c = complete(d, threads=args.threads)
    added = {el.support_key() for el in nontrivial_added(d, c)}
    out = diagram_to_json(c)
    out["consistent"] = is_consistent(c)
    rows = ["kind\tbase\tdirection\tadded\tfunction"]
    for el in c.sorted_elements():
        base = ",".join(format_rational(x) for x in el.base)
        direction = ",".join(str(x) for x in el.direction)
        rows.append(f"{el.kind}\t{base}\t{direction}\t{'yes' if el.support_key() in added else 'no'}\t"
                    f"{format_series(el.function, ['x', 'y'])}")
    if args.plot:
        from .plotting import plot_diagram
        plot_diagram(c, args.plot)
    return out, "\n".join(rows)


def cmd_ysystem(data, args):
    b = _get(data, "exponent", "", int)
    steps = _get(data, "steps", "", int, 10)
    x1 = data.get("x1")
    y1 = data.get("y1")
    try:
        x1 = None if x1 is None else parse_rational(x1)
        y1 = None if y1 is None else parse_rational(y1)
    except (ValueError, ZeroDivisionError):
        raise SchemaError("/x1", "expected rational strings p/q") from None
    seq, period = y_system_run(b, x1, y1, steps)
    fmt = (lambda v: v) if x1 is None or y1 is None else format_rational
    orbit = [[fmt(x), fmt(y)] for x, y in seq]
    out = {"exponent": b, "steps": steps, "orbit": orbit, "period": period}
    lines = [f"n={n + 1}\tx={x}\ty={y}" for n, (x, y) in enumerate(orbit)]
    lines.append(f"period\t{period if period is not None else 'none'}")
    return out, "\n".join(lines)


def _structure(data, args):
    ctx, ref, _ = parse_lattice(_get(data, "lattice", ""))
    tr = _get(data, "truncation", "", dict)
    k = args.order if args.order is not None else _get(tr, "order", "/truncation", int)
    spectrum = []
    for i, item in enumerate(_get(data, "spectrum", "", list)):
        p = f"/spectrum/{i}"
        spectrum.append((ctx.charge(_int_list(_get(item, "charge", p), f"{p}/charge")),
                         _get(item, "omega", p, int, 1),
                         Charge(_int_list(_get(item, "direction", p), f"{p}/direction"))))
    l = _get(data, "l", "", int, 1)
    exps = [l * om for _, om, _ in spectrum]
    build = max([k] + [e for e in exps if e > 0])
    marked = bps_initial_diagram(spectrum, ctx, ref, l=l, order=build)
    diagram = complete(marked.diagram) if data.get("complete", False) else marked.diagram
    by_dir = {tuple(el.direction): el for el in diagram.elements}
    specs = []
    for i, s in enumerate(_get(data, "slabs", "", list)):
        p = f"/slabs/{i}"
        direction = tuple(_int_list(_get(s, "direction", p), f"{p}/direction"))
        if direction not in by_dir:
            raise InconsistentStructure(f"no ray along {direction} in the structure")
        side = s.get("x_side", {"exponent": [0, 0], "t": 0})
        specs.append(SlabGluingSpec(
            direction, by_dir[direction].function,
            _get(s, "x_in", p, str), _get(s, "x_out", p, str),
            _get(s, "a", p, int, 1), _get(s, "e", p, int, 1),
            (tuple(_int_list(_get(side, "exponent", f"{p}/x_side"), f"{p}/x_side/exponent")),
             _get(side, "t", f"{p}/x_side", int, 0))))
    gl = {}
    for name, mono in _get(data, "glossary", "", dict, {}).items():
        gp = f"/glossary/{name}"
        gl[(tuple(_int_list(_get(mono, "exponent", gp), f"{gp}/exponent")), _get(mono, "t", gp, int, 0))] = name
    ideal = assemble_ideal(diagram, specs, k, Glossary(gl))
    return ctx, ref, ideal


def _ideal_json(ideal):
    rels = []
    for r in ideal.relations:
        rels.append({"lhs": [r.x_in, r.x_out], "rhs": series_to_json(r.rhs),
                     "relation": r.text(ideal.glossary),
                     "lifts": {k: list(v) for k, v in r.lifts.items()}})
    return {"order": ideal.order, "relations": rels, "glossary": ideal.glossary.to_json()}


def cmd_glue(data, args):
    _, _, ideal = _structure(data, args)
    return _ideal_json(ideal), "\n".join(ideal.text_lines())


def cmd_compare(data, args):
    ctx, ref, ideal = _structure(data, args)
    fgd = _get(data, "fg", "", dict)
    chain = []
    for i, v in enumerate(_get(fgd, "chain", "/fg", list)):
        p = f"/fg/chain/{i}"
        ch = v.get("charge")
        chain.append(FGVar(_get(v, "name", p, str),
                           None if ch is None else ctx.charge(_int_list(ch, f"{p}/charge")),
                           v.get("omega", 1), v.get("a"), v.get("sigma"), v.get("alias")))
    rels = fg_relations(chain, ctx, ref, fgd.get("slabs"), fgd.get("cyclic", False))
    t_value = args.t if args.t is not None else data.get("t", "1")
    try:
        t_value = parse_rational(t_value)
    except (ValueError, ZeroDivisionError):
        raise SchemaError("/t", "expected a rational") from None
    renaming = _get(data, "renaming", "", dict)
    cmp = specialize_and_compare(ideal, t_value, rels, renaming)
    out = {"t": format_rational(t_value), "ideal": [r.text(ideal.glossary) for r in ideal.relations],
           "fg": [r.text() for r in rels], "renaming": renaming,
           "verdict": "Match" if cmp.match else "Mismatch",
           "missing_in_fg": cmp.missing_in_fg, "missing_in_ideal": cmp.missing_in_ideal}
    lines = ["ideal:"] + [f"  {x}" for x in out["ideal"]] + ["fg:"] + [f"  {x}" for x in out["fg"]]
    lines.append(cmp.report())
    if not cmp.match:
        raise Mismatch((out, "\n".join(lines)))
    return out, "\n".join(lines)


VERBS = {
    "complete": cmd_complete,
    "factorize": cmd_factorize,
    "verify-wcf": cmd_verify,
    "spectrum-generator": cmd_spectrum,
    "ysystem": cmd_ysystem,
    "glue": cmd_glue,
    "compare-fiber": cmd_compare,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="wallcross", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("verb", choices=sorted(VERBS))
    parser.add_argument("input", help="JSON request (bare fixture names resolve to bundled examples)")
    parser.add_argument("--order", type=int, default=None)
    parser.add_argument("--t", default=None, help="rational value of t for compare-fiber")
    parser.add_argument("--format", choices=("json", "text"), default="text")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--output", default=None)
    parser.add_argument("--plot", default=None, help="figure path for complete (png/svg/pdf)")
    return parser


def _emit(text, args, stream):
    if args.output:
        Path(args.output).write_text(text)
    else:
        stream.write(text)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.threads < 1:
        stderr.write("error: --threads must be positive\n")
        return 2
    if args.order is not None and args.order < 0:
        stderr.write("error: --order must be nonnegative\n")
        return 2
    try:
        data = load_json(args.input)
        if not isinstance(data, dict):
            raise SchemaError("", "top level must be an object")
        out, text = VERBS[args.verb](data, args)
        code = 0
    except Mismatch as m:
        out, text = m.report
        code = 1
    except RESULT_FAILURES as exc:
        stderr.write(f"{exc.name}: {exc}\n")
        return 1
    except WallCrossError as exc:
        stderr.write(f"{exc.name}: {exc}\n")
        return 2
    except (ValueError, TypeError, KeyError) as exc:
        stderr.write(f"InputError: {exc}\n")
        return 2
    rendered = dumps(out) if args.format == "json" else text + "\n"
    _emit(rendered, args, stdout)
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
