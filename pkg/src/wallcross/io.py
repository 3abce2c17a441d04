"""JSON request parsing and result serialization."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .autom import KSFactor, cone_truncation
from .errors import InvariantError, SchemaError, WallCrossError
from .lattice import Charge, CentralChargeModel, LatticeContext, QuadraticRefinement, validate_refinement
from .scattering import LINE, RAY, RayLine, ScatteringDiagram, t_truncation
from .series import Grading, Series, TruncationContext, format_rational, parse_rational, series_from_json, series_to_json

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def resolve_input(path) -> Path:
    """Use the path if it exists, else fall back to a bundled fixture of that name."""
    p = Path(path)
    if p.exists():
        return p
    for cand in (FIXTURE_DIR / p.name, FIXTURE_DIR / f"{p.name}.json"):
        if cand.exists():
            return cand
    raise SchemaError("", f"input file {path} not found")


def load_json(path):
    p = resolve_input(path)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None


def _get(obj, key, ptr, kind=None, default=...):
    if not isinstance(obj, dict):
        raise SchemaError(ptr, "expected an object")
    if key not in obj:
        if default is ...:
            raise SchemaError(f"{ptr}/{key}", "missing field")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind is int:
        raise SchemaError(f"{ptr}/{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def _int_list(val, ptr):
    if not isinstance(val, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in val):
        raise SchemaError(ptr, "expected a list of integers")
    return val


def parse_lattice(obj, ptr="/lattice"):
    rank = _get(obj, "rank", ptr, int)
    form = _get(obj, "skew_form", ptr, list)
    for i, row in enumerate(form):
        _int_list(row, f"{ptr}/skew_form/{i}")
    basis = _get(obj, "degree_basis", ptr, list, None)
    if basis is not None:
        for i, row in enumerate(basis):
            _int_list(row, f"{ptr}/degree_basis/{i}")
    flavor = _get(obj, "flavor_subspace", ptr, list, [])
    for i, row in enumerate(flavor):
        _int_list(row, f"{ptr}/flavor_subspace/{i}")
    ctx = LatticeContext(rank, form, basis, flavor)
    signs = _get(obj, "refinement", ptr, list, None)
    if signs is None:
        signs = [-1] * rank
    ref = QuadraticRefinement(_int_list(signs, f"{ptr}/refinement"))
    if len(ref.basis_signs) != rank:
        raise InvariantError("refinement", "one sign per degree basis charge")
    if not validate_refinement(ctx, ref, box=2):
        raise InvariantError("refinement", "refinement law fails")
    model = None
    cc = _get(obj, "central_charges", ptr, list, None)
    if cc is not None:
        vals = []
        for i, z in enumerate(cc):
            zp = f"{ptr}/central_charges/{i}"
            vals.append(complex(float(_get(z, "re", zp, (int, float))), float(_get(z, "im", zp, (int, float)))))
        masses = []
        for i, z in enumerate(_get(obj, "flavor_masses", ptr, list, [])):
            zp = f"{ptr}/flavor_masses/{i}"
            masses.append(complex(float(_get(z, "re", zp, (int, float))), float(_get(z, "im", zp, (int, float)))))
        model = CentralChargeModel(ctx, vals, masses)
    return ctx, ref, model


def lattice_to_json(ctx, ref, model=None):
    out = {"rank": ctx.rank, "skew_form": [list(r) for r in ctx.skew_form],
           "degree_basis": [list(b) for b in ctx.degree_basis], "refinement": list(ref.basis_signs)}
    if ctx.flavor_subspace:
        out["flavor_subspace"] = [list(f) for f in ctx.flavor_subspace]
    if model is not None:
        out["central_charges"] = [{"re": z.real, "im": z.imag} for z in model.basis_values]
        if model.flavor_masses:
            out["flavor_masses"] = [{"re": z.real, "im": z.imag} for z in model.flavor_masses]
    return out


def parse_truncation(obj, ctx, ptr="/truncation", order=None, default_grading="degree"):
    tr = _get(obj, "truncation", "", dict) if order is None or "truncation" in obj else {}
    grading = tr.get("grading", default_grading) if isinstance(tr, dict) else default_grading
    try:
        grading = Grading(grading)
    except ValueError:
        raise SchemaError(f"{ptr}/grading", f"unknown grading {grading!r}") from None
    k = order if order is not None else _get(tr, "order", ptr, int)
    if k < 0:
        raise SchemaError(f"{ptr}/order", "must be nonnegative")
    if grading is Grading.CONE:
        return cone_truncation(ctx, k)
    if grading is Grading.SUM:
        return TruncationContext(Grading.SUM, k, ctx.degree_weights())
    return t_truncation(k)


def parse_word(val, ctx, ptr):
    if not isinstance(val, list):
        raise SchemaError(ptr, "expected a list of factors")
    out = []
    for i, f in enumerate(val):
        fp = f"{ptr}/{i}"
        ch = _int_list(_get(f, "charge", fp), f"{fp}/charge")
        om = _get(f, "omega", fp, int, 1)
        out.append(KSFactor(ctx.charge(ch), om))
    return out


def word_to_json(word):
    return [{"charge": list(f.charge), "omega": f.omega} for f in word]


def word_to_text(word):
    if not word:
        return "1"
    parts = []
    for f in word:
        g = ",".join(str(c) for c in f.charge)
        parts.append(f"K_{{{g}}}" + (f"^{f.omega}" if f.omega != 1 else ""))
    return " ".join(parts)


def parse_series(val, trunc, rank, ptr):
    if not isinstance(val, list):
        raise SchemaError(ptr, "expected a list of terms")
    for i, term in enumerate(val):
        tp = f"{ptr}/{i}"
        _get(term, "coeff", tp)
        _int_list(_get(term, "exponent", tp), f"{tp}/exponent")
        try:
            parse_rational(term["coeff"])
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"{tp}/coeff", "expected a rational string p/q") from None
    return series_from_json(val, trunc, rank)


def parse_point(val, ptr):
    if not isinstance(val, list) or len(val) != 2:
        raise SchemaError(ptr, "expected two rationals")
    try:
        return tuple(parse_rational(v) for v in val)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(ptr, "expected rational strings p/q") from None


def parse_diagram(obj, order=None):
    trunc = parse_truncation(obj, None, order=order, default_grading="t")
    if trunc.grading is not Grading.TPOWER:
        raise SchemaError("/truncation/grading", "scattering diagrams use grading 't'")
    els = []
    for i, el in enumerate(_get(obj, "elements", "", list)):
        ep = f"/elements/{i}"
        kind = _get(el, "kind", ep, str)
        if kind not in (RAY, LINE):
            raise SchemaError(f"{ep}/kind", "expected 'ray' or 'line'")
        base = parse_point(_get(el, "base", ep, list, ["0", "0"]), f"{ep}/base")
        direction = _int_list(_get(el, "direction", ep), f"{ep}/direction")
        f = parse_series(_get(el, "function", ep), trunc, 2, f"{ep}/function")
        try:
            els.append(RayLine(kind, base, Charge(direction), f, el.get("label", "")))
        except (ValueError, WallCrossError) as exc:
            raise InvariantError(f"{ep}", str(exc)) from None
    return ScatteringDiagram(els, trunc, reading=obj.get("reading", "rays"))


def diagram_to_json(d: ScatteringDiagram):
    return {
        "truncation": {"grading": "t", "order": d.trunc.order},
        "reading": d.reading,
        "elements": [
            {"kind": el.kind, "base": [format_rational(c) for c in el.base],
             "direction": list(el.direction), "function": series_to_json(el.function)}
            for el in d.sorted_elements()
        ],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
