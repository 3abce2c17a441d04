"""Slab gluing by fiber products, degeneration ideals and their t-fibers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import sympy as sp

from .errors import (
    InconsistentStructure,
    OrderTooLow,
    RenamingNotBijective,
)
from .lattice import Charge
from .scattering import RAY, MarkedBPSDiagram, ScatteringDiagram, is_consistent, angle_key
from .series import Series, format_rational, series_pow


@dataclass(frozen=True)
class SlabGluingSpec:
    """Data for gluing the two charts on either side of one slab.

    ``x_side`` is the monomial (exponent, t power) multiplying f^a t^e; its t
    power may be negative when it is itself written through t.
    """

    direction: Charge
    function: Series
    x_in: str
    x_out: str
    a: int = 1
    e: int = 1
    x_side: tuple = ((0, 0), 0)
    charge: Charge | None = None
    base: tuple = (0, 0)

    def __post_init__(self):
        if self.function.constant_term() != 1:
            raise ValueError("slab function must have constant term 1")
        if self.a < 1 or self.e < 1:
            raise ValueError("a and e must be at least 1")
        object.__setattr__(self, "direction", Charge(self.direction))
        exp, tp = self.x_side
        object.__setattr__(self, "x_side", (tuple(int(c) for c in exp), int(tp)))


@dataclass(frozen=True)
class GluingRelation:
    x_in: str
    x_out: str
    rhs: Series  # f^a * x_side * t^e, as a series in z and t
    lifts: Mapping
    order: int
    slab: tuple = ()

    def rhs_expr(self, glossary: "Glossary"):
        """Right-hand side in named variables, with explicit t^j for j > order dropped."""
        expr = glossary.rewrite(self.rhs)
        t = sp.Symbol("t")
        poly = sp.Poly(expr, t)
        kept = sum((c * t ** m[0] for m, c in poly.terms() if m[0] <= self.order), sp.Integer(0))
        return sp.expand(kept)

    def polynomial(self, glossary: "Glossary"):
        return sp.Symbol(self.x_in) * sp.Symbol(self.x_out) - self.rhs_expr(glossary)

    def text(self, glossary):
        return f"{self.x_in}*{self.x_out} - ({sp.sstr(sp.factor(self.rhs_expr(glossary)))})"


class Glossary:
    """Names for monomials z^m t^j so right-hand sides read in letters."""

    def __init__(self, entries: Mapping | None = None):
        self.entries = {}
        for (exp, tp), name in (entries or {}).items():
            self.entries[(tuple(exp), int(tp))] = name

    def name_for(self, exponent, t):
        exponent = tuple(exponent)
        if not any(exponent):
            return sp.Symbol("t") ** t
        for (exp, tp), name in self.entries.items():
            k = _multiple(exponent, exp)
            if k and k > 0 and t - k * tp >= 0:
                return sp.Symbol(name) ** k * sp.Symbol("t") ** (t - k * tp)
        return sp.Symbol("z_" + "_".join(str(c) for c in exponent)) * sp.Symbol("t") ** t

    def rewrite(self, s: Series):
        out = sp.Integer(0)
        for (t, e), c in s.items():
            out += sp.Rational(c.numerator, c.denominator) * self.name_for(e, t)
        return sp.expand(out)

    def to_json(self):
        return {name: {"exponent": list(e), "t": tp} for (e, tp), name in sorted(self.entries.items())}


def _multiple(v, w):
    """k with v = k*w, else None."""
    k = None
    for a, b in zip(v, w):
        if b == 0:
            if a != 0:
                return None
            continue
        if a % b:
            return None
        q = a // b
        if k is None:
            k = q
        elif k != q:
            return None
    return k


def glue_slab(spec: SlabGluingSpec, k: int) -> GluingRelation:
    """Fiber product of the two thickened charts across one slab, mod t^(k+1)."""
    if k + 1 <= spec.e:
        raise OrderTooLow(f"order {k} kills t^{spec.e}; the relation would be vacuous")
    exp, tp = spec.x_side
    if tp + spec.e < 0:
        raise OrderTooLow("side monomial carries more negative t than t^e supplies")
    # the named variables absorb their own t content, so work at an order
    # large enough to keep every term and truncate explicit t afterwards
    f = spec.function
    t_max = max((t for (t, _), _ in f.items()), default=0)
    room = f.trunc.with_order(max(f.trunc.order, k) + spec.a * t_max + spec.e + max(tp, 0))
    fa = series_pow(Series(f.terms, room, f.rank), spec.a)
    rhs = fa.shift(exp, tp + spec.e)
    lifts = {
        spec.x_in: ("x", f"f^{spec.a}*x"),
        spec.x_out: (f"f^{spec.a}*y", "y"),
    }
    _check_lifts(spec.a)
    return GluingRelation(spec.x_in, spec.x_out, rhs, lifts, k,
                          slab=(tuple(spec.base), tuple(spec.direction)))


def _check_lifts(a):
    # both components multiply to f^a x y, which equals f^a x_s t^e
    x, y, f = sp.symbols("x y f")
    left = x * (f ** a * y)
    right = (f ** a * x) * y
    if sp.expand(left - right) != 0:
        raise InconsistentStructure("lift components disagree")


@dataclass
class DegenerationIdeal:
    relations: list
    order: int
    glossary: Glossary

    def polynomials(self):
        return [r.polynomial(self.glossary) for r in self.relations]

    def polynomial_set(self):
        return {sp.expand(p) for p in self.polynomials()}

    def text_lines(self):
        return [r.text(self.glossary) for r in self.relations]


def assemble_ideal(structure, specs: Sequence[SlabGluingSpec], k: int,
                   glossary: Glossary | Mapping | None = None) -> DegenerationIdeal:
    """One gluing relation per slab; opposite slabs yielding the same
    relation are identified."""
    diagram = structure.diagram if isinstance(structure, MarkedBPSDiagram) else structure
    if not isinstance(glossary, Glossary):
        glossary = Glossary(glossary)
    d_k = diagram.with_order(k)
    if not is_consistent(d_k):
        raise InconsistentStructure(f"structure is not consistent mod t^{k + 1}")
    by_support = {}
    for el in d_k.elements:
        if el.kind == RAY:
            by_support[(el.base, tuple(el.direction))] = el
    relations = []
    seen = {}
    for spec in specs:
        key = (tuple(Fraction(c) for c in spec.base), tuple(spec.direction))
        el = by_support.get(key)
        if el is None:
            raise InconsistentStructure(f"no ray of the structure along {tuple(spec.direction)}")
        f = Series(spec.function.terms, d_k.trunc, 2)
        if f != el.function:
            raise InconsistentStructure(f"slab function along {tuple(spec.direction)} differs from the structure")
        rel = glue_slab(spec, k)
        pair = frozenset((rel.x_in, rel.x_out))
        opposite = (key[0], tuple(-c for c in key[1]))
        if pair in seen:
            prev_key, prev = seen[pair]
            if prev_key == opposite or prev_key == key:
                if sp.expand(prev.polynomial(glossary) - rel.polynomial(glossary)) != 0 and \
                        sp.expand(prev.polynomial(glossary) - _swap(rel).polynomial(glossary)) != 0:
                    raise InconsistentStructure(
                        f"opposite slabs along {tuple(spec.direction)} give different relations")
                continue
        seen[pair] = (key, rel)
        relations.append(rel)
    return DegenerationIdeal(relations, k, glossary)


def _swap(rel):
    return GluingRelation(rel.x_out, rel.x_in, rel.rhs, rel.lifts, rel.order, rel.slab)


# comparison with Fock-Goncharov relations

@dataclass
class Comparison:
    match: bool
    missing_in_fg: list = field(default_factory=list)
    missing_in_ideal: list = field(default_factory=list)

    def report(self):
        if self.match:
            return "Match"
        lines = ["Mismatch"]
        for p in self.missing_in_fg:
            lines.append(f"  ideal generator without FG partner: {p}")
        for p in self.missing_in_ideal:
            lines.append(f"  FG generator without ideal partner: {p}")
        return "\n".join(lines)


def _normal_form(expr):
    """Numerator after clearing denominators, primitive, with positive leading coefficient."""
    num, _ = sp.fraction(sp.together(sp.expand(expr)))
    num = sp.expand(num)
    if num == 0:
        return sp.Integer(0)
    syms = sorted(num.free_symbols, key=str)
    poly = sp.Poly(num, *syms) if syms else None
    if poly is None:
        return sp.Integer(1)
    _, prim = poly.primitive()
    if prim.LC() < 0:
        prim = -prim
    # strip monomial factors, which are units on the torus
    gens = prim.gens
    mins = [min(m[i] for m in prim.monoms()) for i in range(len(gens))]
    if any(mins):
        mono = sp.Mul(*[g ** e for g, e in zip(gens, mins)])
        prim = sp.Poly(sp.cancel(prim.as_expr() / mono), *gens)
    return sp.expand(prim.as_expr())


def _check_renaming(renaming, ideal_vars, fg_symbols):
    targets = [sp.sympify(v) for v in renaming.values()]
    if set(renaming) != set(ideal_vars):
        missing = sorted(set(ideal_vars) - set(renaming))
        extra = sorted(set(renaming) - set(ideal_vars))
        raise RenamingNotBijective(f"renaming keys differ from ideal variables (missing {missing}, extra {extra})")
    if len(set(targets)) != len(targets):
        raise RenamingNotBijective("two ideal variables map to the same FG expression")
    for tgt in targets:
        syms = tgt.free_symbols
        if len(syms) != 1:
            raise RenamingNotBijective(f"{tgt} is not a single FG variable or its inverse")
        (s,) = syms
        if tgt != s and tgt != 1 / s:
            raise RenamingNotBijective(f"{tgt} is not a single FG variable or its inverse")
    used = set().union(*(t.free_symbols for t in targets)) if targets else set()
    if fg_symbols and not fg_symbols <= used:
        raise RenamingNotBijective(f"FG variables {sorted(map(str, fg_symbols - used))} have no ideal partner")


def specialize_and_compare(ideal: DegenerationIdeal, t_value, fg, renaming: Mapping[str, str]) -> Comparison:
    """Set t = t_value, rename, and compare the generator sets up to units."""
    t_value = Fraction(t_value)
    tsym = sp.Symbol("t")
    polys = ideal.polynomials()
    ideal_vars = sorted({str(s) for p in polys for s in p.free_symbols} - {"t"})
    fg_exprs = [r.to_sympy() if hasattr(r, "to_sympy") else sp.sympify(r) for r in fg]
    fg_symbols = set().union(*(e.free_symbols for e in fg_exprs)) if fg_exprs else set()
    _check_renaming(renaming, ideal_vars, fg_symbols)
    subs = {sp.Symbol(k): sp.sympify(v) for k, v in renaming.items()}
    subs[tsym] = sp.Rational(t_value.numerator, t_value.denominator)
    left = {}
    for p in polys:
        nf = _normal_form(p.xreplace(subs))
        left[nf] = p
    right = {}
    for e in fg_exprs:
        right[_normal_form(e)] = e
    missing_fg = [str(left[k]) for k in left if k not in right]
    missing_ideal = [str(right[k]) for k in right if k not in left]
    return Comparison(not missing_fg and not missing_ideal, missing_fg, missing_ideal)
