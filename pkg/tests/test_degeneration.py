import pytest
import sympy as sp

from wallcross.cluster import FGVar, fg_relations
from wallcross.degeneration import (
    Glossary,
    SlabGluingSpec,
    assemble_ideal,
    glue_slab,
    specialize_and_compare,
)
from wallcross.errors import InconsistentStructure, OrderTooLow, RenamingNotBijective
from wallcross.lattice import LatticeContext, QuadraticRefinement
from wallcross.scattering import bps_initial_diagram, complete, t_truncation
from wallcross.series import Series

REF = QuadraticRefinement((-1, -1))
GLOSSARY = Glossary({((1, 0), 0): "X", ((-1, 0), 1): "Y", ((0, 1), 0): "Z", ((0, -1), 1): "W"})
X, Y, Z, W, P, t = sp.symbols("X Y Z W P t")
SLABS = [((1, 0), "Z", "W"), ((-1, 0), "Z", "W"), ((0, 1), "X", "Y"), ((0, -1), "X", "Y")]


def structure(pairing, l, order, do_complete=False):
    ctx = LatticeContext(2, [[0, pairing], [-pairing, 0]])
    spectrum = [((1, 0), 1, (-1, 0)), ((0, 1), 1, (0, -1))]
    d = bps_initial_diagram(spectrum, ctx, REF, l=l, order=max(order, l)).diagram
    return complete(d) if do_complete else d


def specs_for(d, slabs):
    by_dir = {tuple(el.direction): el.function for el in d.elements}
    return [SlabGluingSpec(direction, by_dir[direction], a, b, **kw) for direction, a, b, *rest in slabs
            for kw in [rest[0] if rest else {}]]


def test_glue_slab_example():
    f = Series({(0, (0, 0)): 1, (1, (-1, 0)): 1}, t_truncation(1), 2)
    rel = glue_slab(SlabGluingSpec((1, 0), f, "Z", "W"), 1)
    assert sp.expand(rel.polynomial(GLOSSARY) - (Z * W - (1 + Y) * t)) == 0
    assert rel.lifts == {"Z": ("x", "f^1*x"), "W": ("f^1*y", "y")}


def test_glue_trivial_function_is_toric():
    f = Series.one(t_truncation(2), 2)
    rel = glue_slab(SlabGluingSpec((1, 0), f, "A", "B", x_side=((1, 1), 0)), 2)
    assert sp.expand(rel.polynomial(Glossary({((1, 1), 0): "S"})) - (sp.Symbol("A") * sp.Symbol("B") - sp.Symbol("S") * t)) == 0


def test_glue_order_too_low():
    f = Series.one(t_truncation(1), 2)
    with pytest.raises(OrderTooLow):
        glue_slab(SlabGluingSpec((1, 0), f, "A", "B", e=2), 1)


def test_ad_strong_ideal():
    d = structure(1, 1, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    assert ideal.polynomial_set() == {sp.expand(X * Y - (1 + W) * t), sp.expand(Z * W - (1 + Y) * t)}


def test_ad_weak_ideal():
    d = structure(1, 1, 2, do_complete=True)
    gl = Glossary({**GLOSSARY.entries, ((1, 1), 0): "P"})
    slabs = SLABS + [((-1, -1), "X", "Z", {"e": 2, "x_side": ((1, 1), -2)})]
    ideal = assemble_ideal(d, specs_for(d, slabs), 2, gl)
    assert ideal.polynomial_set() == {sp.expand(X * Y - (1 + W) * t), sp.expand(Z * W - (1 + Y) * t),
                                      sp.expand(X * Z - (t**2 + P))}


def test_su2_ideal():
    d = structure(2, 2, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    assert ideal.polynomial_set() == {sp.expand(X * Y - (1 + W) ** 2 * t), sp.expand(Z * W - (1 + Y) ** 2 * t)}


def test_order_compatibility():
    d = structure(1, 1, 3, do_complete=True)
    i3 = assemble_ideal(d, specs_for(d, SLABS), 3, GLOSSARY)
    i2 = assemble_ideal(d, specs_for(d, SLABS), 2, GLOSSARY)
    reduced = set()
    for p in i3.polynomials():
        poly = sp.Poly(p, t)
        reduced.add(sp.expand(sum(c * t**m[0] for m, c in poly.terms() if m[0] <= 2)))
    assert reduced == i2.polynomial_set()


def test_inconsistent_structure():
    d = structure(1, 1, 2)  # initial rays only, not consistent at t^2
    with pytest.raises(InconsistentStructure):
        assemble_ideal(d, specs_for(d, SLABS), 2, GLOSSARY)


def test_slab_function_must_match():
    d = structure(1, 1, 1)
    wrong = Series({(0, (0, 0)): 1, (1, (0, -1)): 1}, t_truncation(1), 2)
    with pytest.raises(InconsistentStructure):
        assemble_ideal(d, [SlabGluingSpec((1, 0), wrong, "Z", "W")], 1, GLOSSARY)


CTX = LatticeContext(2, [[0, 1], [-1, 0]])
STRONG_CHAIN = [FGVar("1/y1", (1, 0)), FGVar("x1", (0, 1)), FGVar("x2", (-1, 0), alias="1/y3"), FGVar("x3", (0, -1))]
RENAMING = {"X": "x3", "Y": "x1", "Z": "1/y1", "W": "1/y3"}


def test_compare_ad_strong():
    d = structure(1, 1, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    cmp = specialize_and_compare(ideal, 1, fg_relations(STRONG_CHAIN, CTX, REF), RENAMING)
    assert cmp.match and cmp.report() == "Match"


def test_compare_su2():
    ctx = LatticeContext(2, [[0, 2], [-2, 0]])
    d = structure(2, 2, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    assert specialize_and_compare(ideal, 1, fg_relations(STRONG_CHAIN, ctx, REF), RENAMING).match


def test_compare_ad_weak():
    d = structure(1, 1, 2, do_complete=True)
    gl = Glossary({**GLOSSARY.entries, ((1, 1), 0): "P"})
    slabs = SLABS + [((-1, -1), "X", "Z", {"e": 2, "x_side": ((1, 1), -2)})]
    ideal = assemble_ideal(d, specs_for(d, slabs), 2, gl)
    fg = fg_relations([FGVar(f"x{i}") for i in range(1, 6)], slabs=[1, 2, 4], cyclic=True)
    renaming = {"X": "x1", "Y": "x3", "W": "x2", "Z": "x4", "P": "x5"}
    assert specialize_and_compare(ideal, 1, fg, renaming).match


def test_compare_wrong_renaming_names_generator():
    d = structure(1, 1, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    # swapping X and Y leaves XY alone but breaks the ZW relation
    bad = {"X": "x1", "Y": "x3", "Z": "1/y1", "W": "1/y3"}
    cmp = specialize_and_compare(ideal, 1, fg_relations(STRONG_CHAIN, CTX, REF), bad)
    assert not cmp.match
    assert cmp.missing_in_fg and "Mismatch" in cmp.report()
    assert "W*Z - Y*t - t" in cmp.report()


def test_renaming_not_bijective():
    d = structure(1, 1, 1)
    ideal = assemble_ideal(d, specs_for(d, SLABS), 1, GLOSSARY)
    fg = fg_relations(STRONG_CHAIN, CTX, REF)
    with pytest.raises(RenamingNotBijective):
        specialize_and_compare(ideal, 1, fg, {**RENAMING, "W": "x3"})
    with pytest.raises(RenamingNotBijective):
        specialize_and_compare(ideal, 1, fg, {k: v for k, v in RENAMING.items() if k != "W"})
