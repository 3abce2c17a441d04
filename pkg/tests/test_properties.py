import cmath
import itertools
import math

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import proptest_cases
from wallcross.autom import _merge, as_word, compose_word, cone_truncation, factorize_ordered, poisson_bracket
from wallcross.lattice import (
    CentralChargeModel,
    LatticeContext,
    QuadraticRefinement,
    SemiflatContext,
    refinement_sign,
    semiflat_coordinate,
)
from wallcross.scattering import LINE, RayLine, ScatteringDiagram, complete, t_truncation
from wallcross.series import Series, series_pow

CTX = LatticeContext(2, [[0, 1], [-1, 0]])
REF = QuadraticRefinement((-1, -1))
BOX = range(-4, 5)


def refinement_law_holds(ctx, ref):
    sums = range(-8, 9)
    sigma = {g: refinement_sign(ctx, ref, g) for g in itertools.product(sums, repeat=2)}
    for a in itertools.product(BOX, repeat=2):
        for b in itertools.product(BOX, repeat=2):
            ab = (a[0] + b[0], a[1] + b[1])
            lhs = sigma[a] * sigma[b]
            rhs = (-1) ** (ctx.pair(a, b) % 2) * sigma[ab]
            if lhs != rhs:
                return False
    return True


def test_refinement_law_on_box():
    for skew in ([[0, 1], [-1, 0]], [[0, 2], [-2, 0]], [[0, -3], [3, 0]]):
        ctx = LatticeContext(2, skew)
        for signs in itertools.product((1, -1), repeat=2):
            assert refinement_law_holds(ctx, QuadraticRefinement(signs))


charges = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(any)
words = st.lists(st.tuples(charges, st.integers(-2, 2).filter(bool)), min_size=1, max_size=5)
monomials = st.tuples(st.integers(0, 2), st.integers(0, 2))


def _mono(e, tr):
    return Series.monomial(e, 0, 1, tr, 2)


@settings(max_examples=proptest_cases(100))
@given(words, monomials, monomials)
def test_ks_words_preserve_bracket(word, a, b):
    tr = cone_truncation(CTX, 6)
    K = compose_word(CTX, REF, word, tr)
    f, g = _mono(a, tr), _mono(b, tr)
    assert poisson_bracket(CTX, K(f), K(g)) == K(poisson_bracket(CTX, f, g))


def _angle(g):
    return math.atan2(g[1], g[0])


@settings(max_examples=proptest_cases(100))
@given(words)
def test_factorization_roundtrip(word):
    tr = cone_truncation(CTX, 6)
    sorted_word = sorted(_merge(as_word(word)),
                         key=lambda f: (_angle(f.charge), f.charge.primitive()[1]))
    target = compose_word(CTX, REF, sorted_word, tr)
    assert factorize_ordered(CTX, REF, target, _angle) == sorted_word


directions = st.sampled_from([(1, 0), (0, 1), (1, 1), (1, -1), (-1, 1), (2, 1), (1, 2), (0, -1)])
line = st.tuples(directions, st.sampled_from([1, 2, -1]), st.integers(1, 2),
                 st.tuples(st.integers(-1, 1), st.integers(-1, 1)))


def _line(spec, order):
    direction, c, power, base = spec
    f = Series({(0, (0, 0)): 1, (1, direction): c}, t_truncation(order), 2)
    return RayLine(LINE, base, direction, series_pow(f, power))


def _as_map(d):
    return {el.support_key(): el.function.terms for el in d.elements}


def _parallel(u, v):
    return u[0] * v[1] - u[1] * v[0] == 0


@settings(max_examples=proptest_cases(25))
@given(line, line)
def test_completion_idempotent_and_order_compatible(l1, l2):
    if _parallel(l1[0], l2[0]):
        l2 = ((l1[0][1], -l1[0][0]) if l1[0] != (0, 1) else (1, 0),) + l2[1:]
    order = 5
    d = ScatteringDiagram([_line(l1, order), _line(l2, order)], t_truncation(order))
    full = complete(d)
    assert _as_map(complete(full)) == _as_map(full)
    low = complete(d.with_order(3))
    assert _as_map(full.with_order(3)) == _as_map(low)


finite = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=proptest_cases(100))
@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
       st.floats(0.3, 3), st.floats(-math.pi, math.pi),
       st.tuples(finite, finite, finite, finite), st.tuples(finite, finite))
def test_semiflat_reality(gamma, r, arg, zs, angles):
    model = CentralChargeModel(CTX, (complex(zs[0], zs[1]), complex(zs[2], zs[3])))
    sf = SemiflatContext(1.0, angles)
    xi = cmath.rect(r, arg)
    neg = (-gamma[0], -gamma[1])
    lhs = semiflat_coordinate(sf, model, gamma, xi)
    rhs = semiflat_coordinate(sf, model, neg, -1 / xi.conjugate()).conjugate()
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
