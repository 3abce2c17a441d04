from fractions import Fraction
from math import comb

import pytest

from wallcross.errors import ContextMismatch, NotInvertible, NotSmall, NotUnit
from wallcross.series import (
    Grading,
    Series,
    TruncationContext,
    apply_derivation,
    format_series,
    series_exp_log,
    series_from_json,
    series_mul,
    series_pow,
    series_to_json,
)

DEG = TruncationContext(Grading.CONE, 2)
T1 = TruncationContext(Grading.TPOWER, 1)


def S(terms, trunc=DEG, rank=2):
    return Series({(t, e): c for (e, t), c in terms.items()}, trunc, rank)


X = S({((1, 0), 0): 1})


def test_difference_of_squares():
    one = Series.one(DEG, 2)
    assert series_mul(one + X, one - X) == one - X * X


def test_t_product():
    tr = TruncationContext(Grading.TPOWER, 3)
    a = S({((0, 0), 0): 1, ((1, 0), 1): 1}, tr)
    b = S({((0, 0), 0): 1, ((0, 1), 1): 1}, tr)
    expected = S({((0, 0), 0): 1, ((1, 0), 1): 1, ((0, 1), 1): 1, ((1, 1), 2): 1}, tr)
    assert a * b == expected


def test_truncation_drops_high_t():
    a = S({((0, 0), 0): 1, ((1, 0), 1): 1}, T1)
    assert a * a == S({((0, 0), 0): 1, ((1, 0), 1): 2}, T1)


def test_geometric_inverse():
    one = Series.one(DEG, 2)
    assert series_pow(one + X, -1) == one - X + X * X


def test_negative_power_against_repeated_products():
    # (1 - wy)^(-4) with wy a single degree-2 monomial, truncated after (wy)^2
    tr = TruncationContext(Grading.CONE, 4)
    wy = S({((1, 1), 0): 1}, tr)
    one = Series.one(tr, 2)
    inv = series_pow(one - wy, -1)
    oracle = inv * inv * inv * inv
    got = series_pow(one - wy, -4)
    assert got == oracle
    assert [got.coeff((k, k)) for k in range(3)] == [comb(k + 3, 3) for k in range(3)]


def test_not_invertible():
    with pytest.raises(NotInvertible):
        series_pow(X, -1)


def test_log_and_exp():
    one = Series.one(DEG, 2)
    assert series_exp_log(one + X, "log") == X - X * X * Fraction(1, 2)
    tr = TruncationContext(Grading.TPOWER, 5)
    f = S({((0, 0), 0): 1, ((1, 0), 1): 1}, tr)
    assert series_exp_log(series_exp_log(f, "log"), "exp") == f
    with pytest.raises(NotSmall):
        series_exp_log(one + X, "exp")
    with pytest.raises(NotUnit):
        series_exp_log(X, "log")


def test_derivation_examples():
    tr = TruncationContext(Grading.CONE, 10)
    z = S({((2, 3), 0): 1}, tr)
    assert apply_derivation((1, 0), z) == z * 2
    assert apply_derivation((0, 1), S({((1, 0), 0): 1}, tr)).is_zero()
    assert apply_derivation((3, 4), Series.one(tr, 2)).is_zero()


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        X * S({((1, 0), 0): 1}, T1)


def test_zero_coefficients_never_stored():
    s = X - X
    assert s.is_zero() and len(s) == 0


def test_canonical_iteration_order():
    tr = TruncationContext(Grading.TPOWER, 3)
    s = S({((1, 0), 2): 1, ((0, 5), 0): 2, ((-1, 0), 1): 3}, tr)
    keys = [k for k, _ in s.items()]
    assert keys == sorted(keys)
    assert keys[0][0] == 0


def test_negative_exponents_allowed():
    tr = TruncationContext(Grading.TPOWER, 2)
    y = S({((-1, 0), 1): 1}, tr)
    assert (Series.one(tr, 2) + y) ** 2 == S({((0, 0), 0): 1, ((-1, 0), 1): 2, ((-2, 0), 2): 1}, tr)


def test_json_roundtrip_and_format():
    tr = TruncationContext(Grading.TPOWER, 3)
    s = S({((0, 0), 0): 1, ((1, 0), 1): Fraction(-3, 4)}, tr)
    data = series_to_json(s)
    assert data[1] == {"coeff": "-3/4", "exponent": [1, 0], "t": 1}
    assert series_from_json(data, tr, 2) == s
    assert format_series(s, ["x", "y"]) == "1 - 3/4*t*x"


def test_floats_rejected():
    with pytest.raises(TypeError):
        Series({(0, (0, 0)): 0.5}, DEG, 2)
