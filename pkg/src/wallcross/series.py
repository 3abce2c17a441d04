"""Exact truncated series in lattice monomials z^m and a deformation parameter t."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ContextMismatch, NotInvertible, NotSmall, NotUnit


class Grading(enum.Enum):
    TPOWER = "t"
    CONE = "degree"
    SUM = "sum"


@dataclass(frozen=True)
class TruncationContext:
    """Which functional grades a monomial and the largest grade kept.

    ``weights`` is the linear functional on exponents used by the cone and sum
    gradings; ``None`` means every coordinate has weight one.
    """

    grading: Grading
    order: int
    weights: tuple | None = None

    def __post_init__(self):
        if not isinstance(self.grading, Grading):
            object.__setattr__(self, "grading", Grading(self.grading))
        if self.order < 0:
            raise ValueError("truncation order must be nonnegative")
        if self.weights is not None:
            w = tuple(x if isinstance(x, int) else Fraction(x) for x in self.weights)
            w = tuple(int(x) if isinstance(x, Fraction) and x.denominator == 1 else x for x in w)
            object.__setattr__(self, "weights", w)

    def grade(self, exponent, t: int = 0):
        if self.grading is Grading.TPOWER:
            return t
        w = self.weights
        g = sum(exponent) if w is None else sum(a * b for a, b in zip(w, exponent) if a)
        if self.grading is Grading.SUM:
            g += t
        return g

    def with_order(self, order):
        return TruncationContext(self.grading, order, self.weights)


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not allowed")
    return Fraction(c)


class Series:
    """Finite map ``(t_power, exponent) -> Fraction`` with a truncation context.

    Terms of grade above ``trunc.order`` are discarded on construction.
    """

    __slots__ = ("_terms", "trunc", "rank")

    def __init__(self, terms: Mapping | Iterable = (), trunc: TruncationContext = None, rank: int = None):
        if trunc is None:
            raise ValueError("a truncation context is required")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for key, c in items:
            t, exp = key
            exp = tuple(int(e) for e in exp)
            if rank is None:
                rank = len(exp)
            elif len(exp) != rank:
                raise ValueError("exponent length mismatch")
            if t < 0:
                raise ValueError("t power must be nonnegative")
            c = _coerce(c)
            if c == 0 or trunc.grade(exp, t) > trunc.order:
                continue
            k = (int(t), exp)
            clean[k] = clean.get(k, 0) + c
            if clean[k] == 0:
                del clean[k]
        self._terms = clean
        self.trunc = trunc
        self.rank = rank if rank is not None else 0

    @classmethod
    def _raw(cls, terms, trunc, rank):
        s = cls.__new__(cls)
        s._terms = terms
        s.trunc = trunc
        s.rank = rank
        return s

    # constructors
    @classmethod
    def constant(cls, c, trunc, rank):
        return cls({(0, (0,) * rank): c}, trunc, rank)

    @classmethod
    def one(cls, trunc, rank):
        return cls.constant(1, trunc, rank)

    @classmethod
    def zero(cls, trunc, rank):
        return cls._raw({}, trunc, rank)

    @classmethod
    def monomial(cls, exponent, t=0, coeff=1, trunc=None, rank=None):
        exponent = tuple(exponent)
        return cls({(t, exponent): coeff}, trunc, len(exponent) if rank is None else rank)

    # inspection
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        """Terms in canonical order: by t power then exponent."""
        return sorted(self._terms.items())

    def __iter__(self):
        return iter(self.items())

    def __len__(self):
        return len(self._terms)

    def coeff(self, exponent, t=0):
        return self._terms.get((t, tuple(exponent)), Fraction(0))

    def constant_term(self):
        return self.coeff((0,) * self.rank, 0)

    def is_zero(self):
        return not self._terms

    def is_one(self):
        return len(self._terms) == 1 and self.constant_term() == 1

    def min_grade(self, include_constant=True):
        gs = [self.trunc.grade(e, t) for (t, e) in self._terms
              if include_constant or t or any(e)]
        return min(gs) if gs else None

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.trunc == other.trunc and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Series.constant(other, self.trunc, self.rank)
        return NotImplemented

    def __hash__(self):
        return hash((self.trunc, frozenset(self._terms.items())))

    def __repr__(self):
        return f"Series({format_series(self)}; {self.trunc.grading.value}<={self.trunc.order})"

    # arithmetic
    def _check(self, other):
        if not isinstance(other, Series):
            other = Series.constant(other, self.trunc, self.rank)
        if other.trunc != self.trunc:
            raise ContextMismatch(f"{self.trunc} vs {other.trunc}")
        if other.rank != self.rank:
            raise ContextMismatch(f"rank {self.rank} vs {other.rank}")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return Series._raw(out, self.trunc, self.rank)

    __radd__ = __add__

    def __neg__(self):
        return Series._raw({k: -c for k, c in self._terms.items()}, self.trunc, self.rank)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _coerce(c)
        if c == 0:
            return Series.zero(self.trunc, self.rank)
        return Series._raw({k: v * c for k, v in self._terms.items()}, self.trunc, self.rank)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._check(other)
        return series_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k):
        return series_pow(self, k)

    def shift(self, exponent, t=0):
        """Multiply by the monomial t^t z^exponent."""
        exponent = tuple(exponent)
        terms = {}
        for (tt, e), c in self._terms.items():
            ne = tuple(a + b for a, b in zip(e, exponent))
            if self.trunc.grade(ne, tt + t) <= self.trunc.order:
                terms[(tt + t, ne)] = c
        return Series._raw(terms, self.trunc, self.rank)

    def truncate(self, order):
        """Re-truncate to a (smaller or equal) order of the same grading."""
        tr = self.trunc.with_order(order)
        return Series(self._terms, tr, self.rank)

    def homogeneous(self, grade):
        """Part of exact grade ``grade``."""
        g = self.trunc.grade
        return Series._raw({k: c for k, c in self._terms.items() if g(k[1], k[0]) == grade},
                           self.trunc, self.rank)

    def map_terms(self, fn):
        return Series(((k, fn(k, c)) for k, c in self._terms.items()), self.trunc, self.rank)


def series_mul(a: Series, b: Series) -> Series:
    if a.trunc != b.trunc or a.rank != b.rank:
        raise ContextMismatch("series have different truncation contexts")
    trunc = a.trunc
    grade = trunc.grade
    order = trunc.order
    bt = [(k[0], k[1], c, grade(k[1], k[0])) for k, c in b._terms.items()]
    out = {}
    for (ta, ea), ca in a._terms.items():
        ga = grade(ea, ta)
        for tb, eb, cb, gb in bt:
            if ga + gb > order:
                continue
            key = (ta + tb, tuple(x + y for x, y in zip(ea, eb)))
            v = out.get(key, 0) + ca * cb
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return Series._raw(out, trunc, a.rank)


def _small_part(a: Series):
    """Split a = c0 + h with h of strictly positive grade; None if impossible."""
    zero = (0, (0,) * a.rank)
    c0 = a._terms.get(zero, Fraction(0))
    h = Series._raw({k: c for k, c in a._terms.items() if k != zero}, a.trunc, a.rank)
    mg = h.min_grade()
    if mg is not None and mg <= 0:
        return c0, None
    return c0, h


def series_inverse(a: Series) -> Series:
    c0, h = _small_part(a)
    if c0 == 0 or h is None:
        raise NotInvertible("series is not a unit (needs nonzero constant and positive-grade rest)")
    h = h.scale(-1 / c0)
    inv0 = Series.constant(1 / c0, a.trunc, a.rank)
    total = Series.one(a.trunc, a.rank)
    term = Series.one(a.trunc, a.rank)
    while True:
        term = term * h
        if term.is_zero():
            break
        total = total + term
    return total * inv0


def series_pow(a: Series, k: int) -> Series:
    if not isinstance(k, int):
        raise TypeError("integer exponents only")
    if k < 0:
        return series_pow(series_inverse(a), -k)
    result = Series.one(a.trunc, a.rank)
    base = a
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def series_exp(a: Series) -> Series:
    mg = a.min_grade()
    if mg is not None and mg < 1:
        raise NotSmall("exp needs every term of grade at least 1")
    total = Series.one(a.trunc, a.rank)
    term = Series.one(a.trunc, a.rank)
    n = 0
    while True:
        n += 1
        term = (term * a).scale(Fraction(1, n))
        if term.is_zero():
            return total
        total = total + term


def series_log(a: Series) -> Series:
    c0, h = _small_part(a)
    if c0 != 1 or h is None:
        raise NotUnit("log needs constant term 1 and positive-grade rest")
    total = Series.zero(a.trunc, a.rank)
    power = Series.one(a.trunc, a.rank)
    n = 0
    while True:
        n += 1
        power = power * h
        if power.is_zero():
            return total
        total = total + power.scale(Fraction((-1) ** (n + 1), n))


def series_exp_log(a: Series, direction: str) -> Series:
    d = direction.lower()
    if d == "exp":
        return series_exp(a)
    if d == "log":
        return series_log(a)
    raise ValueError(f"unknown direction {direction!r}")


def apply_derivation(n, a: Series) -> Series:
    """Log derivation: z^m -> <m, n> z^m, with t inert."""
    n = tuple(n)
    out = {}
    for (t, e), c in a._terms.items():
        w = sum(x * y for x, y in zip(e, n))
        if w:
            out[(t, e)] = c * w
    return Series._raw(out, a.trunc, a.rank)


# formatting / serialization

def format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise ValueError(f"expected a rational string, got {s!r}")


def format_monomial(exponent, t, names=None):
    parts = []
    if t:
        parts.append("t" if t == 1 else f"t^{t}")
    if names is None:
        names = [f"z{i + 1}" for i in range(len(exponent))]
    for nm, e in zip(names, exponent):
        if e == 1:
            parts.append(nm)
        elif e:
            parts.append(f"{nm}^{e}" if e > 0 else f"{nm}^({e})")
    return "*".join(parts)


def format_series(s: Series, names=None) -> str:
    if s.is_zero():
        return "0"
    out = []
    for (t, e), c in s.items():
        mono = format_monomial(e, t, names)
        if not mono:
            body = format_rational(abs(c))
        elif abs(c) == 1:
            body = mono
        else:
            body = f"{format_rational(abs(c))}*{mono}"
        sign = "-" if c < 0 else "+"
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def series_to_json(s: Series):
    return [{"coeff": format_rational(c), "exponent": list(e), "t": t} for (t, e), c in s.items()]


def series_from_json(data, trunc: TruncationContext, rank: int) -> Series:
    terms = []
    for item in data:
        terms.append(((int(item.get("t", 0)), tuple(int(x) for x in item["exponent"])),
                      parse_rational(item["coeff"])))
    return Series(terms, trunc, rank)
