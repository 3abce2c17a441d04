"""Formal Poisson automorphisms of the coordinate torus.

An automorphism is stored as one unit multiplier per lattice basis
coordinate: ``X_i -> X_i * u_i``.  Images of arbitrary monomials are
rebuilt multiplicatively, using inverses for negative exponents.

Composition convention (frozen, see ``COMPOSITION``): automorphisms compose
as maps of the torus, so ``compose(a, b)`` moves points by ``b`` first and
then ``a``.  On coordinate functions this is substitution in the opposite
order: ``compose(a, b)(X) = b(a(X))``.  This is the reading under which the
SU(2) strong/weak identity and the flavored identity hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ContextMismatch, NonIntegralBPS, OutsideCone, PhaseTie, InvalidCharge
from .lattice import Charge, LatticeContext, QuadraticRefinement, refinement_sign
from .series import Grading, Series, TruncationContext, series_inverse, series_pow

COMPOSITION = "point"


def cone_truncation(ctx: LatticeContext, order: int) -> TruncationContext:
    """Truncation by charge degree with respect to the degree basis."""
    return TruncationContext(Grading.CONE, order, ctx.degree_weights())


class FormalAutomorphism:
    __slots__ = ("ctx", "trunc", "multipliers", "_powers")

    def __init__(self, ctx: LatticeContext, trunc: TruncationContext, multipliers: Sequence[Series]):
        multipliers = tuple(multipliers)
        if len(multipliers) != ctx.rank:
            raise ContextMismatch("one multiplier per basis coordinate")
        for u in multipliers:
            if u.trunc != trunc or u.rank != ctx.rank:
                raise ContextMismatch("multiplier has a different truncation context")
        self.ctx = ctx
        self.trunc = trunc
        self.multipliers = multipliers
        self._powers = [dict() for _ in multipliers]

    @classmethod
    def identity(cls, ctx, trunc):
        one = Series.one(trunc, ctx.rank)
        return cls(ctx, trunc, [one] * ctx.rank)

    def is_identity(self):
        return all(u.is_one() for u in self.multipliers)

    def __eq__(self, other):
        if not isinstance(other, FormalAutomorphism):
            return NotImplemented
        return (self.ctx == other.ctx and self.trunc == other.trunc
                and self.multipliers == other.multipliers)

    def __hash__(self):
        return hash(self.multipliers)

    def __repr__(self):
        return f"FormalAutomorphism({list(self.multipliers)})"

    def _power(self, i, k):
        cache = self._powers[i]
        if k not in cache:
            if k == 0:
                cache[k] = Series.one(self.trunc, self.ctx.rank)
            elif k == -1:
                cache[k] = series_inverse(self.multipliers[i])
            elif k == 1:
                cache[k] = self.multipliers[i]
            else:
                half = self._power(i, k // 2) if k > 0 else self._power(i, -((-k) // 2))
                rest = k - 2 * (k // 2) if k > 0 else k + 2 * ((-k) // 2)
                val = half * half
                if rest:
                    val = val * self._power(i, rest)
                cache[k] = val
        return cache[k]

    def monomial_image(self, exponent, t=0) -> Series:
        """Image of t^t X^exponent."""
        out = Series.monomial(exponent, t, 1, self.trunc, self.ctx.rank)
        for i, k in enumerate(exponent):
            if k and not self.multipliers[i].is_one():
                out = out * self._power(i, k)
        return out

    def apply(self, f: Series) -> Series:
        if f.trunc != self.trunc:
            raise ContextMismatch("series and automorphism truncations differ")
        total = Series.zero(self.trunc, self.ctx.rank)
        for (t, e), c in f.items():
            total = total + self.monomial_image(e, t).scale(c)
        return total

    def __call__(self, f):
        return self.apply(f)

    def inverse(self) -> "FormalAutomorphism":
        """Two-sided inverse.

        If v(X_i) = X_i w_i is the inverse then v(a(X_i)) = X_i forces
        w_i = 1 / v(u_i); iterating this fixes one more grade per pass.
        """
        inv = FormalAutomorphism.identity(self.ctx, self.trunc)
        for _ in range(self.trunc.order + 2):
            nxt = FormalAutomorphism(self.ctx, self.trunc,
                                     [series_inverse(inv.apply(u)) for u in self.multipliers])
            if nxt == inv:
                return inv
            inv = nxt
        return inv

    def truncated(self, order) -> "FormalAutomorphism":
        tr = self.trunc.with_order(order)
        return FormalAutomorphism(self.ctx, tr, [u.truncate(order) for u in self.multipliers])


def _compose_ring(a: FormalAutomorphism, b: FormalAutomorphism) -> FormalAutomorphism:
    # (a o b)(X_i) = a(X_i u_i^b) = X_i u_i^a a(u_i^b)
    return FormalAutomorphism(a.ctx, a.trunc,
                              [ua * a.apply(ub) for ua, ub in zip(a.multipliers, b.multipliers)])


def _compose_point(a: FormalAutomorphism, b: FormalAutomorphism) -> FormalAutomorphism:
    # opposite order: substitute a first, then b
    return _compose_ring(b, a)


_CONVENTIONS = {"ring": _compose_ring, "point": _compose_point}


def compose(*autos: FormalAutomorphism, convention: str = None) -> FormalAutomorphism:
    """Ordered product; the rightmost factor acts first on coordinates."""
    if not autos:
        raise ValueError("compose needs at least one automorphism")
    first = autos[0]
    for x in autos[1:]:
        if x.ctx != first.ctx or x.trunc != first.trunc:
            raise ContextMismatch("automorphisms live in different contexts")
    step = _CONVENTIONS[convention or COMPOSITION]
    out = autos[-1]
    for x in reversed(autos[:-1]):
        out = step(x, out)
    return out


def ks_generator(ctx: LatticeContext, ref: QuadraticRefinement, gamma, omega: int,
                 trunc: TruncationContext) -> FormalAutomorphism:
    """K_gamma^omega : X_g -> X_g (1 - sigma(gamma) X_gamma)^(omega <g, gamma>)."""
    gamma = ctx.charge(gamma)
    if omega == 0 or gamma.is_zero():
        if gamma.is_zero() and omega:
            raise InvalidCharge("the zero charge has no KS transformation")
        return FormalAutomorphism.identity(ctx, trunc)
    sigma = refinement_sign(ctx, ref, gamma)
    base = Series({(0, (0,) * ctx.rank): 1, (0, tuple(gamma)): -sigma}, trunc, ctx.rank)
    mults = []
    cache = {}
    for i in range(ctx.rank):
        e_i = Charge(int(i == j) for j in range(ctx.rank))
        k = omega * ctx.pair(e_i, gamma)
        if k not in cache:
            cache[k] = series_pow(base, k)
        mults.append(cache[k])
    return FormalAutomorphism(ctx, trunc, mults)


def poisson_bracket(ctx: LatticeContext, f: Series, g: Series) -> Series:
    """{X^a, X^b} = <a, b> X^(a+b), extended bilinearly."""
    out = {}
    for (ta, ea), ca in f.items():
        for (tb, eb), cb in g.items():
            w = ctx.pair(ea, eb)
            if not w:
                continue
            key = (ta + tb, tuple(x + y for x, y in zip(ea, eb)))
            out[key] = out.get(key, 0) + w * ca * cb
    return Series(out, f.trunc, ctx.rank)


def hamiltonian_derivation(ctx: LatticeContext, ref: QuadraticRefinement, gamma) -> Callable[[Series], Series]:
    """Hamiltonian vector field of sigma(gamma) X_gamma, i.e. f -> {sigma X_gamma, f}.

    On coordinates: X_g -> sigma(gamma) <gamma, g> X_gamma X_g.
    """
    gamma = ctx.charge(gamma)
    sigma = refinement_sign(ctx, ref, gamma)

    def derivation(f: Series) -> Series:
        out = {}
        for (t, e), c in f.items():
            w = ctx.pair(gamma, e)
            if w:
                key = (t, tuple(x + y for x, y in zip(e, gamma)))
                out[key] = out.get(key, 0) + sigma * w * c
        return Series(out, f.trunc, ctx.rank)

    return derivation


def operator_exp(derivation: Callable[[Series], Series], f: Series) -> Series:
    """exp(D) f for a grade-raising linear operator D."""
    total = f
    term = f
    n = 0
    while True:
        n += 1
        term = derivation(term).scale(Fraction(1, n))
        if term.is_zero():
            return total
        total = total + term


# words

@dataclass(frozen=True)
class KSFactor:
    charge: Charge
    omega: int

    def __iter__(self):
        return iter((self.charge, self.omega))


def as_word(items: Iterable) -> list[KSFactor]:
    return [f if isinstance(f, KSFactor) else KSFactor(Charge(f[0]), int(f[1])) for f in items]


def compose_word(ctx, ref, word, trunc) -> FormalAutomorphism:
    word = as_word(word)
    if not word:
        return FormalAutomorphism.identity(ctx, trunc)
    return compose(*(ks_generator(ctx, ref, f.charge, f.omega, trunc) for f in word))


def _sort_key(order_key, tol):
    def key(f):
        prim, mult = f.charge.primitive()
        return (order_key(f.charge), mult)
    return key


def _check_ties(factors, order_key, tol):
    seen = []
    for f in factors:
        prim, _ = f.charge.primitive()
        k = order_key(f.charge)
        for p, kk in seen:
            if p != prim and abs(k - kk) <= tol:
                raise PhaseTie(f"charges {tuple(p)} and {tuple(prim)} share order key {k}")
        seen.append((prim, k))


def factorize_ordered(ctx: LatticeContext, ref: QuadraticRefinement, target: FormalAutomorphism,
                      order_key: Callable[[Charge], float], max_degree: int | None = None,
                      tol: float = 1e-12) -> list[KSFactor]:
    """Unique word sorted by ``order_key`` (ascending, left to right) whose
    composite equals ``target`` up to ``max_degree``.

    Works degree by degree: the lowest-grade discrepancy between the current
    composite and the target is a sum of commuting single-factor corrections,
    each read off from its monomial coefficient.
    """
    trunc = target.trunc
    if max_degree is None:
        max_degree = trunc.order
    if max_degree > trunc.order:
        raise ValueError("max_degree exceeds the target truncation order")
    factors: list[KSFactor] = []
    basis = [Charge(int(i == j) for j in range(ctx.rank)) for i in range(ctx.rank)]
    sort_key = _sort_key(order_key, tol)
    for d in range(1, max_degree + 1):
        # Work mod grade d+1.  The missing factors of degree d commute with
        # everything there, and each one rescales X_i by 1 - sigma*Omega*<e_i,g> X_g,
        # so the grade-d part of target_i / current_i collects them all.
        tr_d = trunc.with_order(d)
        current = compose_word(ctx, ref, factors, tr_d)
        found = {}
        for i, (u, c) in enumerate(zip(target.multipliers, current.multipliers)):
            ratio = u.truncate(d) * series_inverse(c)
            low = ratio - ratio.homogeneous(d) - Series.one(tr_d, ctx.rank)
            if not low.is_zero():
                raise NonIntegralBPS("residual below the working degree is not of KS form")
            for (t, e), coeff in ratio.homogeneous(d).items():
                if t:
                    raise ValueError("factorization expects a t-free target")
                found.setdefault(Charge(e), [Fraction(0)] * ctx.rank)[i] = coeff
        new = []
        for gamma, deltas in sorted(found.items()):
            if not ctx.in_cone(gamma):
                raise OutsideCone(f"required factor charge {tuple(gamma)} lies outside the cone")
            sigma = refinement_sign(ctx, ref, gamma)
            omega = None
            for i, e_i in enumerate(basis):
                p = ctx.pair(e_i, gamma)
                if p == 0:
                    if deltas[i] != 0:
                        raise NonIntegralBPS(f"discrepancy at {tuple(gamma)} is not generated by a KS factor")
                    continue
                cand = -deltas[i] / (sigma * p)
                if omega is None:
                    omega = cand
                elif omega != cand:
                    raise NonIntegralBPS(f"discrepancy at {tuple(gamma)} is not proportional to the pairing vector")
            if omega is None or omega == 0:
                continue
            if omega.denominator != 1:
                raise NonIntegralBPS(f"Omega({tuple(gamma)}) = {omega} is not an integer")
            new.append(KSFactor(gamma, int(omega)))
        if new:
            factors = _merge(factors + new)
            _check_ties(factors, order_key, tol)
            factors.sort(key=sort_key)
    if compose_word(ctx, ref, factors, trunc).truncated(max_degree) != target.truncated(max_degree):
        raise NonIntegralBPS("factorization failed to reproduce the target")
    return factors


def _merge(factors):
    out = {}
    for f in factors:
        out[f.charge] = out.get(f.charge, 0) + f.omega
    return [KSFactor(g, o) for g, o in out.items() if o]
