"""Cluster seeds, mutations, flips/pops/juggles, Y-systems and
Fock-Goncharov relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy as sp
from sympy.polys.fields import field as frac_field
from sympy.polys.domains import QQ

from .autom import FormalAutomorphism, ks_generator
from .errors import (
    FrozenIndex,
    InconsistentPairings,
    InvariantError,
    PairingMismatch,
    ZeroDenominator,
)
from .lattice import Charge, LatticeContext, QuadraticRefinement, refinement_sign


def _pos(n):
    return n if n > 0 else 0


@dataclass(frozen=True)
class Seed:
    lattice: LatticeContext
    basis: tuple
    d: tuple = None
    frozen: frozenset = frozenset()

    def __post_init__(self):
        basis = tuple(self.lattice.charge(b) for b in self.basis)
        object.__setattr__(self, "basis", basis)
        d = tuple(self.d) if self.d is not None else (1,) * len(basis)
        if len(d) != len(basis) or any(int(x) != x or x <= 0 for x in d):
            raise InvariantError("d", "one positive integer per basis element")
        object.__setattr__(self, "d", tuple(int(x) for x in d))
        object.__setattr__(self, "frozen", frozenset(self.frozen))
        for i in range(len(basis)):
            for j in range(len(basis)):
                if i in self.frozen and j in self.frozen:
                    continue
                v = self.lattice.pair(basis[i], basis[j]) * d[j]
                if int(v) != v:
                    raise InvariantError("epsilon", f"eps[{i}][{j}] = {v} not integral")

    def eps(self, i, j) -> int:
        return self.lattice.pair(self.basis[i], self.basis[j]) * self.d[j]

    def exchange_matrix(self):
        n = len(self.basis)
        return [[self.eps(i, j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class FGVariableSystem:
    """Symbolic X- and A-variables indexed like the seed basis."""

    X: tuple
    A: tuple = ()
    names: tuple = ()

    @classmethod
    def generic(cls, n, x_prefix="X", a_prefix="A"):
        xs = sp.symbols(f"{x_prefix}1:{n + 1}")
        as_ = sp.symbols(f"{a_prefix}1:{n + 1}")
        return cls(tuple(xs), tuple(as_), tuple(str(s) for s in xs))

    def simplified(self):
        return FGVariableSystem(tuple(sp.factor(sp.cancel(x)) for x in self.X),
                                tuple(sp.factor(sp.cancel(a)) for a in self.A), self.names)

    def equals(self, other) -> bool:
        if len(self.X) != len(other.X) or len(self.A) != len(other.A):
            return False
        pairs = list(zip(self.X, other.X)) + list(zip(self.A, other.A))
        return all(sp.cancel(a - b) == 0 for a, b in pairs)

    def monomial(self, coeffs):
        out = sp.Integer(1)
        for x, c in zip(self.X, coeffs):
            out *= x ** c
        return out


def mutate(seed: Seed, sys: FGVariableSystem, k: int):
    """Mutation in direction k of the seed and of both variable systems."""
    n = len(seed.basis)
    if k in seed.frozen:
        raise FrozenIndex(f"index {k} is frozen")
    if not 0 <= k < n:
        raise IndexError(k)
    eps = seed.exchange_matrix()
    ek = seed.basis[k]
    basis = []
    for i, e in enumerate(seed.basis):
        basis.append(-ek if i == k else e + ek * _pos(eps[i][k]))
    new_seed = Seed(seed.lattice, tuple(basis), seed.d, seed.frozen)
    Xk = sys.X[k]
    X = []
    for i, x in enumerate(sys.X):
        if i == k:
            X.append(1 / Xk)
        else:
            e = eps[i][k]
            sgn = (e > 0) - (e < 0)
            X.append(sp.cancel(x * (1 + Xk ** (-sgn)) ** (-e)))
    A = list(sys.A)
    if A:
        plus = sp.Integer(1)
        minus = sp.Integer(1)
        for j in range(n):
            if eps[k][j] > 0:
                plus *= sys.A[j] ** eps[k][j]
            elif eps[k][j] < 0:
                minus *= sys.A[j] ** (-eps[k][j])
        A[k] = sp.cancel((plus + minus) / sys.A[k])
    return new_seed, FGVariableSystem(tuple(X), tuple(A), sys.names)


def flip(seed: Seed, sys: FGVariableSystem, k: int):
    """Coordinate flip at basis charge k followed by the charge relabelling.

    Coordinates: X_i -> X_i (1 + X_k)^(-<e_i, e_k>), X_k fixed.  Charges follow
    the mutation rule, so the returned variables are indexed by the new basis.
    """
    n = len(seed.basis)
    if k in seed.frozen:
        raise FrozenIndex(f"index {k} is frozen")
    Xk = sys.X[k]
    moved = [x if i == k else x * (1 + Xk) ** (-seed.lattice.pair(seed.basis[i], seed.basis[k]))
             for i, x in enumerate(sys.X)]
    new_seed, _ = mutate(seed, FGVariableSystem(sys.X, (), sys.names), k)
    # re-express X_{e_i'} through the moved coordinates
    eps = seed.exchange_matrix()
    X = []
    for i in range(n):
        if i == k:
            X.append(1 / moved[k])
        else:
            X.append(sp.cancel(moved[i] * moved[k] ** _pos(eps[i][k])))
    return new_seed, FGVariableSystem(tuple(X), (), sys.names)


def pop_transform(X: Sequence, E: int, E2: int):
    """X_E -> 1/X_E, X_E' -> X_E X_E'."""
    if E == E2:
        raise ValueError("pop needs two distinct indices")
    X = list(X)
    a, b = X[E], X[E2]
    X[E] = 1 / a if not isinstance(a, Fraction) else Fraction(1) / a
    X[E2] = a * b
    return X


@dataclass(frozen=True)
class JuggleResult:
    gamma_a: Charge
    gamma_b: Charge
    gamma_vec: Charge
    coordinate_map: object  # callable sending a charge to its image expression


def juggle(ctx: LatticeContext, gamma_a, gamma_b, X=None):
    """Charges after a juggle and the accompanying coordinate jump.

    ``X`` maps charges to symbolic coordinates (defaults to X_g<coords>
    symbols); the returned map sends X_g to X_g (1 - X_vec)^(-2 <g, vec>).
    """
    ga, gb = ctx.charge(gamma_a), ctx.charge(gamma_b)
    if ctx.pair(gb, ga) != -2:
        raise PairingMismatch(f"<gamma_B, gamma_A> = {ctx.pair(gb, ga)}, expected -2")
    ga_new = -ga
    gb_new = -gb + ga * 2
    gvec = -ga_new
    X = X or charge_symbol

    def coordinate_map(g):
        g = ctx.charge(g)
        return X(g) * (1 - X(gvec)) ** (-2 * ctx.pair(g, gvec))

    return JuggleResult(ga_new, gb_new, gvec, coordinate_map)


def juggle_automorphism(ctx: LatticeContext, gamma_vec, trunc):
    """KS transformation with Omega = -2 and sigma = +1 at the vector charge."""
    ref = QuadraticRefinement((1,) * ctx.rank)
    g = ctx.charge(gamma_vec)
    # sigma(g) = +1 is what the juggle needs; fix basis signs accordingly
    if refinement_sign(ctx, ref, g) != 1:
        raise InvariantError("refinement", "cannot realise sigma(vec) = +1 with trivial basis signs")
    return ks_generator(ctx, ref, g, -2, trunc)


def charge_symbol(g):
    return sp.Symbol("X_g" + "_".join(str(c) for c in g))


# Y-systems

_SCREEN_POINT = (Fraction(3, 7), Fraction(5, 11))


def _y_step(x, y, b):
    return y * (1 + x) ** b, 1 / x


def y_system_run(b: int, x1=None, y1=None, steps: int = 10, keep_sequence: bool = True):
    """Iterate y_{n+1} = 1/x_n, x_{n+1} = y_n (1 + x_n)^b.

    With ``x1``/``y1`` left as None the orbit lives in the field of rational
    functions in two indeterminates.  Returns (sequence, period): the least
    period at most ``steps``, or None.

    Symbolic periods are found in two passes.  The orbit of a positive
    rational point is computed exactly; the recursion is subtraction free,
    so a symbolic period must show up there too.  Each surviving candidate
    is then confirmed by symbolic iteration.
    """
    if b < 0 or int(b) != b:
        raise ValueError("exchange exponent must be a nonnegative integer")
    symbolic = x1 is None or y1 is None
    if not symbolic:
        x, y = Fraction(x1), Fraction(y1)
        start = (x, y)
        seq = [start]
        period = None
        for n in range(1, steps + 1):
            if x == 0:
                raise ZeroDenominator(f"x_{n} vanishes")
            x, y = _y_step(x, y, b)
            seq.append((x, y))
            if period is None and (x, y) == start:
                period = n
        return seq, period

    K, xs, ys = frac_field("x1,y1", QQ)
    candidates = []
    px, py = _SCREEN_POINT
    for n in range(1, steps + 1):
        px, py = _y_step(px, py, b)
        if (px, py) == _SCREEN_POINT:
            candidates.append(n)
    period = None
    x, y = xs, ys
    done = 0
    seq = [(xs, ys)]
    for n in candidates:
        while done < n:
            x, y = _y_step(x, y, b)
            seq.append((x, y))
            done += 1
        if (x, y) == (xs, ys):
            period = n
            break
    if keep_sequence:
        while done < steps:
            x, y = _y_step(x, y, b)
            seq.append((x, y))
            done += 1
    seq = [(str(a.as_expr()), str(c.as_expr())) for a, c in seq[: steps + 1]]
    return seq, period


# Fock-Goncharov relations

@dataclass(frozen=True)
class FGVar:
    name: str
    charge: Charge | None = None
    omega: int = 1
    a: int | None = None
    sigma: int | None = None
    alias: str | None = None


@dataclass(frozen=True)
class FGRelation:
    left: str
    right: str
    mid: str
    sigma: int
    exponent: int
    side: str | None = None
    components: tuple = ()
    aliases: tuple = ()

    def text(self):
        def w(name):
            return f"({name})" if "/" in name else name
        base = f"(1 {'+' if self.sigma == -1 else '-'} {w(self.mid)})"
        rhs = base if self.exponent == 1 else f"{base}^{self.exponent}"
        if self.side:
            rhs += f"*{self.side}"
        return f"{w(self.left)}*{w(self.right)} = {rhs}"

    def to_sympy(self):
        subs = dict(self.aliases)
        def s(name):
            return sp.sympify(subs.get(name, name))
        side = s(self.side) if self.side else 1
        return s(self.left) * s(self.right) - (1 - self.sigma * s(self.mid)) ** self.exponent * side


def fg_relations(chain: Sequence[FGVar], ctx: LatticeContext = None, ref: QuadraticRefinement = None,
                 slabs: Sequence[int] | None = None, cyclic: bool = False, flavor_names=None):
    """One relation per slab entry of the chain: left * right = (1 - sigma mid)^(a Omega) * side.

    With charges present, a is <left, mid> and must equal <mid, right>;
    the side factor is the monomial of left + right (absent when it is zero).
    """
    chain = list(chain)
    n = len(chain)
    if slabs is None:
        slabs = range(n) if cyclic else range(1, n - 1)
    flavor_names = {tuple(k): v for k, v in (flavor_names or {}).items()}
    aliases = tuple((v.name, v.alias) for v in chain if v.alias)
    out = []
    for i in slabs:
        if not cyclic and not 0 < i < n - 1:
            raise InconsistentPairings(f"slab {i} has no neighbour on both sides")
        left, mid, right = chain[(i - 1) % n], chain[i], chain[(i + 1) % n]
        side = None
        if mid.charge is not None and left.charge is not None and right.charge is not None:
            if ctx is None or ref is None:
                raise ValueError("charges need a lattice context and refinement")
            a = ctx.pair(left.charge, mid.charge)
            b = ctx.pair(mid.charge, right.charge)
            if a != b:
                raise InconsistentPairings(f"at {mid.name}: a = {a} but b = {b}")
            if mid.a is not None and mid.a != a:
                raise InconsistentPairings(f"at {mid.name}: declared a = {mid.a}, pairing gives {a}")
            sigma = refinement_sign(ctx, ref, mid.charge)
            s = Charge(left.charge) + Charge(right.charge)
            if not s.is_zero():
                side = flavor_names.get(tuple(s), "X_g" + "_".join(str(c) for c in s))
        else:
            a = 1 if mid.a is None else mid.a
            sigma = -1 if mid.sigma is None else mid.sigma
        out.append(FGRelation(left.name, right.name, mid.name, sigma, a * mid.omega, side,
                              aliases=aliases))
    return out
