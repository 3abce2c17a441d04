"""Charge lattice: skew pairing, degree grading, quadratic refinements,
central charges, monodromy and semiflat coordinates."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .errors import (
    InvalidCharge,
    InvalidMonodromy,
    InvalidTwistorParameter,
    InvariantError,
    OutsideCone,
    VanishingCentralCharge,
)

DEFAULT_PHASE_TOL = 1e-12


class Charge(tuple):
    """Integer lattice vector; ``+``/``-`` act componentwise."""

    def __new__(cls, coords: Iterable[int]):
        coords = tuple(coords)
        for c in coords:
            if isinstance(c, bool) or int(c) != c:
                raise InvalidCharge(f"non-integer coordinate {c!r}")
        return super().__new__(cls, (int(c) for c in coords))

    def _check(self, other):
        if len(other) != len(self):
            raise InvalidCharge(f"length mismatch {len(self)} vs {len(other)}")

    def __add__(self, other):
        self._check(other)
        return Charge(a + b for a, b in zip(self, other))

    __radd__ = __add__

    def __sub__(self, other):
        self._check(other)
        return Charge(a - b for a, b in zip(self, other))

    def __neg__(self):
        return Charge(-a for a in self)

    def __mul__(self, k):
        if isinstance(k, int):
            return Charge(k * a for a in self)
        return NotImplemented

    __rmul__ = __mul__

    def is_zero(self):
        return not any(self)

    def primitive(self):
        """Return (primitive vector, multiple)."""
        g = math.gcd(*self) if self else 0
        if g == 0:
            return self, 0
        return Charge(a // g for a in self), g

    def __repr__(self):
        return f"Charge{tuple(self)}"


def _solve(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Exact Gauss-Jordan solve of a square system; None if singular."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[-1] for row in a]


def _det(matrix) -> Fraction:
    n = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _inverse(matrix):
    n = len(matrix)
    cols = [_solve(matrix, [int(i == j) for i in range(n)]) for j in range(n)]
    if any(c is None for c in cols):
        return None
    return [[cols[j][i] for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class LatticeContext:
    rank: int
    skew_form: tuple
    degree_basis: tuple = None
    flavor_subspace: tuple = ()

    def __post_init__(self):
        n = self.rank
        if not isinstance(n, int) or n <= 0:
            raise InvariantError("rank", "must be a positive integer")
        form = tuple(tuple(int(x) for x in row) for row in self.skew_form)
        if len(form) != n or any(len(row) != n for row in form):
            raise InvariantError("skew_form", f"expected {n}x{n} matrix")
        if any(form[i][j] != -form[j][i] for i in range(n) for j in range(n)):
            raise InvariantError("skew_form", "not antisymmetric")
        object.__setattr__(self, "skew_form", form)
        basis = self.degree_basis
        if basis is None:
            basis = [[int(i == j) for j in range(n)] for i in range(n)]
        basis = tuple(Charge(b) for b in basis)
        if len(basis) != n or any(len(b) != n for b in basis):
            raise InvariantError("degree_basis", f"need {n} charges of length {n}")
        if _det([list(b) for b in basis]) == 0:
            raise InvariantError("degree_basis", "not linearly independent")
        object.__setattr__(self, "degree_basis", basis)
        flav = tuple(Charge(f) for f in self.flavor_subspace)
        for f in flav:
            if len(f) != n:
                raise InvariantError("flavor_subspace", "wrong length")
            for i in range(n):
                e = Charge(int(i == j) for j in range(n))
                if self._pair(f, e) != 0:
                    raise InvariantError("flavor_subspace", f"{tuple(f)} is not in the radical")
        object.__setattr__(self, "flavor_subspace", flav)
        # columns are the basis vectors, used to expand charges
        object.__setattr__(self, "_basis_cols", [[basis[j][i] for j in range(n)] for i in range(n)])

    def _pair(self, a, b):
        f = self.skew_form
        return sum(a[i] * f[i][j] * b[j] for i in range(self.rank) for j in range(self.rank) if a[i] and b[j])

    def charge(self, coords) -> Charge:
        c = Charge(coords)
        if len(c) != self.rank:
            raise InvalidCharge(f"expected length {self.rank}, got {len(c)}")
        return c

    def pair(self, a, b) -> int:
        if len(a) != self.rank or len(b) != self.rank:
            raise InvalidCharge(f"expected length {self.rank}")
        return self._pair(a, b)

    def basis_coefficients(self, gamma) -> list[Fraction]:
        """Rational coefficients of gamma in the degree basis."""
        gamma = self.charge(gamma)
        return _solve(self._basis_cols, list(gamma))

    def integer_coefficients(self, gamma) -> list[int]:
        coeffs = self.basis_coefficients(gamma)
        if any(c.denominator != 1 for c in coeffs):
            raise InvalidCharge(f"{tuple(gamma)} is not an integral combination of the degree basis")
        return [int(c) for c in coeffs]

    def in_cone(self, gamma) -> bool:
        return all(c >= 0 and c.denominator == 1 for c in self.basis_coefficients(gamma))

    def degree(self, gamma) -> int:
        coeffs = self.basis_coefficients(gamma)
        if any(c < 0 or c.denominator != 1 for c in coeffs):
            raise OutsideCone(f"{tuple(gamma)} has coefficients {[str(c) for c in coeffs]}")
        return int(sum(coeffs))

    def degree_weights(self) -> tuple:
        """Linear functional on lattice coordinates computing the degree."""
        inv = _inverse(self._basis_cols)
        return tuple(sum(inv[i][j] for i in range(self.rank)) for j in range(self.rank))

    def is_flavor(self, gamma) -> bool:
        gamma = self.charge(gamma)
        return all(self._pair(gamma, Charge(int(i == j) for j in range(self.rank))) == 0
                   for i in range(self.rank))


def pair(ctx: LatticeContext, a, b) -> int:
    return ctx.pair(a, b)


def degree(ctx: LatticeContext, gamma) -> int:
    return ctx.degree(gamma)


@dataclass(frozen=True)
class QuadraticRefinement:
    basis_signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.basis_signs)
        if any(s not in (1, -1) for s in signs):
            raise InvariantError("refinement", "signs must be +1 or -1")
        object.__setattr__(self, "basis_signs", signs)

    @classmethod
    def constant(cls, ctx: LatticeContext, sign: int = -1):
        return cls((sign,) * ctx.rank)


def refinement_sign(ctx: LatticeContext, ref: QuadraticRefinement, gamma) -> int:
    if len(ref.basis_signs) != ctx.rank:
        raise InvariantError("refinement", "one sign per degree basis charge")
    c = ctx.integer_coefficients(gamma)
    sign = 1
    for ci, si in zip(c, ref.basis_signs):
        if si == -1 and ci % 2:
            sign = -sign
    basis = ctx.degree_basis
    cross = 0
    for i in range(ctx.rank):
        if not c[i]:
            continue
        for j in range(i + 1, ctx.rank):
            if c[j]:
                cross += c[i] * c[j] * ctx.pair(basis[i], basis[j])
    return -sign if cross % 2 else sign


def validate_refinement(ctx, ref, box: int = 4) -> bool:
    """Check the refinement law on every pair in a box of basis coefficients."""
    rng = range(-box, box + 1)
    basis = ctx.degree_basis
    charges = []
    for coeffs in product(rng, repeat=ctx.rank):
        g = Charge([0] * ctx.rank)
        for k, b in zip(coeffs, basis):
            g = g + b * k
        charges.append(g)
    sig = {g: refinement_sign(ctx, ref, g) for g in charges}
    for a in charges:
        for b in charges:
            s = refinement_sign(ctx, ref, a + b) if (a + b) not in sig else sig[a + b]
            if sig[a] * sig[b] != (-1) ** (ctx.pair(a, b) % 2) * s:
                return False
    return True


@dataclass(frozen=True)
class CentralChargeModel:
    ctx: LatticeContext
    basis_values: tuple
    flavor_masses: tuple = ()

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.basis_values)
        if len(vals) != self.ctx.rank:
            raise InvariantError("central_charges", "one value per degree basis charge")
        object.__setattr__(self, "basis_values", vals)
        masses = tuple(complex(m) for m in self.flavor_masses)
        object.__setattr__(self, "flavor_masses", masses)
        for gen, m in zip(self.ctx.flavor_subspace, masses):
            z = self.central_charge(gen)
            if abs(z - m) > 1e-9 * max(1.0, abs(m)):
                raise InvariantError("flavor_masses", f"Z{tuple(gen)}={z} differs from mass {m}")

    def central_charge(self, gamma) -> complex:
        coeffs = self.ctx.basis_coefficients(gamma)
        return sum((float(c) * v for c, v in zip(coeffs, self.basis_values)), 0j)


def ray_phase(model: CentralChargeModel, gamma) -> float:
    z = model.central_charge(gamma)
    if z == 0:
        raise VanishingCentralCharge(f"Z{tuple(gamma)} = 0")
    ph = cmath.phase(-z)
    return math.pi if ph <= -math.pi else ph


class WallTest(enum.Enum):
    ALIGNED = "Aligned"
    SEPARATED = "Separated"


def stability_wall_test(model, g1, g2, tol: float = DEFAULT_PHASE_TOL) -> WallTest:
    z1, z2 = model.central_charge(g1), model.central_charge(g2)
    if z1 == 0 or z2 == 0:
        raise VanishingCentralCharge("central charge vanishes")
    diff = (cmath.phase(z1) - cmath.phase(z2)) % (2 * math.pi)
    diff = min(diff, 2 * math.pi - diff)
    return WallTest.ALIGNED if diff <= tol else WallTest.SEPARATED


def monodromy_transform(M, H, gamma, s):
    """Act with an integral symplectic monodromy on a gauge charge and flavor vector."""
    n = len(M)
    if any(len(row) != n for row in M) or any(int(x) != x for row in M for x in row):
        raise InvalidMonodromy("monodromy must be a square integer matrix")
    if abs(_det(M)) != 1:
        raise InvalidMonodromy("monodromy is not unimodular")
    inv = _inverse(M)
    gamma = Charge(gamma)
    new_gamma = Charge(int(sum(inv[j][i] * gamma[j] for j in range(n))) for i in range(n))
    s = Charge(s)
    if H is None or len(s) == 0:
        return new_gamma, s
    if len(H) != len(s):
        raise InvalidMonodromy("H must have one row per flavor coordinate")
    shift = [sum(row[j] * gamma[j] for j in range(n)) for row in H]
    return new_gamma, Charge(a - b for a, b in zip(s, shift))


@dataclass(frozen=True)
class SemiflatContext:
    R: float
    basis_angles: tuple = field(default=())

    def __post_init__(self):
        if not self.R > 0:
            raise InvariantError("R", "must be positive")

    def theta(self, ctx: LatticeContext, gamma) -> float:
        if not self.basis_angles:
            return 0.0
        coeffs = ctx.basis_coefficients(gamma)
        return sum(float(c) * a for c, a in zip(coeffs, self.basis_angles))


def semiflat_coordinate(sf: SemiflatContext, model: CentralChargeModel, gamma, xi: complex) -> complex:
    if xi == 0:
        raise InvalidTwistorParameter("xi must be nonzero")
    z = model.central_charge(gamma)
    th = sf.theta(model.ctx, gamma)
    return cmath.exp(math.pi * sf.R * z / xi + 1j * th + math.pi * sf.R * xi * z.conjugate())
