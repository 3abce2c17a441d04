"""Rank-2 scattering diagrams: crossings, loop products and completion."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from typing import Sequence

from .autom import FormalAutomorphism, KSFactor, compose, factorize_ordered
from .errors import LoopThroughSingularity, NonconvergentOrder, RankMismatch, InvalidCharge
from .lattice import Charge, CentralChargeModel, LatticeContext, QuadraticRefinement, ray_phase, refinement_sign
from .series import Grading, Series, TruncationContext, series_log, series_pow

RAY = "ray"
LINE = "line"
CCW = "ccw"
CW = "cw"


def t_truncation(order: int) -> TruncationContext:
    return TruncationContext(Grading.TPOWER, order)


def plane_context() -> LatticeContext:
    """The standard rank-2 plane with pairing <(p,q),(p',q')> = pq' - qp'."""
    return LatticeContext(2, ((0, 1), (-1, 0)))


def _point(p):
    return (Fraction(p[0]), Fraction(p[1]))


@dataclass(frozen=True)
class RayLine:
    kind: str
    base: tuple
    direction: Charge
    function: Series
    label: str = ""

    def __post_init__(self):
        if self.kind not in (RAY, LINE):
            raise ValueError(f"kind must be 'ray' or 'line', got {self.kind!r}")
        d = Charge(self.direction)
        if len(d) != 2:
            raise RankMismatch("scattering elements live in the plane")
        prim, g = d.primitive()
        if g != 1:
            raise InvalidCharge(f"direction {tuple(d)} is not primitive")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "base", _point(self.base))
        if self.function.constant_term() != 1:
            raise ValueError("attached function must have constant term 1")

    def contains(self, p) -> Fraction | None:
        """Parameter s with p = base + s*direction on the support, else None."""
        dx, dy = p[0] - self.base[0], p[1] - self.base[1]
        a, b = self.direction
        if dx * b - dy * a != 0:
            return None
        s = dx / a if a else dy / b
        if self.kind == RAY and s < 0:
            return None
        return s

    def support_key(self):
        """Canonical description of the support."""
        a, b = self.direction
        if self.kind == RAY:
            return (RAY, self.base, (a, b))
        # canonical point: intersection with a fixed transversal
        if a:
            y0 = self.base[1] - self.base[0] * Fraction(b, a)
            anchor = (Fraction(0), y0)
        else:
            anchor = (self.base[0], Fraction(0))
        return (LINE, anchor, (a, b))

    def is_trivial(self):
        return self.function.is_one()


def angle_cmp(u, v) -> int:
    """Order directions by angle in (0, 2*pi]; the positive x-axis comes last."""
    def half(w):
        x, y = w
        return 0 if (y > 0 or (y == 0 and x < 0)) else 1
    hu, hv = half(u), half(v)
    if hu != hv:
        return hu - hv
    cross = u[0] * v[1] - u[1] * v[0]
    if cross > 0:
        return -1
    if cross < 0:
        return 1
    return 0


def angle_key(u):
    return cmp_to_key(angle_cmp)(u)


def _rotated_key(start):
    start = tuple(start)

    def key(item):
        u = item[0]
        # directions at or before the start angle come after a full turn
        after = angle_cmp(u, start) > 0 if start != (1, 0) else True
        if angle_cmp(u, start) == 0:
            after = False
        return (0 if after else 1, angle_key(u))
    return key


def _crossing_normal(u, orientation):
    # primitive normal positively oriented along the loop velocity
    n = Charge((-u[1], u[0]))
    return n if orientation == CCW else -n


def crossing_automorphism(el: RayLine, orientation: str = CCW, ctx: LatticeContext = None,
                          local_direction=None) -> FormalAutomorphism:
    """exp(log f * d_n0): z^m -> z^m f^<n0, m>.

    ``local_direction`` is the direction, seen from the loop centre, of the
    piece of support being crossed (defaults to the element's direction).
    """
    ctx = ctx or plane_context()
    f = el.function
    u = el.direction if local_direction is None else Charge(local_direction)
    n0 = _crossing_normal(u, orientation)
    mults = []
    cache = {}
    for i in range(2):
        k = n0[i]
        if k not in cache:
            cache[k] = series_pow(f, k)
        mults.append(cache[k])
    return FormalAutomorphism(ctx, f.trunc, mults)


@dataclass
class ScatteringDiagram:
    elements: list
    trunc: TruncationContext
    ctx: LatticeContext = field(default_factory=plane_context)
    reading: str = "rays"

    def __post_init__(self):
        if self.ctx.rank != 2:
            raise RankMismatch("scattering diagrams are rank 2")
        if self.trunc.grading is not Grading.TPOWER:
            raise ValueError("scattering diagrams use the t-power grading")
        self.elements = [el if el.function.trunc == self.trunc else
                         replace(el, function=Series(el.function.terms, self.trunc, 2))
                         for el in self.elements]

    def with_order(self, order):
        tr = self.trunc.with_order(order)
        els = []
        for el in self.elements:
            f = el.function.truncate(order)
            if not f.is_one():
                els.append(replace(el, function=f))
        return ScatteringDiagram(els, tr, self.ctx, self.reading)

    def sorted_elements(self):
        return sorted(self.elements, key=lambda el: (angle_key(el.direction), el.kind, el.base))


def minimal_normalize(d: ScatteringDiagram) -> ScatteringDiagram:
    """Merge elements with the same support and drop trivial ones."""
    groups = {}
    for el in d.elements:
        key = el.support_key()
        if key in groups:
            prev = groups[key]
            groups[key] = replace(prev, function=prev.function * el.function)
        else:
            groups[key] = el
    els = [el for el in groups.values() if not el.is_trivial()]
    out = ScatteringDiagram(els, d.trunc, d.ctx, d.reading)
    out.elements = out.sorted_elements()
    return out


def _crossings_at(d: ScatteringDiagram, p):
    """(local direction, element) pairs met by a small loop around p."""
    out = []
    for el in d.elements:
        s = el.contains(p)
        if s is None:
            continue
        u = el.direction
        if el.kind == RAY and s == 0:
            out.append((u, el))
        else:
            out.append((u, el))
            out.append((-u, el))
    return out


def path_ordered_product(d: ScatteringDiagram, point=(0, 0), crossings=None, order=None,
                         start=(1, 0)) -> FormalAutomorphism:
    """Loop product theta_s o ... o theta_1 around ``point``.

    The loop starts just past the direction ``start`` (default: the positive
    x-axis) and runs counterclockwise.  Alternatively ``crossings`` lists
    (element, orientation) pairs in traversal order.
    """
    if order is not None and order != d.trunc.order:
        d = d.with_order(order)
    if crossings is None:
        p = _point(point)
        items = _crossings_at(d, p)
        items.sort(key=_rotated_key(start))
        thetas = [crossing_automorphism(el, CCW, d.ctx, local_direction=u) for u, el in items]
    else:
        thetas = []
        for el, orient in crossings:
            thetas.append(crossing_automorphism(el, orient, d.ctx))
    if not thetas:
        return FormalAutomorphism.identity(d.ctx, d.trunc)
    return compose(*thetas)


def loop_product_avoiding(d: ScatteringDiagram, path: Sequence) -> FormalAutomorphism:
    """Product along a closed polygonal path given by its vertices.

    Raises LoopThroughSingularity if a vertex lies on a support or a segment
    passes through a singular point.
    """
    pts = [_point(v) for v in path]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    sing = set(singular_points(d))
    thetas = []
    for a, b in zip(pts, pts[1:]):
        for el in d.elements:
            if el.contains(a) is not None:
                raise LoopThroughSingularity(f"path vertex {a} lies on an element")
        for q in sing:
            if _on_segment(q, a, b):
                raise LoopThroughSingularity(f"path passes through singular point {q}")
        hits = []
        for el in d.elements:
            s_param = _segment_hit(el, a, b)
            if s_param is not None:
                hits.append((s_param, el))
        hits.sort(key=lambda h: h[0])
        vel = (b[0] - a[0], b[1] - a[1])
        for _, el in hits:
            u = el.direction
            n = Charge((-u[1], u[0]))
            if n[0] * vel[0] + n[1] * vel[1] < 0:
                n = -n
            orient = CCW if n == Charge((-u[1], u[0])) else CW
            thetas.append(crossing_automorphism(el, orient, d.ctx))
    if not thetas:
        return FormalAutomorphism.identity(d.ctx, d.trunc)
    return compose(*thetas)


def _on_segment(q, a, b):
    cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
    if cross != 0:
        return False
    return min(a[0], b[0]) <= q[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= q[1] <= max(a[1], b[1])


def _segment_hit(el, a, b):
    """Parameter in (0,1) where segment a->b crosses the support, else None."""
    ux, uy = el.direction
    vx, vy = b[0] - a[0], b[1] - a[1]
    den = vx * uy - vy * ux
    if den == 0:
        return None
    wx, wy = el.base[0] - a[0], el.base[1] - a[1]
    lam = (wx * uy - wy * ux) / den
    s = (wx * vy - wy * vx) / den
    if not (0 < lam < 1):
        return None
    if el.kind == RAY and s < 0:
        return None
    return lam


def singular_points(d: ScatteringDiagram):
    pts = set()
    els = d.elements
    for el in els:
        if el.kind == RAY:
            pts.add(el.base)
    for i, a in enumerate(els):
        for b in els[i + 1:]:
            p = _intersection(a, b)
            if p is not None:
                pts.add(p)
    return sorted(pts)


def _intersection(a: RayLine, b: RayLine):
    (ux, uy), (vx, vy) = a.direction, b.direction
    den = ux * vy - uy * vx
    if den == 0:
        return None
    wx, wy = b.base[0] - a.base[0], b.base[1] - a.base[1]
    s = Fraction(wx * vy - wy * vx, 1) / den
    r = Fraction(wx * uy - wy * ux, 1) / den
    if a.kind == RAY and s < 0:
        return None
    if b.kind == RAY and r < 0:
        return None
    return (a.base[0] + s * ux, a.base[1] + s * uy)


def _order_j_rays(d: ScatteringDiagram, p, j):
    """Rays from p cancelling the t^j part of the loop product at p."""
    prod = path_ordered_product(d, p)
    w = {}
    for i, u in enumerate(prod.multipliers):
        for (t, e), c in u.items():
            if t < j and (t or any(e)):
                raise NonconvergentOrder(f"loop at {p} is not the identity below order {j}")
            if t == j:
                w.setdefault(e, [Fraction(0), Fraction(0)])[i] = c
    rays = []
    for m, vec in sorted(w.items()):
        if not any(m):
            raise NonconvergentOrder(f"pure t^{j} discrepancy at {p}; input violates the diagram axioms")
        mhat, g = Charge(m).primitive()
        n0 = _crossing_normal(mhat, CCW)
        # the new ray contributes a * <n0, e_i> to the multiplier of X_i
        if vec[0] * mhat[0] + vec[1] * mhat[1] != 0:
            raise NonconvergentOrder(f"discrepancy at {p} for z^{m} is not tangent to a ray")
        a = -(vec[0] * n0[0] + vec[1] * n0[1]) / (n0[0] ** 2 + n0[1] ** 2)
        f = Series({(0, (0, 0)): 1, (j, tuple(m)): a}, d.trunc, 2)
        rays.append(RayLine(RAY, p, mhat, f))
    return rays


def complete(d: ScatteringDiagram, order: int = None, threads: int = 1) -> ScatteringDiagram:
    """Minimal consistent enlargement of ``d`` modulo t^(order+1).

    Order by order, every singular point of the part that is nontrivial at
    the current order gets the rays cancelling its loop discrepancy.
    """
    k = d.trunc.order if order is None else order
    full = minimal_normalize(d.with_order(k))
    for j in range(1, k + 1):
        dj = full.with_order(j)
        points = singular_points(dj)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda p: _order_j_rays(dj, p, j), points))
        else:
            results = [_order_j_rays(dj, p, j) for p in points]
        added = [ray for rays in results for ray in rays]
        if added:
            lifted = [replace(r, function=Series(r.function.terms, full.trunc, 2)) for r in added]
            full = minimal_normalize(ScatteringDiagram(full.elements + lifted, full.trunc, full.ctx, full.reading))
        check = full.with_order(j)
        for p in singular_points(check):
            if not path_ordered_product(check, p).is_identity():
                raise NonconvergentOrder(f"order {j} does not close at {p}")
    return full


def is_consistent(d: ScatteringDiagram) -> bool:
    return all(path_ordered_product(d, p).is_identity() for p in singular_points(d))


def nontrivial_added(original: ScatteringDiagram, completed: ScatteringDiagram):
    keys = {el.support_key() for el in original.elements}
    return [el for el in completed.elements if el.support_key() not in keys]


# BPS spectra

@dataclass
class MarkedBPSDiagram:
    diagram: ScatteringDiagram
    provenance: dict  # support key -> list of (charge, omega, l)


def bps_initial_diagram(spectrum, ctx: LatticeContext, ref: QuadraticRefinement, l: int = 1,
                        order: int = 1) -> MarkedBPSDiagram:
    """One ray per charge and one per its negative through the origin.

    ``spectrum`` holds (gamma, omega, direction) with direction the plane
    vector m with x_gamma = t z^m; both rays carry (1 - sigma(gamma) x_gamma)^(l*omega).
    """
    trunc = t_truncation(order)
    elements = []
    prov = {}
    for gamma, omega, m in spectrum:
        m = Charge(m)
        if len(m) != 2:
            raise RankMismatch("ray directions must be plane vectors")
        sigma = refinement_sign(ctx, ref, gamma)
        mhat, g = m.primitive()
        base = Series({(0, (0, 0)): 1, (1, tuple(m)): -sigma}, trunc, 2)
        f = series_pow(base, l * omega)
        for u in (mhat, -mhat):
            el = RayLine(RAY, (0, 0), u, f, label=f"g{tuple(gamma)}")
            elements.append(el)
            prov.setdefault(el.support_key(), []).append((Charge(gamma), omega, l))
    d = minimal_normalize(ScatteringDiagram(elements, trunc, plane_context(), "rays"))
    return MarkedBPSDiagram(d, prov)


def spectrum_order_key(model: CentralChargeModel, theta: float | None = None):
    """Larger ray phase sorts further left; phases measured from theta."""
    def key(gamma):
        ph = ray_phase(model, gamma)
        if theta is not None:
            ph = (ph - theta) % (2 * math.pi)
        return -ph
    return key


def spectrum_generator_factorize(S: FormalAutomorphism, model: CentralChargeModel, ref: QuadraticRefinement,
                                 max_degree: int = None, theta: float | None = None, tol: float = 1e-12):
    return factorize_ordered(model.ctx, ref, S, spectrum_order_key(model, theta), max_degree, tol)
