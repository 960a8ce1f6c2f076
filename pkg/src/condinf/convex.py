"""Closed convex subsets of the plane, restricted to rational polytopes.

A :class:`Polytope2` is stored in a canonical vertex form so that equal
sets compare equal: no vertices for the empty set, one point, the two
endpoints of a segment (lexicographic order), or the extreme points of a
polygon in counterclockwise order starting from the lexicographically
least one.  All set operations are exact over ``Fraction``.  The whole
plane is kept as a separate sentinel so the lattice has a top element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .lattice import Lattice

Point = tuple  # (Fraction, Fraction)


def _num(v):
    # integral coordinates stay plain ints: exact, and much faster than Fraction
    if type(v) is int:
        return v
    f = Fraction(v)
    return f.numerator if f.denominator == 1 else f


def _pt(p) -> Point:
    x, y = p
    return (_num(x), _num(y))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Polytope2:
    vertices: tuple = ()
    plane: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.plane and not self.vertices

    @property
    def dim(self) -> int:
        if self.plane:
            return 2
        return min(len(self.vertices), 3) - 1

    def __repr__(self):
        if self.plane:
            return "Polytope2(plane)"
        verts = ", ".join(f"({x}, {y})" for x, y in self.vertices)
        return f"Polytope2([{verts}])"


EMPTY = Polytope2()
PLANE = Polytope2(plane=True)


def hull(points: Iterable) -> Polytope2:
    """Canonical convex hull of finitely many rational points."""
    pts = sorted(set(_pt(p) for p in points))
    if len(pts) <= 2:
        return Polytope2(tuple(pts))
    # Andrew's monotone chain; collinear points are dropped
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2:
        # all points collinear: the chain collapses to the two extremes
        return Polytope2(tuple(sorted(ring)))
    return Polytope2(tuple(ring))


def polygon(points: Sequence) -> Polytope2:
    return hull(points)


def point(x, y) -> Polytope2:
    return Polytope2((_pt((x, y)),))


def segment(p, q) -> Polytope2:
    return hull([p, q])


def box(x0, y0, x1, y1) -> Polytope2:
    return hull([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def halfplanes(A: Polytope2) -> list[tuple]:
    """Inequalities ``a*x + b*y <= c`` whose common solution set is ``A``.

    Only defined for nonempty bounded ``A``.
    """
    v = A.vertices
    if len(v) == 1:
        (x, y), = v
        return [(1, 0, x), (-1, 0, -x), (0, 1, y), (0, -1, -y)]
    if len(v) == 2:
        p, q = v
        dx, dy = q[0] - p[0], q[1] - p[1]
        # the supporting line from both sides, then the two end caps
        n = (-dy, dx)
        c = n[0] * p[0] + n[1] * p[1]
        return [
            (n[0], n[1], c),
            (-n[0], -n[1], -c),
            (dx, dy, dx * q[0] + dy * q[1]),
            (-dx, -dy, -(dx * p[0] + dy * p[1])),
        ]
    out = []
    for p, q in zip(v, v[1:] + v[:1]):
        # counterclockwise ring: the interior is to the left of each edge
        a, b = q[1] - p[1], p[0] - q[0]
        out.append((a, b, a * p[0] + b * p[1]))
    return out


def _clip(ring: list, a, b, c) -> list:
    """Sutherland-Hodgman step against the half-plane ``a*x + b*y <= c``."""
    if not ring:
        return ring
    out = []
    prev = ring[-1]
    fp = a * prev[0] + b * prev[1] - c
    for cur in ring:
        fc = a * cur[0] + b * cur[1] - c
        if fc <= 0:
            if fp > 0:
                t = Fraction(fp) / (fp - fc)
                out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
            out.append(cur)
        elif fp <= 0:
            t = Fraction(fp) / (fp - fc)
            out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
        prev, fp = cur, fc
    return out


def meet(A: Polytope2, B: Polytope2) -> Polytope2:
    """Exact intersection ``A ∩ B``."""
    if A.plane:
        return B
    if B.plane:
        return A
    if A.is_empty or B.is_empty:
        return EMPTY
    if len(A.vertices) < len(B.vertices):
        A, B = B, A
    ring = list(B.vertices)
    for a, b, c in halfplanes(A):
        ring = _clip(ring, a, b, c)
        if not ring:
            return EMPTY
    return hull(ring)


def join(A: Polytope2, B: Polytope2) -> Polytope2:
    """Convex hull of ``A ∪ B``."""
    if A.plane or B.plane:
        return PLANE
    return hull(A.vertices + B.vertices)


def contains_point(A: Polytope2, p) -> bool:
    if A.plane:
        return True
    if A.is_empty:
        return False
    p = _pt(p)
    return all(a * p[0] + b * p[1] <= c for a, b, c in halfplanes(A))


def contains(A: Polytope2, B: Polytope2) -> bool:
    """Whether ``B ⊆ A``."""
    if B.is_empty or A.plane:
        return True
    if B.plane or A.is_empty:
        return False
    hs = halfplanes(A)
    return all(a * x + b * y <= c for x, y in B.vertices for a, b, c in hs)


# ---------------------------------------------------------------------------
# affine hull and the strictly increasing score
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineHull2:
    dim: int
    anchor: tuple | None = None
    basis: tuple = ()

    def contains(self, p, tol=1e-12) -> bool:
        if self.dim == -1:
            return False
        if self.dim == 2:
            return True
        d = np.asarray(p, dtype=float) - np.asarray(self.anchor)
        for u in self.basis:
            d = d - np.dot(d, u) * np.asarray(u)
        return float(np.linalg.norm(d)) <= tol * max(1.0, float(np.linalg.norm(p)))


def affine_hull(A: Polytope2) -> AffineHull2:
    if A.plane or len(A.vertices) >= 3:
        return AffineHull2(2)
    if A.is_empty:
        return AffineHull2(-1)
    p = tuple(float(c) for c in A.vertices[0])
    if len(A.vertices) == 1:
        return AffineHull2(0, p)
    q = A.vertices[1]
    d = np.array([float(q[0]) - p[0], float(q[1]) - p[1]])
    return AffineHull2(1, p, (tuple(d / np.linalg.norm(d)),))


def _normal_mass(a: float, b: float) -> float:
    """``Phi(b) - Phi(a)`` for ``a <= b`` without cancellation in the tails."""
    if a > 0:
        return float(ndtr(-a) - ndtr(-b))
    return float(ndtr(b) - ndtr(a))


@lru_cache(maxsize=None)
def _gauss_legendre_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def _triangle_gaussian_mass(a, b, c, n: int) -> float:
    """Standard bivariate normal mass of a triangle, tensor Gauss-Legendre of order ``n``.

    Uses the collapsed-square map ``(u, v) -> a + u (b - a) + u v (c - b)``.
    """
    x, w = _gauss_legendre_unit(n)
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    e1 = b - a
    e2 = c - b
    jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
    px = a[0] + u * e1[0] + u * v * e2[0]
    py = a[1] + u * e1[1] + u * v * e2[1]
    dens = np.exp(-0.5 * (px * px + py * py)) / (2 * math.pi)
    return float(np.sum(wu * wv * u * dens) * jac)


def polygon_gaussian_mass(vertices: Sequence, tol: float = 1e-10, max_order: int = 256) -> float:
    """Standard bivariate normal mass of a convex polygon.

    Fans out from the vertex centroid and doubles the quadrature order per
    triangle until two successive estimates differ by less than ``tol``.
    """
    v = np.array([[float(x), float(y)] for x, y in vertices])
    g = v.mean(axis=0)
    total = 0.0
    for i in range(len(v)):
        a, b, c = g, v[i], v[(i + 1) % len(v)]
        n = 8
        prev = _triangle_gaussian_mass(a, b, c, n)
        while True:
            n *= 2
            cur = _triangle_gaussian_mass(a, b, c, n)
            if abs(cur - prev) < tol / len(v) or n >= max_order:
                break
            prev = cur
        total += cur
    return total


def gaussian_mass(A: Polytope2) -> float:
    """Mass of ``A`` under the standard Gaussian conditioned on ``aff(A)``."""
    if A.is_empty:
        return 0.0
    if A.plane:
        return 1.0
    if len(A.vertices) == 1:
        return 1.0
    if len(A.vertices) == 2:
        h = affine_hull(A)
        u = np.asarray(h.basis[0])
        s = sorted(float(np.dot(np.array([float(c) for c in p]), u)) for p in A.vertices)
        # the foot of the origin on the line is where the coordinate s vanishes
        return _normal_mass(s[0], s[1])
    return polygon_gaussian_mass(A.vertices)


def phi_convex(A: Polytope2) -> float:
    """``dim aff(A)`` plus the conditional Gaussian mass of ``A``; 0 for the empty set."""
    if A.is_empty:
        return 0.0
    return A.dim + gaussian_mass(A)


class PolytopeLattice(Lattice):
    """``CO(R^2)`` restricted to rational polytopes, with the plane on top."""

    name = "polytope2"

    def leq(self, a, b):
        return contains(b, a)

    def join(self, a, b):
        return join(a, b)

    def meet(self, a, b):
        return meet(a, b)

    def sup(self, values):
        values = list(values)
        if any(v.plane for v in values):
            return PLANE
        return hull(p for v in values for p in v.vertices)

    @property
    def top(self):
        return PLANE

    @property
    def bottom(self):
        return EMPTY

    def phi(self, a):
        return phi_convex(a)

    def describe(self):
        return {"lattice": "polytope2"}

    def encode(self, a):
        return encode_polytope(a)

    def decode(self, data):
        return decode_polytope(data)


POLYTOPES = PolytopeLattice()


def encode_polytope(A: Polytope2):
    if A.plane:
        return "plane"
    return [[str(x), str(y)] for x, y in A.vertices]


def decode_polytope(data) -> Polytope2:
    if data == "plane":
        return PLANE
    return hull((Fraction(x), Fraction(y)) for x, y in data)
