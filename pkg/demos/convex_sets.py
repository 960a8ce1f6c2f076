"""Planar convex polytopes as a lattice: meets, joins, scores and a broken join rule."""

from fractions import Fraction

from condinf import POLYTOPES, cond_inf, phi_convex
from condinf.convex import EMPTY, PLANE, box, hull, point, segment



def verts(s):
    return [f"({x}, {y})" for x, y in s.vertices]


unit = box(0, 0, 1, 1)
shifted = box(Fraction(1, 2), Fraction(1, 2), Fraction(3, 2), Fraction(3, 2))
print("unit square meet shifted square:", verts(POLYTOPES.meet(unit, shifted)))
print("unit square join (2, 0):       ", verts(POLYTOPES.join(unit, point(2, 0))))
print("disjoint triangles meet:       ", verts(POLYTOPES.meet(hull([(0, 0), (1, 0), (0, 1)]), hull([(2, 2), (3, 2), (2, 3)]))))

for name, s in [("empty", EMPTY), ("point", point(0, 0)), ("segment", segment((0, 0), (1, 0))), ("unit square", unit), ("plane", PLANE)]:
    print(f"phi({name}) = {phi_convex(s):.6f}")

X = (point(0, 0), point(1, 0))
Z = (point(2, 0), point(2, 0))
P = ((0, 1),)
lhs = cond_inf(tuple(POLYTOPES.join(x, z) for x, z in zip(X, Z)), P, POLYTOPES)
rhs = tuple(POLYTOPES.join(c, z) for c, z in zip(cond_inf(X, P, POLYTOPES), Z))
print("inf(X v Z) =", verts(lhs[0]), " but inf(X) v Z =", verts(rhs[0]))
