"""Complete lattices with a strictly increasing real score.

Every lattice here exposes the same small surface: ``leq``, ``join``,
``meet``, ``sup``, ``inf``, ``top``, ``bottom`` and ``phi``.  Values are
plain immutable Python objects (``Fraction``/``float`` for the extended
real line, ``frozenset`` for power sets, :class:`~condinf.convex.Polytope2`
for planar convex sets), so lattice instances carry no per-value state.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, Iterable, Sequence

INF = math.inf


def as_rational(x):
    """Coerce ints, rational strings and Fractions to ``Fraction``; keep ±inf and floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not lattice values")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        if s in ("-inf", "-infinity"):
            return -INF
        return Fraction(s)
    raise TypeError(f"cannot read {x!r} as an extended real")


class Lattice(ABC):
    """A complete lattice together with a strictly increasing map into the reals."""

    name: str = "lattice"
    #: whether ``leq`` is a total order (needed for the max-linearity rule)
    is_total: bool = False

    @abstractmethod
    def leq(self, a, b) -> bool: ...

    @abstractmethod
    def join(self, a, b): ...

    @abstractmethod
    def meet(self, a, b): ...

    @property
    @abstractmethod
    def top(self): ...

    @property
    @abstractmethod
    def bottom(self): ...

    @abstractmethod
    def phi(self, a) -> float: ...

    def eq(self, a, b) -> bool:
        return a == b

    def lt(self, a, b) -> bool:
        return self.leq(a, b) and not self.leq(b, a)

    def sup(self, values: Iterable):
        """Least upper bound of a finite family; ``sup([])`` is ``bottom``."""
        return reduce(self.join, values, self.bottom)

    def inf(self, values: Iterable):
        """Greatest lower bound of a finite family; ``inf([])`` is ``top``."""
        return reduce(self.meet, values, self.top)

    # -- serialization -------------------------------------------------
    @abstractmethod
    def describe(self) -> dict: ...

    @abstractmethod
    def encode(self, a) -> Any: ...

    @abstractmethod
    def decode(self, data): ...

    def __repr__(self):
        return f"{type(self).__name__}()"


class ExtendedReal(Lattice):
    """The extended real line ``[-inf, inf]`` with its usual order.

    Finite values are ``Fraction`` in exact work and ``float`` in Monte
    Carlo work; the infinities are ``math.inf`` / ``-math.inf`` either way.
    ``phi`` is ``(2/pi) * arctan`` on finite values and ``±2`` at the ends.
    """

    name = "extended_real"
    is_total = True

    def leq(self, a, b):
        return a <= b

    def lt(self, a, b):
        return a < b

    def join(self, a, b):
        return a if a >= b else b

    def meet(self, a, b):
        return a if a <= b else b

    def sup(self, values):
        return max(values, default=-INF)

    def inf(self, values):
        return min(values, default=INF)

    @property
    def top(self):
        return INF

    @property
    def bottom(self):
        return -INF

    def phi(self, a):
        if a == INF:
            return 2.0
        if a == -INF:
            return -2.0
        return 2.0 / math.pi * math.atan(a)

    def describe(self):
        return {"lattice": "extended_real"}

    def encode(self, a):
        if a == INF:
            return "inf"
        if a == -INF:
            return "-inf"
        if isinstance(a, float):
            return a
        return str(Fraction(a))

    def decode(self, data):
        return as_rational(data)


REALS = ExtendedReal()


def dyadic_weights(n: int) -> tuple[Fraction, ...]:
    """Weights ``2^-1, 2^-2, ...`` renormalised to sum to one."""
    raw = [Fraction(1, 2 ** (k + 1)) for k in range(n)]
    total = sum(raw)
    return tuple(w / total for w in raw)


class PowerSet(Lattice):
    """Subsets of a finite ground set ordered by inclusion.

    Elements are ``frozenset`` of ground labels.  ``phi`` sums the strictly
    positive weights of the members, so ``phi(empty) == 0`` and
    ``phi(ground) == 1``.
    """

    name = "power_set"

    def __init__(self, ground: Sequence, weights: Sequence | None = None):
        ground = tuple(ground)
        if len(set(ground)) != len(ground):
            raise ValueError("ground labels must be distinct")
        if weights is None:
            weights = dyadic_weights(len(ground))
        weights = tuple(as_rational(w) for w in weights)
        if len(weights) != len(ground):
            raise ValueError("need one weight per ground element")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be strictly positive")
        if sum(weights) != 1:
            raise ValueError("weights must sum to one")
        self.ground = ground
        self.weights = dict(zip(ground, weights))
        self._full = frozenset(ground)

    def _check(self, a):
        if not a <= self._full:
            raise ValueError(f"{set(a) - self._full} not in the ground set")
        return a

    def element(self, *labels) -> frozenset:
        return self._check(frozenset(labels))

    def leq(self, a, b):
        return a <= b

    def join(self, a, b):
        return a | b

    def meet(self, a, b):
        return a & b

    @property
    def top(self):
        return self._full

    @property
    def bottom(self):
        return frozenset()

    def phi(self, a):
        return sum((self.weights[x] for x in self._check(a)), Fraction(0))

    def describe(self):
        return {
            "lattice": "power_set",
            "ground": list(self.ground),
            "weights": [str(self.weights[x]) for x in self.ground],
        }

    def encode(self, a):
        order = {x: i for i, x in enumerate(self.ground)}
        return sorted(a, key=order.__getitem__)

    def decode(self, data):
        if data == "top":
            return self.top
        return self._check(frozenset(data))

    def __eq__(self, other):
        return (
            isinstance(other, PowerSet)
            and self.ground == other.ground
            and self.weights == other.weights
        )

    def __hash__(self):
        return hash(self.ground)

    def __repr__(self):
        return f"PowerSet({list(self.ground)!r})"


def order_indicator(lattice: Lattice, n_outcomes: int, event: Iterable[int]) -> tuple:
    """The random element equal to ``bottom`` on ``event`` and ``top`` elsewhere."""
    event = set(event)
    return tuple(lattice.bottom if w in event else lattice.top for w in range(n_outcomes))


# ---------------------------------------------------------------------------
# Dedekind-complete bases and their completion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ray:
    """The infinite family ``start + k * step`` for ``k = 0, 1, 2, ...``.

    Lets a finite argument list stand for a family with no bound in one
    direction when calling ``sup``/``inf`` on a Dedekind-complete base.
    """

    start: Any
    step: Any


class RationalLine:
    """The rationals: Dedekind complete but missing ``±inf``."""

    name = "rationals"
    is_total = True

    def leq(self, a, b):
        return a <= b

    def join(self, a, b):
        return max(a, b)

    def meet(self, a, b):
        return min(a, b)

    def sup(self, values):
        """Supremum, or ``None`` if the family is unbounded above or empty."""
        pts = []
        for v in values:
            if isinstance(v, Ray):
                if v.step > 0:
                    return None
                pts.append(v.start)
            else:
                pts.append(v)
        return max(pts) if pts else None

    def inf(self, values):
        pts = []
        for v in values:
            if isinstance(v, Ray):
                if v.step < 0:
                    return None
                pts.append(v.start)
            else:
                pts.append(v)
        return min(pts) if pts else None

    def phi0(self, a):
        return float(a)

    def encode(self, a):
        return str(Fraction(a))

    def decode(self, data):
        return Fraction(data)


class RationalPlane:
    """Pairs of rationals under the coordinatewise (product) order."""

    name = "rational_plane"
    is_total = False

    def leq(self, a, b):
        return a[0] <= b[0] and a[1] <= b[1]

    def join(self, a, b):
        return (max(a[0], b[0]), max(a[1], b[1]))

    def meet(self, a, b):
        return (min(a[0], b[0]), min(a[1], b[1]))

    def _bound(self, values, pick, escapes):
        pts = []
        for v in values:
            if isinstance(v, Ray):
                if any(escapes(s) for s in v.step):
                    return None
                pts.append(v.start)
            else:
                pts.append(v)
        if not pts:
            return None
        return (pick(p[0] for p in pts), pick(p[1] for p in pts))

    def sup(self, values):
        return self._bound(values, max, lambda s: s > 0)

    def inf(self, values):
        return self._bound(values, min, lambda s: s < 0)

    def phi0(self, a):
        # strictly increasing in the product order
        return float(a[0] + a[1])

    def encode(self, a):
        return [str(Fraction(a[0])), str(Fraction(a[1]))]

    def decode(self, data):
        return (Fraction(data[0]), Fraction(data[1]))


class _End:
    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"

    def __reduce__(self):
        return (_end, (self.sign,))


def _end(sign):
    return POS_END if sign > 0 else NEG_END


NEG_END = _End(-1)
POS_END = _End(+1)


class DedekindExtension(Lattice):
    """Complete lattice obtained by adjoining ``-inf`` and ``+inf`` to a base.

    The base must supply ``leq``, ``join``, ``meet``, partial ``sup``/``inf``
    (returning ``None`` when no bound exists in the base) and a strictly
    increasing ``phi0``.  Unbounded families get ``+inf``/``-inf``; the score
    is squashed through ``(2/pi) * arctan`` so the endpoints can sit at ``±2``.
    """

    name = "dedekind"

    def __init__(self, base):
        self.base = base
        self.is_total = bool(getattr(base, "is_total", False))

    def leq(self, a, b):
        if a is NEG_END or b is POS_END:
            return True
        if a is POS_END or b is NEG_END:
            return False
        return self.base.leq(a, b)

    def join(self, a, b):
        if a is POS_END or b is POS_END:
            return POS_END
        if a is NEG_END:
            return b
        if b is NEG_END:
            return a
        return self.base.join(a, b)

    def meet(self, a, b):
        if a is NEG_END or b is NEG_END:
            return NEG_END
        if a is POS_END:
            return b
        if b is POS_END:
            return a
        return self.base.meet(a, b)

    def sup(self, values):
        rest = []
        for v in values:
            if v is POS_END:
                return POS_END
            if v is not NEG_END:
                rest.append(v)
        if not rest:
            return NEG_END
        s = self.base.sup(rest)
        return POS_END if s is None else s

    def inf(self, values):
        rest = []
        for v in values:
            if v is NEG_END:
                return NEG_END
            if v is not POS_END:
                rest.append(v)
        if not rest:
            return POS_END
        s = self.base.inf(rest)
        return NEG_END if s is None else s

    @property
    def top(self):
        return POS_END

    @property
    def bottom(self):
        return NEG_END

    def phi(self, a):
        if a is POS_END:
            return 2.0
        if a is NEG_END:
            return -2.0
        return 2.0 / math.pi * math.atan(self.base.phi0(a))

    def describe(self):
        return {"lattice": "dedekind", "base": self.base.name}

    def encode(self, a):
        if a is POS_END:
            return "inf"
        if a is NEG_END:
            return "-inf"
        return self.base.encode(a)

    def decode(self, data):
        if data == "inf":
            return POS_END
        if data == "-inf":
            return NEG_END
        return self.base.decode(data)

    def __repr__(self):
        return f"DedekindExtension({type(self.base).__name__}())"


def dedekind_extend(base) -> DedekindExtension:
    return DedekindExtension(base)


def lattice_from_spec(spec: dict) -> Lattice:
    """Build a lattice from its scenario description (``{"lattice": ...}``)."""
    kind = spec.get("lattice")
    if kind == "extended_real":
        return REALS
    if kind == "power_set":
        return PowerSet(spec["ground"], spec.get("weights"))
    if kind == "polytope2":
        from .convex import POLYTOPES

        return POLYTOPES
    if kind == "dedekind":
        bases = {"rationals": RationalLine, "rational_plane": RationalPlane}
        return DedekindExtension(bases[spec.get("base", "rationals")]())
    raise ValueError(f"unknown lattice {kind!r}")
