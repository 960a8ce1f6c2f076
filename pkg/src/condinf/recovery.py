"""Recovering monotone processes from their terminal value.

A nondecreasing adapted process ``U`` is recoverable when ``U_t`` equals
the conditional infimum of ``U_T`` given ``F_t`` at every time.  Three
equivalent formulations are decided here, each with its own search and an
explicit witness on failure:

* :func:`check_recovery_i` compares ``U`` with the inf-process of ``U_T``;
* :func:`check_no_sure_improvement` looks for a stopping time and a bound
  ``Y <= U_T`` known at that time that strictly beats ``U``;
* :func:`check_conditional_improvement` looks for a ``Y`` strictly above
  ``U_tau`` that ``U_T`` reaches with conditional probability one.

Stopping times only need to be searched through ``(t, atom)`` pairs:
``{tau = t}`` is a union of time-``t`` atoms and a violation on any of
them restricts to a violation on a single atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .conditional import cond_inf, inf_process, sample_at
from .convex import POLYTOPES, hull
from .lattice import INF, REALS, Lattice, PowerSet
from .report import CheckResult
from .space import (
    AdaptedProcess,
    StoppingTime,
    f_tau_atoms,
    is_measurable,
    validate_process,
    validate_stopping_time,
)


def _require_monotone(U: AdaptedProcess) -> Lattice:
    if U.lattice is None:
        raise ValueError("a monotone process needs a lattice")
    rep = validate_process(U, monotone=True)
    if not rep.passed:
        bad = rep.failures[0]
        raise ValueError(f"process rejected ({bad.name}): {bad.witness}")
    return U.lattice


def check_recovery_i(U: AdaptedProcess) -> CheckResult:
    """``U_t == cond_inf(U_T, F_t)`` on every atom of every time."""
    L = _require_monotone(U)
    V = inf_process(U.terminal, U.space, L)
    for t in range(U.space.T + 1):
        for atom in U.space.atoms(t):
            w = atom[0]
            if not L.eq(U.grid[t][w], V.grid[t][w]):
                return CheckResult("recovery_i", False, {"t": t, "atom": atom, "U_t": U.grid[t][w], "cond_inf": V.grid[t][w]})
    return CheckResult("recovery_i", True)


def validate_witness_ii(U: AdaptedProcess, tau: StoppingTime, Y: Sequence) -> bool:
    """Whether ``(tau, Y)`` is a sure improvement on ``U``.

    Requires: ``tau`` a stopping time with ``P(tau < inf) > 0``, ``Y`` known
    at ``tau``, ``Y <= U_T`` everywhere and ``U_tau < Y`` on ``{tau < inf}``.
    """
    L = U.lattice
    if not validate_stopping_time(tau).passed:
        return False
    if not is_measurable(Y, f_tau_atoms(tau), L.eq):
        return False
    finite = tau.finite
    if not finite:
        return False
    UT = U.terminal
    if not all(L.leq(Y[w], UT[w]) for w in range(U.space.m)):
        return False
    U_tau = sample_at(U, tau)
    return all(L.lt(U_tau[w], Y[w]) for w in finite)


def check_no_sure_improvement(U: AdaptedProcess) -> CheckResult:
    """No stopping time admits a sure strict improvement known at that time."""
    L = _require_monotone(U)
    space = U.space
    UT = U.terminal
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            # the largest bound known on this atom that U_T never undercuts
            best = L.inf(UT[w] for w in atom)
            if L.lt(U.grid[t][atom[0]], best):
                members = set(atom)
                tau = StoppingTime(space, tuple(t if w in members else INF for w in range(space.m)))
                Y = cond_inf(UT, f_tau_atoms(tau), L)
                if not validate_witness_ii(U, tau, Y):
                    raise AssertionError("constructed improvement does not certify itself")
                return CheckResult("no_sure_improvement", False, {"t": t, "atom": atom, "tau": tau.tau, "Y": Y})
    return CheckResult("no_sure_improvement", True)


def validate_witness_iii(U: AdaptedProcess, tau: StoppingTime, Y: Sequence) -> bool:
    """Whether ``(tau, Y)`` violates the conditional-improvement condition.

    Requires ``U_tau < Y`` on ``{U_tau < top}`` and an atom of ``F_tau``
    inside ``{U_tau < top}`` on which ``Y <= U_T`` holds surely.
    """
    L = U.lattice
    if not validate_stopping_time(tau).passed:
        return False
    blocks = f_tau_atoms(tau)
    if not is_measurable(Y, blocks, L.eq):
        return False
    U_tau = sample_at(U, tau)
    UT = U.terminal
    below_top = [w for w in range(U.space.m) if L.lt(U_tau[w], L.top)]
    if not all(L.lt(U_tau[w], Y[w]) for w in below_top):
        return False
    below = set(below_top)
    return any(
        all(w in below for w in B) and all(L.leq(Y[w], UT[w]) for w in B)
        for B in blocks
    )


def check_conditional_improvement(U: AdaptedProcess) -> CheckResult:
    """Every strict improvement on ``{U_tau < top}`` fails with positive conditional probability."""
    L = _require_monotone(U)
    space = U.space
    UT = U.terminal
    top = L.top
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            u = U.grid[t][atom[0]]
            if not L.lt(u, top):
                continue
            # any Y with P(Y <= U_T | F_t) = 1 on the atom sits below this bound,
            # so a strict improvement exists iff the bound itself is one
            bound = L.inf(UT[w] for w in atom)
            if L.lt(u, bound):
                members = set(atom)
                tau = StoppingTime.constant(space, t)
                Y = tuple(bound if w in members else top for w in range(space.m))
                if not validate_witness_iii(U, tau, Y):
                    raise AssertionError("constructed improvement does not certify itself")
                return CheckResult("conditional_improvement", False, {"t": t, "atom": atom, "tau": tau.tau, "Y": Y})
    return CheckResult("conditional_improvement", True)


@dataclass
class RecoveryVerdict:
    recovery_i: CheckResult
    no_sure_improvement: CheckResult
    conditional_improvement: CheckResult

    @property
    def flags(self) -> tuple[bool, bool, bool]:
        return (self.recovery_i.passed, self.no_sure_improvement.passed, self.conditional_improvement.passed)

    @property
    def consistent(self) -> bool:
        return len(set(self.flags)) == 1

    @property
    def passed(self) -> bool:
        return all(self.flags)

    def checks(self) -> list[CheckResult]:
        return [self.recovery_i, self.no_sure_improvement, self.conditional_improvement]


def check_ncr(U: AdaptedProcess) -> RecoveryVerdict:
    return RecoveryVerdict(check_recovery_i(U), check_no_sure_improvement(U), check_conditional_improvement(U))


# ---------------------------------------------------------------------------
# stickiness
# ---------------------------------------------------------------------------


def abs_metric(a, b):
    return abs(a - b)


def euclidean_metric(a, b):
    d2 = sum((x - y) ** 2 for x, y in zip(a, b))
    return math.sqrt(d2) if d2 else 0


def discrete_metric(a, b):
    return 0 if a == b else 1


def _gap(a, b):
    """``b - a`` on the extended line, reading ``inf - inf`` as zero."""
    if a == b:
        return 0
    return b - a


def check_sticky(X: AdaptedProcess, metric: Callable = abs_metric) -> CheckResult:
    """Whether ``X`` can stay within any positive distance of ``X_tau`` up to ``T``.

    ``epsilon`` known at ``t`` is constant on each atom and the condition is
    monotone in it, so the only candidate that matters on an atom is half
    the smallest realised excursion ``sup_{s>=t} d(X_s, X_t)``.
    """
    space = X.space
    T = space.T
    for t in range(T + 1):
        for atom in space.atoms(t):
            excursions = [
                max((metric(X.grid[s][w], X.grid[t][w]) for s in range(t, T + 1)), default=0)
                for w in atom
            ]
            smallest = min(excursions)
            if smallest > 0:
                eps = smallest / 2 if isinstance(smallest, float) else Fraction(smallest) / 2
                return CheckResult("sticky", False, {"t": t, "atom": atom, "epsilon": eps})
    return CheckResult("sticky", True)


def check_sticky_monotone(U: AdaptedProcess) -> CheckResult:
    """``P(U_T <= U_t + eps | F_t) > 0`` for every ``t`` and every ``eps > 0`` known at ``t``."""
    space = U.space
    UT = U.terminal
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            u = U.grid[t][atom[0]]
            smallest = min(_gap(u, UT[w]) for w in atom)
            if smallest > 0:
                return CheckResult("sticky_monotone", False, {"t": t, "atom": atom, "epsilon": smallest / 2})
    return CheckResult("sticky_monotone", True)


# ---------------------------------------------------------------------------
# monotone functionals of a process
# ---------------------------------------------------------------------------


def _identity(x):
    return x


def running_max(X: AdaptedProcess, f: Callable = _identity) -> AdaptedProcess:
    """``U_t = max_{s <= t} f(X_s)``."""
    rows = []
    cur = None
    for row in X.grid:
        vals = tuple(f(v) for v in row)
        cur = vals if cur is None else tuple(max(a, b) for a, b in zip(cur, vals))
        rows.append(cur)
    return AdaptedProcess(X.space, tuple(rows), REALS)


def visit_functional(X: AdaptedProcess, K: Iterable, increments: Sequence | None = None) -> AdaptedProcess:
    """Weighted count of the times ``s <= t`` at which ``X_s`` lies in ``K``.

    With unit increments and ``K = {x}`` this is the visit count at ``x``.
    """
    K = set(K)
    T = X.space.T
    if increments is None:
        increments = [1] * (T + 1)
    if len(increments) != T + 1 or any(w < 0 for w in increments):
        raise ValueError("need T + 1 nonnegative increments")
    rows = []
    cur = (Fraction(0),) * X.space.m
    for s, row in enumerate(X.grid):
        w = Fraction(increments[s])
        cur = tuple(c + (w if v in K else 0) for c, v in zip(cur, row))
        rows.append(cur)
    return AdaptedProcess(X.space, tuple(rows), REALS)


def entry_functional(X: AdaptedProcess, K: Iterable, increments: Sequence | None = None) -> AdaptedProcess:
    """Weighted count of arrivals of ``X`` into ``K``.

    Increments at step ``s`` only when ``X_{s-1}`` is outside ``K`` and
    ``X_s`` inside it (an initial position in ``K`` counts at ``s = 0``).
    So ``U`` is flat while ``X`` stays in ``K`` and while it stays out,
    which is what a sticky ``X`` needs for ``U`` to be recoverable.
    """
    K = set(K)
    T = X.space.T
    if increments is None:
        increments = [1] * (T + 1)
    if len(increments) != T + 1 or any(w < 0 for w in increments):
        raise ValueError("need T + 1 nonnegative increments")
    rows = []
    cur = (Fraction(0),) * X.space.m
    prev = None
    for s, row in enumerate(X.grid):
        w = Fraction(increments[s])
        if prev is None:
            cur = tuple(w if v in K else Fraction(0) for v in row)
        else:
            cur = tuple(c + (w if v in K and p not in K else 0) for c, v, p in zip(cur, row, prev))
        rows.append(cur)
        prev = row
    return AdaptedProcess(X.space, tuple(rows), REALS)


def integral_functional(X: AdaptedProcess, f: Callable, dt=1) -> AdaptedProcess:
    """Riemann sum ``U_t = sum_{s <= t} f(X_s) * dt`` for nonnegative ``f``."""
    dt = Fraction(dt)
    rows = []
    cur = (Fraction(0),) * X.space.m
    for row in X.grid:
        inc = [f(v) for v in row]
        if any(i < 0 for i in inc):
            raise ValueError("integrand must be nonnegative")
        cur = tuple(c + i * dt for c, i in zip(cur, inc))
        rows.append(cur)
    return AdaptedProcess(X.space, tuple(rows), REALS)


def convex_hull_process(X: AdaptedProcess) -> AdaptedProcess:
    """``U_t`` = convex hull of the points visited up to ``t``."""
    rows = []
    cur = [hull([]) for _ in range(X.space.m)]
    for row in X.grid:
        cur = [POLYTOPES.join(c, hull([p])) for c, p in zip(cur, row)]
        rows.append(tuple(cur))
    return AdaptedProcess(X.space, tuple(rows), POLYTOPES)


def visited_sites_process(X: AdaptedProcess, lattice: PowerSet | None = None) -> AdaptedProcess:
    """``U_t`` = set of sites visited up to ``t``, as an element of a power set."""
    if lattice is None:
        sites = sorted({v for row in X.grid for v in row})
        lattice = PowerSet(sites)
    rows = []
    cur = [frozenset() for _ in range(X.space.m)]
    for row in X.grid:
        cur = [c | {v} for c, v in zip(cur, row)]
        rows.append(tuple(lattice.decode(c) for c in cur))
    return AdaptedProcess(X.space, tuple(rows), lattice)


def piecewise_linear(knots: Sequence, values: Sequence) -> Callable:
    """Continuous piecewise-linear function through ``(knots[i], values[i])``, flat outside."""
    knots = [Fraction(k) for k in knots]
    values = [Fraction(v) for v in values]

    def f(x):
        x = Fraction(x)
        if x <= knots[0]:
            return values[0]
        for (a, fa), (b, fb) in zip(zip(knots, values), zip(knots[1:], values[1:])):
            if x <= b:
                return fa + (fb - fa) * (x - a) / (b - a)
        return values[-1]

    return f
