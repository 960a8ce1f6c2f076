"""Conditional infimum and supremum on finite filtered spaces.

With no null outcomes, the greatest lower bound of ``X`` that is constant
on the atoms of a partition is just the lattice infimum of ``X`` over
each atom.  That identification is what every function here relies on.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .lattice import INF, REALS, Lattice
from .space import AdaptedProcess, FiniteFilteredSpace, StoppingTime, f_tau_atoms


def cond_inf(X: Sequence, partition, lattice: Lattice = REALS) -> tuple:
    """Greatest ``partition``-measurable lower bound of ``X``."""
    out = [None] * len(X)
    for atom in partition:
        v = lattice.inf(X[w] for w in atom)
        for w in atom:
            out[w] = v
    return tuple(out)


def cond_sup(X: Sequence, partition, lattice: Lattice = REALS) -> tuple:
    """Least ``partition``-measurable upper bound of ``X``."""
    out = [None] * len(X)
    for atom in partition:
        v = lattice.sup(X[w] for w in atom)
        for w in atom:
            out[w] = v
    return tuple(out)


def pointwise_sup(family: Sequence[Sequence], lattice: Lattice = REALS) -> tuple:
    return tuple(lattice.sup(vals) for vals in zip(*family))


def pointwise_inf(family: Sequence[Sequence], lattice: Lattice = REALS) -> tuple:
    return tuple(lattice.inf(vals) for vals in zip(*family))


def expected_phi(X: Sequence, probs: Sequence, lattice: Lattice):
    # exact when phi is rational-valued (power sets), float otherwise
    return sum(p * lattice.phi(x) for p, x in zip(probs, X))


def ess_sup_by_phi(family: Sequence[Sequence], probs: Sequence, lattice: Lattice = REALS) -> tuple:
    """Essential supremum found by climbing the expected score.

    Starts from the first member and keeps joining in any member that
    strictly raises ``E[phi]``; stops when no member does.  Since ``phi`` is
    strictly increasing and every outcome has positive mass, the fixed
    point dominates the whole family.
    """
    family = [tuple(X) for X in family]
    if not family:
        raise ValueError("empty family")
    best = family[0]
    score = expected_phi(best, probs, lattice)
    improved = True
    while improved:
        improved = False
        for X in family:
            cand = tuple(lattice.join(a, b) for a, b in zip(best, X))
            s = expected_phi(cand, probs, lattice)
            if s > score:
                best, score, improved = cand, s, True
    return best


def ess_sup(family: Sequence[Sequence], lattice: Lattice = REALS, probs: Sequence | None = None) -> tuple:
    """Pointwise supremum; cross-checked against the score-climbing route when ``probs`` is given."""
    family = [tuple(X) for X in family]
    if not family:
        raise ValueError("empty family")
    out = pointwise_sup(family, lattice)
    if probs is not None:
        other = ess_sup_by_phi(family, probs, lattice)
        if not all(lattice.eq(a, b) for a, b in zip(out, other)):
            raise AssertionError("score-climbing essential supremum disagrees with the pointwise one")
    return out


def inf_process(X: Sequence, space: FiniteFilteredSpace, lattice: Lattice = REALS) -> AdaptedProcess:
    """``V_t = cond_inf(X, F_t)`` for ``t = 0..T``.

    Built backwards with the tower rule, so each atom meets the values of
    its children at the next time instead of every outcome below it.
    """
    T = space.T
    rows = [None] * (T + 1)
    rows[T] = cond_inf(X, space.atoms(T), lattice)
    for t in range(T - 1, -1, -1):
        nxt = rows[t + 1]
        out = [None] * len(X)
        for atom in space.atoms(t):
            reps = {space.atom_of(t + 1, w)[0] for w in atom}
            v = lattice.inf(nxt[r] for r in sorted(reps))
            for w in atom:
                out[w] = v
        rows[t] = tuple(out)
    return AdaptedProcess(space, tuple(rows), lattice)


def sample_at(V: AdaptedProcess, tau: StoppingTime) -> tuple:
    """Pathwise ``V_tau``, reading ``V_inf`` as ``V_T``."""
    T = V.space.T
    return tuple(V.grid[T if t == INF else t][w] for w, t in enumerate(tau.tau))


def cond_inf_at_stopping_time(X: Sequence, tau: StoppingTime, lattice: Lattice = REALS) -> tuple:
    """Conditional infimum given the information at ``tau``."""
    from .space import validate_stopping_time

    rep = validate_stopping_time(tau)
    if not rep.passed:
        raise ValueError(f"invalid stopping time: {rep.failures[0].witness}")
    return cond_inf(X, f_tau_atoms(tau), lattice)


def negate(X: Sequence) -> tuple:
    return tuple(-x for x in X)


def as_fractions(X: Sequence) -> tuple:
    return tuple(x if x in (INF, -INF) else Fraction(x) for x in X)
