"""Martingales on finite trees: running maxima and reconstruction.

The running maximum of a supermartingale is recoverable from its terminal
value, and a nonnegative martingale can be rebuilt from its terminal value
together with its global maximum, even when the maximum is masked below
some known level ``c``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .conditional import inf_process
from .lattice import INF, REALS
from .recovery import check_recovery_i, running_max
from .report import CheckResult, Report
from .space import (
    AdaptedProcess,
    FiniteFilteredSpace,
    cond_expectation,
    conditional_means,
    tree_space,
)


def _one_step_means(M: AdaptedProcess):
    space = M.space
    for t in range(space.T):
        nxt = cond_expectation(M.grid[t + 1], space.atoms(t), space.probs)
        yield t, nxt


def is_martingale(M: AdaptedProcess, probs: Sequence | None = None) -> bool:
    """Exact check of ``E[M_{t+1} | F_t] == M_t``."""
    if probs is not None:
        M = AdaptedProcess(M.space.with_probs(probs), M.grid, M.lattice)
    return all(nxt == M.grid[t] for t, nxt in _one_step_means(M))


def is_supermartingale(M: AdaptedProcess, probs: Sequence | None = None) -> bool:
    """Exact check of ``E[M_{t+1} | F_t] <= M_t``."""
    if probs is not None:
        M = AdaptedProcess(M.space.with_probs(probs), M.grid, M.lattice)
    return all(all(a <= b for a, b in zip(nxt, M.grid[t])) for t, nxt in _one_step_means(M))


def random_equivalent_probs(rng: random.Random, m: int) -> tuple:
    raw = [rng.randint(1, 20) for _ in range(m)]
    total = sum(raw)
    return tuple(Fraction(r, total) for r in raw)


def verify_running_max_recovery(
    M: AdaptedProcess,
    reweightings: int = 10,
    seed=0,
    measures: Sequence[Sequence] = (),
) -> Report:
    """Check that the running maximum of a supermartingale is recoverable.

    ``M`` must be a supermartingale under its own measure or under one of
    the supplied equivalent ``measures``.  The recovery verdict is then
    recomputed under ``reweightings`` random equivalent measures and must
    not change.
    """
    rep = Report()
    super_ok = is_supermartingale(M) or any(is_supermartingale(M, q) for q in measures)
    rep.add(CheckResult("supermartingale", super_ok, None if super_ok else {"reason": "not a supermartingale under any supplied measure"}))
    Mbar = running_max(M)
    base = check_recovery_i(Mbar)
    base.name = "running_max_recovery"
    rep.add(base)
    rng = random.Random(f"reweight:{seed}")
    flips = []
    for k in range(reweightings):
        q = random_equivalent_probs(rng, M.space.m)
        other = check_recovery_i(AdaptedProcess(M.space.with_probs(q), Mbar.grid, REALS))
        if other.passed != base.passed:
            flips.append(k)
    rep.add(CheckResult("measure_change_invariance", not flips, {"flipped": flips} if flips else None))
    return rep


# ---------------------------------------------------------------------------
# reconstruction from (M_T, X v max M)
# ---------------------------------------------------------------------------


@dataclass
class ReconstructionInput:
    space: FiniteFilteredSpace
    terminal: tuple
    masked_max: tuple
    bound: Fraction = Fraction(0)

    @classmethod
    def from_martingale(cls, M: AdaptedProcess, mask: Sequence | None = None, bound=0) -> "ReconstructionInput":
        """Observation ``(M_T, mask v max M)`` of a known martingale; ``mask <= bound``."""
        overall = running_max(M).terminal
        if mask is None:
            mask = (Fraction(0),) * M.space.m
        bound = Fraction(bound)
        if any(x > bound for x in mask):
            raise ValueError("mask exceeds its declared bound")
        masked = tuple(max(x, y) for x, y in zip(mask, overall))
        return cls(M.space, tuple(M.terminal), masked, bound)


@dataclass
class Reconstruction:
    process: AdaptedProcess
    stages: dict = field(default_factory=dict)
    inf_process: AdaptedProcess | None = None
    report: Report = field(default_factory=Report)

    @property
    def consistent(self) -> bool:
        return self.report.passed


def _crossing_time(V: AdaptedProcess, level) -> tuple:
    T = V.space.T
    return tuple(next((t for t in range(T + 1) if V.grid[t][w] >= level), INF) for w in range(V.space.m))


def reconstruct(data: ReconstructionInput) -> Reconstruction:
    """Rebuild a nonnegative martingale from its terminal value and masked maximum.

    ``V_t`` is the conditional infimum of the masked maximum.  For each
    integer level ``n`` above the mask bound, ``V`` crosses ``n`` exactly
    when the running maximum does, and at that time ``V`` equals the
    running maximum, which equals ``M`` there.  The stopped martingale is
    then ``E[M_{tau_n} | F_t]``; the top level is never crossed, so its
    stage is ``M`` itself.
    """
    space = data.space
    T = space.T
    V = inf_process(data.masked_max, space, REALS)
    top = max(data.masked_max)
    n_lo = math.ceil(data.bound) + 1
    n_max = max(n_lo, math.ceil(top) + 1)
    stages = {}
    seen: dict = {}
    for n in range(n_lo, n_max + 1):
        tau = _crossing_time(V, n)
        stopped_value = tuple(
            data.terminal[w] if tau[w] == INF else V.grid[tau[w]][w] for w in range(space.m)
        )
        key = (tau, stopped_value)
        if key not in seen:
            cond = conditional_means(stopped_value, space)
            # on {tau_n <= t} the stopped process is already frozen
            grid = tuple(
                tuple(stopped_value[w] if tau[w] <= t else cond[t][w] for w in range(space.m))
                for t in range(T + 1)
            )
            seen[key] = AdaptedProcess(space, grid, REALS)
        stages[n] = seen[key]
    M = stages[n_max]
    rep = Report()
    rep.add(_check_terminal(M, data))
    rep.add(_check_mask(M, data))
    rep.add(check_masked_max_identity(running_max(M), V, data.bound))
    return Reconstruction(M, stages, V, rep)


def _check_terminal(M: AdaptedProcess, data: ReconstructionInput) -> CheckResult:
    bad = next((w for w in range(M.space.m) if M.terminal[w] != data.terminal[w]), None)
    return CheckResult("terminal_matches", bad is None, None if bad is None else {"omega": bad})


def _check_mask(M: AdaptedProcess, data: ReconstructionInput) -> CheckResult:
    # the rebuilt maximum must sit below the observation and agree with it above the mask bound
    overall = running_max(M).terminal
    for w in range(M.space.m):
        z = data.masked_max[w]
        if overall[w] > z or (z > data.bound and overall[w] != z):
            return CheckResult("masked_max_consistent", False, {"omega": w, "max": overall[w], "observed": z})
    return CheckResult("masked_max_consistent", True)


def check_masked_max_identity(Mbar: AdaptedProcess, V: AdaptedProcess, bound) -> CheckResult:
    """``V_t == Mbar_t`` wherever ``V_t >= n`` for an integer ``n > bound``."""
    space = Mbar.space
    n_lo = math.floor(bound) + 1
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            w = atom[0]
            v = V.grid[t][w]
            if v >= n_lo and v != Mbar.grid[t][w]:
                return CheckResult("masked_max_identity", False, {"t": t, "atom": atom, "V": v, "running_max": Mbar.grid[t][w]})
    return CheckResult("masked_max_identity", True)


# ---------------------------------------------------------------------------
# exact tree models
# ---------------------------------------------------------------------------


def _random_branch_probs(rng: random.Random, k: int) -> tuple:
    raw = [rng.randint(1, 6) for _ in range(k)]
    total = sum(raw)
    return tuple(Fraction(r, total) for r in raw)


def tree_martingale(seed, depth: int, branching: int = 2, low: int = 0, high: int = 8) -> AdaptedProcess:
    """Martingale on a tree with random node-wise branch probabilities.

    Terminal values are random multiples of 1/2 in ``[low, high]``; earlier
    values are conditional means, so the martingale property is exact.
    """
    rng = random.Random(f"tree:{seed}:{depth}:{branching}")
    node_probs: dict = {}

    def probs(prefix):
        if prefix not in node_probs:
            node_probs[prefix] = _random_branch_probs(rng, branching)
        return node_probs[prefix]

    space = tree_space(depth, probs)
    terminal = tuple(Fraction(rng.randint(2 * low, 2 * high), 2) for _ in range(space.m))
    return AdaptedProcess(space, conditional_means(terminal, space), REALS)


def product_supermartingale(depth: int, factors=(Fraction(3, 2), Fraction(1, 6)), probs=(Fraction(1, 4), Fraction(3, 4)), start=1) -> AdaptedProcess:
    """``M_t = start * prod_{s <= t} xi_s`` for i.i.d. positive factors ``xi``.

    The defaults have mean 1/2, giving a strict supermartingale whose
    running maximum still moves.
    """
    space = tree_space(depth, probs)
    factors = [Fraction(f) for f in factors]
    rows = []
    for t in range(depth + 1):
        rows.append(tuple(Fraction(start) * math.prod((factors[i] for i in o[:t]), start=Fraction(1)) for o in space.outcomes))
    return AdaptedProcess(space, tuple(rows), REALS)


def deterministic_process(space: FiniteFilteredSpace, values: Sequence) -> AdaptedProcess:
    """Process equal to ``values[t]`` on every outcome at time ``t``."""
    return AdaptedProcess(space, tuple((Fraction(v),) * space.m for v in values), REALS)


def lazy_walk_1d(depth: int, p_stay=Fraction(1, 3), start=0) -> AdaptedProcess:
    """Full outcome tree of the lazy walk on the integers.

    Each step stays with probability ``p_stay`` and moves ``±1`` with
    probability ``(1 - p_stay) / 2`` each.  ``p_stay = 0`` gives the forced
    move walk, ``p_stay = 1`` the constant path.
    """
    p_stay = Fraction(p_stay)
    moves = (-1, 0, 1)
    probs = ((1 - p_stay) / 2, p_stay, (1 - p_stay) / 2)
    space = tree_space(depth, probs)
    rows = []
    for t in range(depth + 1):
        rows.append(tuple(Fraction(start + sum(moves[i] for i in o[:t])) for o in space.outcomes))
    return AdaptedProcess(space, tuple(rows))


def lazy_walk_2d(depth: int, p_stay=Fraction(1, 3), start=(0, 0)) -> AdaptedProcess:
    """Lazy nearest-neighbour walk on the integer lattice in the plane (five branches per step)."""
    p_stay = Fraction(p_stay)
    moves = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))
    q = (1 - p_stay) / 4
    probs = (p_stay, q, q, q, q)
    space = tree_space(depth, probs)
    rows = []
    for t in range(depth + 1):
        row = []
        for o in space.outcomes:
            x, y = start
            for i in o[:t]:
                x += moves[i][0]
                y += moves[i][1]
            row.append((Fraction(x), Fraction(y)))
        rows.append(tuple(row))
    return AdaptedProcess(space, tuple(rows))
