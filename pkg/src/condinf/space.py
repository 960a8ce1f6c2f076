"""Finite filtered probability spaces, adapted processes and stopping times.

A filtration on finitely many outcomes is a refining sequence of
partitions ``partitions[0], ..., partitions[T]``.  Every outcome has
strictly positive probability, so "almost surely" means "everywhere" and
all measurability questions reduce to being constant on atoms.

Random elements are plain tuples indexed by outcome; processes store a
grid indexed ``[t][outcome]``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from .lattice import INF, Lattice
from .report import CheckResult, Report

Partition = tuple  # tuple of sorted tuples of outcome indices


def canonical_partition(blocks) -> Partition:
    return tuple(sorted(tuple(sorted(b)) for b in blocks if len(b)))


def partition_from_labels(labels: Sequence) -> Partition:
    groups: dict = {}
    for w, lab in enumerate(labels):
        groups.setdefault(lab, []).append(w)
    return canonical_partition(groups.values())


def refines(fine: Partition, coarse: Partition) -> bool:
    """Whether every block of ``fine`` lies inside a block of ``coarse``."""
    owner = {w: i for i, block in enumerate(coarse) for w in block}
    return all(len({owner.get(w) for w in block}) == 1 and owner.get(block[0]) is not None for block in fine)


def is_measurable(values: Sequence, partition: Partition, eq=None) -> bool:
    eq = eq or (lambda a, b: a == b)
    return all(eq(values[w], values[block[0]]) for block in partition for w in block)


@dataclass(frozen=True, eq=False)
class FiniteFilteredSpace:
    probs: tuple
    partitions: tuple
    outcomes: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(Fraction(p) for p in self.probs))
        object.__setattr__(self, "partitions", tuple(canonical_partition(p) for p in self.partitions))
        if self.outcomes is None:
            object.__setattr__(self, "outcomes", tuple(range(len(self.probs))))
        else:
            object.__setattr__(self, "outcomes", tuple(self.outcomes))

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def T(self) -> int:
        return len(self.partitions) - 1

    @cached_property
    def _owner(self) -> list[dict]:
        return [{w: block for block in part for w in block} for part in self.partitions]

    def atoms(self, t: int) -> Partition:
        return self.partitions[t]

    def atom_of(self, t: int, omega: int) -> tuple:
        if not 0 <= t <= self.T:
            raise IndexError(f"time {t} outside 0..{self.T}")
        return self._owner[t][omega]

    def prob(self, event) -> Fraction:
        return sum((self.probs[w] for w in event), Fraction(0))

    def with_probs(self, probs) -> "FiniteFilteredSpace":
        """Same outcomes and filtration under another (equivalent) measure."""
        return FiniteFilteredSpace(probs, self.partitions, self.outcomes)

    def describe(self) -> dict:
        return {
            "outcomes": [str(o) for o in self.outcomes],
            "probs": [str(p) for p in self.probs],
            "partitions": [[list(b) for b in part] for part in self.partitions],
        }


@dataclass(frozen=True, eq=False)
class AdaptedProcess:
    """A process ``value(omega, t)`` on a finite filtered space.

    ``lattice`` is ``None`` for state processes (walk positions, points)
    that are only ever compared through a metric.
    """

    space: FiniteFilteredSpace
    grid: tuple
    lattice: Lattice | None = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(tuple(row) for row in self.grid))

    @classmethod
    def from_paths(cls, space, paths, lattice=None) -> "AdaptedProcess":
        paths = list(paths)
        return cls(space, tuple(zip(*paths)) if paths else (), lattice)

    def at(self, t: int) -> tuple:
        return self.grid[t]

    def value(self, omega: int, t: int):
        return self.grid[t][omega]

    def path(self, omega: int) -> tuple:
        return tuple(row[omega] for row in self.grid)

    @property
    def terminal(self) -> tuple:
        return self.grid[-1]

    def map(self, fn: Callable, lattice=None) -> "AdaptedProcess":
        return AdaptedProcess(self.space, tuple(tuple(fn(v) for v in row) for row in self.grid), lattice)


@dataclass(frozen=True, eq=False)
class StoppingTime:
    """``tau[omega]`` in ``0..T`` or ``math.inf``."""

    space: FiniteFilteredSpace
    tau: tuple

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(INF if t == INF else int(t) for t in self.tau))

    @property
    def finite(self) -> tuple:
        return tuple(w for w, t in enumerate(self.tau) if t != INF)

    @classmethod
    def constant(cls, space, t) -> "StoppingTime":
        return cls(space, (t,) * space.m)


def f_tau_atoms(tau: StoppingTime) -> Partition:
    """Atoms of the sigma-algebra of events known at ``tau``.

    On ``{tau = t}`` these are the time-``t`` atoms, on ``{tau = inf}`` the
    time-``T`` atoms.
    """
    space = tau.space
    blocks = []
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            if all(tau.tau[w] == t for w in atom):
                blocks.append(atom)
    for atom in space.atoms(space.T):
        if all(tau.tau[w] == INF for w in atom):
            blocks.append(atom)
    return canonical_partition(blocks)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate_space(space: FiniteFilteredSpace) -> Report:
    rep = Report()
    m = space.m
    if space.T < 0:
        rep.add(CheckResult("horizon", False, {"reason": "no partitions"}))
        return rep
    bad = [w for w, p in enumerate(space.probs) if p <= 0]
    rep.add(CheckResult("positive_probs", not bad, {"outcomes": bad} if bad else None))
    total = sum(space.probs)
    rep.add(CheckResult("probs_sum_to_one", total == 1, None if total == 1 else {"sum": total}))
    for t, part in enumerate(space.partitions):
        seen = [w for block in part for w in block]
        ok = sorted(seen) == list(range(m))
        wit = None
        if not ok:
            dup = sorted({w for w in seen if seen.count(w) > 1})
            missing = sorted(set(range(m)) - set(seen))
            wit = {"t": t, "duplicated": dup, "missing": missing}
        rep.add(CheckResult(f"partition[{t}]", ok, wit))
    for t in range(space.T):
        fine, coarse = space.partitions[t + 1], space.partitions[t]
        owner = {w: i for i, block in enumerate(coarse) for w in block}
        offender = next((b for b in fine if len({owner.get(w) for w in b}) != 1), None)
        rep.add(
            CheckResult(
                f"refines[{t + 1}->{t}]",
                offender is None,
                None if offender is None else {"t": t + 1, "atom": offender},
            )
        )
    return rep


def validate_process(U: AdaptedProcess, monotone: bool = False) -> Report:
    space = U.space
    rep = Report()
    shape_ok = len(U.grid) == space.T + 1 and all(len(row) == space.m for row in U.grid)
    rep.add(CheckResult("shape", shape_ok, None if shape_ok else {"expected": [space.T + 1, space.m]}))
    if not shape_ok:
        return rep
    eq = U.lattice.eq if U.lattice is not None else (lambda a, b: a == b)
    wit = None
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            v0 = U.grid[t][atom[0]]
            bad = next((w for w in atom if not eq(U.grid[t][w], v0)), None)
            if bad is not None:
                wit = {"t": t, "atom": atom, "omega": bad}
                break
        if wit:
            break
    rep.add(CheckResult("adapted", wit is None, wit))
    if monotone:
        if U.lattice is None:
            raise ValueError("monotonicity needs a lattice")
        wit = None
        for t in range(space.T):
            bad = next((w for w in range(space.m) if not U.lattice.leq(U.grid[t][w], U.grid[t + 1][w])), None)
            if bad is not None:
                wit = {"t": t, "omega": bad, "before": U.grid[t][bad], "after": U.grid[t + 1][bad]}
                break
        rep.add(CheckResult("nondecreasing", wit is None, wit))
    return rep


def validate_stopping_time(tau: StoppingTime) -> Report:
    space = tau.space
    rep = Report()
    ok_range = len(tau.tau) == space.m and all(t == INF or 0 <= t <= space.T for t in tau.tau)
    rep.add(CheckResult("range", ok_range, None if ok_range else {"tau": list(tau.tau)}))
    if not ok_range:
        return rep
    wit = None
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            hits = [tau.tau[w] == t for w in atom]
            if any(hits) and not all(hits):
                wit = {"t": t, "atom": atom}
                break
        if wit:
            break
    if wit is None:
        for atom in space.atoms(space.T):
            hits = [tau.tau[w] == INF for w in atom]
            if any(hits) and not all(hits):
                wit = {"t": "inf", "atom": atom}
                break
    rep.add(CheckResult("measurable", wit is None, wit))
    return rep


def validate(obj, **kwargs) -> Report:
    """Check the structural invariants of a space, process or stopping time."""
    if isinstance(obj, FiniteFilteredSpace):
        return validate_space(obj)
    if isinstance(obj, AdaptedProcess):
        return validate_process(obj, **kwargs)
    if isinstance(obj, StoppingTime):
        return validate_stopping_time(obj)
    raise TypeError(f"nothing to validate on {type(obj).__name__}")


# ---------------------------------------------------------------------------
# conditional expectation
# ---------------------------------------------------------------------------


def cond_expectation(X: Sequence, partition: Partition, probs: Sequence) -> tuple:
    """Per-atom probability-weighted mean of a real random variable."""
    out = [None] * len(X)
    for atom in partition:
        mass = sum(probs[w] for w in atom)
        mean = sum(probs[w] * X[w] for w in atom) / mass
        for w in atom:
            out[w] = mean
    return tuple(out)


def conditional_means(X: Sequence, space: "FiniteFilteredSpace") -> tuple:
    """``E[X | F_t]`` for every ``t``, built backwards through the tower rule."""
    T = space.T
    probs = space.probs
    rows = [None] * (T + 1)
    rows[T] = cond_expectation(X, space.atoms(T), probs)
    # mass and mean per atom, keyed by the atom's first outcome
    mass = {}
    mean = {}
    for atom in space.atoms(T):
        mass[atom[0]] = sum(probs[w] for w in atom)
        mean[atom[0]] = rows[T][atom[0]]
    for t in range(T - 1, -1, -1):
        out = [None] * len(X)
        new_mass, new_mean = {}, {}
        for atom in space.atoms(t):
            kids = {space.atom_of(t + 1, w)[0] for w in atom}
            total = sum(mass[k] for k in kids)
            value = sum(mass[k] * mean[k] for k in kids) / total
            new_mass[atom[0]], new_mean[atom[0]] = total, value
            for w in atom:
                out[w] = value
        rows[t] = tuple(out)
        mass, mean = new_mass, new_mean
    return tuple(rows)


# ---------------------------------------------------------------------------
# seeded generators
# ---------------------------------------------------------------------------


def _random_probs(rng: random.Random, m: int) -> tuple:
    raw = [rng.randint(1, 9) for _ in range(m)]
    total = sum(raw)
    return tuple(Fraction(r, total) for r in raw)


def _split(rng: random.Random, block: tuple, max_parts: int = 3) -> list:
    if len(block) == 1:
        return [block]
    k = rng.randint(1, min(max_parts, len(block)))
    labels = [rng.randrange(k) for _ in block]
    parts: dict = {}
    for w, lab in zip(block, labels):
        parts.setdefault(lab, []).append(w)
    return list(parts.values())


def gen_space(seed, m: int, T: int) -> FiniteFilteredSpace:
    """Random space with ``m`` outcomes and horizon ``T``, deterministic in ``seed``."""
    if m < 1 or T < 0:
        raise ValueError("need m >= 1 and T >= 0")
    rng = random.Random(f"space:{seed}:{m}:{T}")
    first = [tuple(range(m))]
    if rng.random() < 0.2:
        first = _split(rng, tuple(range(m)), 2)
    parts = [canonical_partition(first)]
    for _ in range(T):
        nxt = []
        for block in parts[-1]:
            nxt.extend(_split(rng, block))
        parts.append(canonical_partition(nxt))
    return FiniteFilteredSpace(_random_probs(rng, m), tuple(parts))


def gen_stopping_time(seed, space: FiniteFilteredSpace, stop_prob: float = 0.35) -> StoppingTime:
    rng = random.Random(f"tau:{seed}")
    tau = [INF] * space.m
    for t in range(space.T + 1):
        for atom in space.atoms(t):
            if tau[atom[0]] == INF and rng.random() < stop_prob:
                for w in atom:
                    tau[w] = t
    return StoppingTime(space, tuple(tau))


def gen_martingale(seed, space: FiniteFilteredSpace, low: int = 0, high: int = 10, terminal=None) -> AdaptedProcess:
    """Martingale obtained by conditioning random rational terminal values.

    Pass ``terminal`` to fix the terminal values instead of drawing them.
    """
    from .lattice import REALS

    if terminal is None:
        rng = random.Random(f"mart:{seed}")
        terminal = tuple(Fraction(rng.randint(low * 4, high * 4), 4) for _ in range(space.m))
    terminal = tuple(Fraction(x) for x in terminal)
    grid = [cond_expectation(terminal, space.atoms(t), space.probs) for t in range(space.T)]
    grid.append(terminal)
    return AdaptedProcess(space, tuple(grid), REALS)


def tree_space(depth: int, branch_probs) -> FiniteFilteredSpace:
    """Full branching tree; outcomes are tuples of branch indices.

    ``branch_probs`` is either a fixed sequence of positive probabilities or
    a callable ``prefix -> sequence`` giving node-dependent probabilities.
    Branches with zero probability are pruned.
    """
    fn = branch_probs if callable(branch_probs) else (lambda prefix: branch_probs)
    leaves = [((), Fraction(1))]
    for _ in range(depth):
        nxt = []
        for prefix, p in leaves:
            for i, q in enumerate(fn(prefix)):
                q = Fraction(q)
                if q > 0:
                    nxt.append((prefix + (i,), p * q))
        leaves = nxt
    outcomes = tuple(prefix for prefix, _ in leaves)
    probs = tuple(p for _, p in leaves)
    parts = tuple(partition_from_labels([o[:t] for o in outcomes]) for t in range(depth + 1))
    return FiniteFilteredSpace(probs, parts, outcomes)


def all_partitions(items: Sequence):
    """Every set partition of ``items`` (Bell-number many)."""
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for smaller in all_partitions(rest):
        smaller = [list(b) for b in smaller]
        for i in range(len(smaller)):
            yield canonical_partition(smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:])
        yield canonical_partition([[first]] + smaller)


def all_filtrations(m: int, T: int):
    """Every refining chain of ``T + 1`` partitions of ``range(m)``."""
    parts = list(dict.fromkeys(all_partitions(range(m))))
    for chain in itertools.product(parts, repeat=T + 1):
        if all(refines(chain[t + 1], chain[t]) for t in range(T)):
            yield chain
