"""Seeded property campaigns over random spaces, processes and lattice values.

Every case is a pure function of ``(suite, lattice, master seed, index)``,
so a campaign replays byte for byte.  A failing case is shrunk by rerunning
the same case seed at every smaller size and keeping the smallest size that
still fails.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .conditional import cond_inf, ess_sup, ess_sup_by_phi, inf_process, pointwise_inf
from .convex import PLANE, POLYTOPES, hull
from .lattice import (
    INF,
    NEG_END,
    POS_END,
    REALS,
    DedekindExtension,
    Lattice,
    PowerSet,
    RationalLine,
    RationalPlane,
    Ray,
)
from .martingale import ReconstructionInput, reconstruct, tree_martingale
from .recovery import (
    check_ncr,
    check_recovery_i,
    check_sticky,
    check_sticky_monotone,
    entry_functional,
    piecewise_linear,
    running_max,
    validate_witness_ii,
    validate_witness_iii,
    visit_functional,
)
from .report import CheckResult, Report
from .space import AdaptedProcess, gen_space, tree_space

SUITES = ("lattice_axioms", "pci", "ncr_equiv", "sticky_implications", "reconstruction")
LATTICES = ("extended_real", "power_set", "polytope2", "dedekind")

POWER_GROUND = ("a", "b", "c", "d")
POWER = PowerSet(POWER_GROUND)
DEDEKIND_LINE = DedekindExtension(RationalLine())
DEDEKIND_PLANE = DedekindExtension(RationalPlane())


_BY_NAME = {
    "extended_real": REALS,
    "power_set": POWER,
    "polytope2": POLYTOPES,
    "dedekind": DEDEKIND_LINE,
    "dedekind_plane": DEDEKIND_PLANE,
}


def lattice_by_name(name: str) -> Lattice:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown lattice {name!r}; choose from {', '.join(_BY_NAME)}") from None


# ---------------------------------------------------------------------------
# random lattice values
# ---------------------------------------------------------------------------


def random_value(rng: random.Random, lattice: Lattice):
    if lattice is REALS:
        r = rng.random()
        if r < 0.05:
            return -INF
        if r < 0.1:
            return INF
        return Fraction(rng.randint(-6, 6), rng.choice((1, 2)))
    if isinstance(lattice, PowerSet):
        return frozenset(x for x in lattice.ground if rng.random() < 0.5)
    if lattice is POLYTOPES:
        if rng.random() < 0.03:
            return PLANE
        k = rng.choice((0, 1, 1, 2, 2, 3, 3, 4, 5))
        return hull([(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(k)])
    if isinstance(lattice, DedekindExtension):
        r = rng.random()
        if r < 0.08:
            return NEG_END
        if r < 0.16:
            return POS_END
        if isinstance(lattice.base, RationalPlane):
            return (Fraction(rng.randint(-4, 4), 2), Fraction(rng.randint(-4, 4), 2))
        return Fraction(rng.randint(-8, 8), rng.choice((1, 3)))
    raise ValueError(f"no generator for {lattice!r}")


def random_element(rng: random.Random, lattice: Lattice, m: int) -> tuple:
    return tuple(random_value(rng, lattice) for _ in range(m))


def random_measurable(rng: random.Random, lattice: Lattice, partition) -> tuple:
    out = [None] * sum(len(b) for b in partition)
    for block in partition:
        v = random_value(rng, lattice)
        for w in block:
            out[w] = v
    return tuple(out)


# ---------------------------------------------------------------------------
# case bookkeeping
# ---------------------------------------------------------------------------


@dataclass
class Failure:
    case: int
    seed: str
    size: tuple
    check: str
    detail: dict | None = None

    def to_dict(self) -> dict:
        return {"case": self.case, "seed": self.seed, "size": list(self.size), "check": self.check, "detail": self.detail}


def _case_seed(master, suite: str, lattice: str, i: int) -> str:
    return f"{suite}:{lattice}:{master}:{i}"


# each suite: (default size for a case seed, smaller sizes to try, runner)
# a runner returns (failures as (check, detail) pairs, stats dict)


def _space_sizes(rng: random.Random):
    return (rng.randint(1, 6), rng.randint(0, 3))


def _smaller_space_sizes(size):
    m, T = size
    return sorted(((a, b) for a in range(1, m + 1) for b in range(T + 1) if (a, b) != (m, T)), key=lambda s: (s[0] * (s[1] + 1), s))


# ---------------------------------------------------------------------------
# lattice axioms
# ---------------------------------------------------------------------------


def lattice_axiom_failures(L: Lattice, a, b, c, phi_tol: float = 1e-9) -> list:
    """Every lattice and score law that the triple ``(a, b, c)`` violates."""
    eq, leq, join, meet = L.eq, L.leq, L.join, L.meet
    bad = []

    def need(ok, name):
        if not ok:
            bad.append(name)

    need(leq(a, a), "reflexive")
    need(not (leq(a, b) and leq(b, a)) or eq(a, b), "antisymmetric")
    need(not (leq(a, b) and leq(b, c)) or leq(a, c), "transitive")
    need(eq(join(a, meet(a, b)), a), "absorption_join")
    need(eq(meet(a, join(a, b)), a), "absorption_meet")
    need(eq(join(a, b), join(b, a)), "join_commutative")
    need(eq(meet(a, b), meet(b, a)), "meet_commutative")
    need(eq(join(join(a, b), c), join(a, join(b, c))), "join_associative")
    need(eq(meet(meet(a, b), c), meet(a, meet(b, c))), "meet_associative")
    need(eq(join(a, a), a) and eq(meet(a, a), a), "idempotent")
    need(leq(a, b) == eq(join(a, b), b), "leq_iff_join")
    need(leq(a, b) == eq(meet(a, b), a), "leq_iff_meet")
    need(leq(L.bottom, a) and leq(a, L.top), "bounds")
    need(leq(a, join(a, b)) and leq(meet(a, b), a), "join_meet_bounds")
    for perm in itertools.permutations((a, b, c)):
        need(eq(L.sup(perm), join(join(a, b), c)), "sup_fold")
        need(eq(L.inf(perm), meet(meet(a, b), c)), "inf_fold")
    need(eq(L.sup([]), L.bottom) and eq(L.inf([]), L.top), "empty_sup_inf")
    for x, y in ((a, b), (b, c), (meet(a, b), a), (a, join(a, b))):
        if L.lt(x, y):
            px, py = L.phi(x), L.phi(y)
            if L is POLYTOPES and x.dim == y.dim:
                # same dimension: only the Gaussian mass separates them, and a
                # gap below the quadrature tolerance cannot be resolved
                need(px <= py + phi_tol, "phi_monotone")
            else:
                need(px < py, "phi_strict")
    return bad


def _run_lattice_axioms(lattice_name: str, seed: str, size) -> tuple[list, dict]:
    rng = random.Random(seed)
    L = lattice_by_name(lattice_name)
    fails = []
    for _ in range(size[0]):
        a, b, c = (random_value(rng, L) for _ in range(3))
        for law in lattice_axiom_failures(L, a, b, c):
            fails.append((law, {"a": L.encode(a), "b": L.encode(b), "c": L.encode(c)}))
            break
        if isinstance(L, DedekindExtension):
            fails.extend(_dedekind_failures(L, a, b))
    return fails, {}


def _dedekind_failures(L: DedekindExtension, a, b) -> list:
    out = []
    if not (L.phi(POS_END) == 2.0 and L.phi(NEG_END) == -2.0):
        out.append(("endpoint_scores", None))
    for x in (a, b):
        if x not in (POS_END, NEG_END) and not -1 < L.phi(x) < 1:
            out.append(("arctan_bounds", {"x": L.encode(x)}))
    base = [v for v in (a, b) if v not in (POS_END, NEG_END)]
    if base:
        up = Ray(base[0], 1 if isinstance(L.base, RationalLine) else (1, 0))
        down = Ray(base[0], -1 if isinstance(L.base, RationalLine) else (0, -1))
        if L.sup(base + [up]) is not POS_END:
            out.append(("unbounded_sup", None))
        if L.inf(base + [down]) is not NEG_END:
            out.append(("unbounded_inf", None))
        if len(base) == 2 and L.leq(base[0], base[1]) != L.base.leq(base[0], base[1]):
            out.append(("extends_base_order", None))
    return out


# ---------------------------------------------------------------------------
# conditional infimum calculus
# ---------------------------------------------------------------------------


def pci_failures(L: Lattice, space, X: tuple, Y: tuple, rng: random.Random) -> list:
    """Violations of the monotonicity, tower, chain, inf-commuting and max-linearity rules."""
    le = lambda U, V: all(L.leq(u, v) for u, v in zip(U, V))
    same = lambda U, V: all(L.eq(u, v) for u, v in zip(U, V))
    fails = []
    parts = space.partitions
    T = space.T
    for s in range(T + 1):
        for t in range(s, T + 1):
            P, Q = parts[s], parts[t]
            # (i) finer information gives a larger infimum
            if not le(cond_inf(X, P, L), cond_inf(X, Q, L)):
                fails.append(("refinement", {"coarse": s, "fine": t}))
            # (iii) tower
            if not same(cond_inf(cond_inf(X, Q, L), P, L), cond_inf(X, P, L)):
                fails.append(("tower", {"coarse": s, "fine": t}))
    P = parts[rng.randint(0, T)]
    low = tuple(L.meet(x, y) for x, y in zip(X, Y))
    # (ii) monotone in X
    if not le(cond_inf(low, P, L), cond_inf(X, P, L)):
        fails.append(("monotone", None))
    # (iv) decreasing chain of information
    chain = list(reversed(parts))
    lhs = pointwise_inf([cond_inf(X, Pn, L) for Pn in chain], L)
    if not same(lhs, cond_inf(X, parts[0], L)):
        fails.append(("decreasing_chain", None))
    # (v) commutes with finite infima
    fam = [X, Y, tuple(L.join(x, y) for x, y in zip(X, Y))]
    if not same(cond_inf(pointwise_inf(fam, L), P, L), pointwise_inf([cond_inf(Z, P, L) for Z in fam], L)):
        fails.append(("finite_inf", None))
    # (vi) max-linearity for a P-measurable Z
    Z = random_measurable(rng, L, P)
    lhs = cond_inf(tuple(L.join(x, z) for x, z in zip(X, Z)), P, L)
    rhs = tuple(L.join(c, z) for c, z in zip(cond_inf(X, P, L), Z))
    if not same(lhs, rhs):
        fails.append(("max_linear", {"X": [L.encode(x) for x in X], "Z": [L.encode(z) for z in Z], "partition": [list(b) for b in P]}))
    # essential supremum: pointwise route against the score-climbing route
    if not same(ess_sup(fam, L), ess_sup_by_phi(fam, space.probs, L)):
        fails.append(("ess_sup", None))
    return fails


def _run_pci(lattice_name: str, seed: str, size) -> tuple[list, dict]:
    L = lattice_by_name(lattice_name)
    rng = random.Random(seed)
    space = gen_space(seed, *size)
    X = random_element(rng, L, space.m)
    Y = random_element(rng, L, space.m)
    fails = pci_failures(L, space, X, Y, rng)
    stats = {}
    if not L.is_total:
        # max-linearity is only claimed for total orders
        stats["max_linear_failures"] = sum(1 for f in fails if f[0] == "max_linear")
        fails = [f for f in fails if f[0] != "max_linear"]
    return fails, stats


# ---------------------------------------------------------------------------
# recovery equivalence
# ---------------------------------------------------------------------------


def random_monotone_process(rng: random.Random, L: Lattice, space) -> tuple[AdaptedProcess, str]:
    """A monotone adapted process and the recipe that produced it.

    ``recoverable`` is an inf-process; ``lowered`` drags one atom back to its
    parent's value; ``bottom_start`` drops ``U_0`` to the bottom element;
    ``running_sup`` accumulates random adapted values.
    """
    m, T = space.m, space.T
    kind = rng.choice(("recoverable", "lowered", "bottom_start", "running_sup"))
    if kind == "running_sup":
        rows, cur = [], None
        for t in range(T + 1):
            Z = random_measurable(rng, L, space.atoms(t))
            cur = Z if cur is None else tuple(L.join(c, z) for c, z in zip(cur, Z))
            rows.append(cur)
        return AdaptedProcess(space, tuple(rows), L), kind
    V = inf_process(random_element(rng, L, m), space, L)
    grid = [list(row) for row in V.grid]
    if kind == "lowered" and T >= 1:
        t = rng.randint(1, T)
        atom = rng.choice(space.atoms(t))
        for w in atom:
            grid[t][w] = grid[t - 1][w]
    elif kind == "bottom_start":
        grid[0] = [L.bottom] * m
    return AdaptedProcess(space, tuple(tuple(r) for r in grid), L), kind


def witness_failures(U: AdaptedProcess, verdict) -> list:
    """Re-validate every witness in a recovery verdict."""
    from .space import StoppingTime

    L = U.lattice
    out = []
    w = verdict.recovery_i.witness
    if w is not None:
        V = inf_process(U.terminal, U.space, L)
        t, atom = w["t"], w["atom"]
        if L.eq(U.grid[t][atom[0]], V.grid[t][atom[0]]):
            out.append(("witness_i", w))
    for res, check in ((verdict.no_sure_improvement, validate_witness_ii), (verdict.conditional_improvement, validate_witness_iii)):
        w = res.witness
        if w is not None and not check(U, StoppingTime(U.space, tuple(w["tau"])), w["Y"]):
            out.append((f"witness_{res.name}", {"t": w["t"], "atom": w["atom"]}))
    return out


def _run_ncr(lattice_name: str, seed: str, size) -> tuple[list, dict]:
    L = lattice_by_name(lattice_name)
    rng = random.Random(seed)
    space = gen_space(seed, *size)
    U, kind = random_monotone_process(rng, L, space)
    verdict = check_ncr(U)
    fails = []
    if not verdict.consistent:
        fails.append(("flags_differ", {"flags": verdict.flags, "kind": kind}))
    fails.extend(witness_failures(U, verdict))
    if kind == "recoverable" and not verdict.passed:
        fails.append(("inf_process_not_recoverable", None))
    stats = {"engineered": int(kind != "recoverable"), "failing_verdicts": int(not verdict.passed)}
    if L is REALS:
        agree = check_sticky_monotone(U).passed == verdict.recovery_i.passed
        if not agree:
            fails.append(("sticky_monotone_vs_recovery", None))
    return fails, stats


# ---------------------------------------------------------------------------
# sticky implications
# ---------------------------------------------------------------------------


def random_tree_walk(rng: random.Random, depth: int, sticky: bool) -> AdaptedProcess:
    """Integer walk on a random tree; ``sticky`` forces a zero move at every node."""
    k = rng.randint(2, 3)
    steps: dict = {}
    probs: dict = {}

    def branch_probs(prefix):
        if prefix not in probs:
            raw = [rng.randint(1, 4) for _ in range(k)]
            probs[prefix] = tuple(Fraction(r, sum(raw)) for r in raw)
            moves = [rng.choice((-2, -1, 1, 2)) for _ in range(k)]
            if sticky:
                moves[rng.randrange(k)] = 0
            steps[prefix] = moves
        return probs[prefix]

    space = tree_space(depth, branch_probs)
    rows = []
    for t in range(depth + 1):
        rows.append(tuple(Fraction(sum(steps[o[:s]][o[s]] for s in range(t))) for o in space.outcomes))
    return AdaptedProcess(space, tuple(rows))


def _run_sticky(lattice_name: str, seed: str, size) -> tuple[list, dict]:
    rng = random.Random(seed)
    depth = size[0]
    X = random_tree_walk(rng, depth, sticky=rng.random() < 0.6)
    sticky = check_sticky(X).passed
    knots = sorted(rng.sample(range(-6, 7), 3))
    f = piecewise_linear(knots, [Fraction(rng.randint(-3, 3)) for _ in knots])
    K = set(rng.sample(range(-3, 4), rng.randint(1, 2)))
    inc = [Fraction(rng.randint(0, 2)) for _ in range(depth + 1)]
    rm = check_recovery_i(running_max(X, f)).passed
    ef = check_recovery_i(entry_functional(X, K, inc)).passed
    vf = check_recovery_i(visit_functional(X, K, inc)).passed
    fails = []
    if sticky and not rm:
        fails.append(("sticky_implies_running_max", {"knots": knots}))
    if sticky and not ef:
        fails.append(("sticky_implies_entry_functional", {"K": sorted(K)}))
    # the plain visit count grows while X sits in K, so it is only recorded
    stats = {"sticky": int(sticky), "sticky_visit_count_not_recoverable": int(sticky and not vf)}
    return fails, stats


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------


def _run_reconstruction(lattice_name: str, seed: str, size) -> tuple[list, dict]:
    rng = random.Random(seed)
    depth, branching = size
    M = tree_martingale(seed, depth, branching)
    fails = []
    masks = [(None, 0)]
    for _ in range(3):
        c = Fraction(rng.randint(0, 8), 2)
        masks.append((tuple(Fraction(rng.randint(0, int(2 * c)), 2) for _ in range(M.space.m)), c))
    for mask, c in masks:
        rec = reconstruct(ReconstructionInput.from_martingale(M, mask, c))
        if rec.process.grid != M.grid:
            fails.append(("reconstruction_mismatch", {"bound": str(c)}))
        if not rec.report.passed:
            fails.append(("reconstruction_report", {"bound": str(c), "failed": [x.name for x in rec.report.failures]}))
    return fails, {}


# ---------------------------------------------------------------------------
# campaigns
# ---------------------------------------------------------------------------


def _default_size(suite: str, seed: str):
    rng = random.Random(f"size:{seed}")
    if suite == "lattice_axioms":
        return (1,)
    if suite in ("pci", "ncr_equiv"):
        return _space_sizes(rng)
    if suite == "sticky_implications":
        return (rng.randint(1, 4),)
    if suite == "reconstruction":
        return (rng.randint(1, 5), rng.choice((2, 2, 3)))
    raise ValueError(suite)


def _smaller(suite: str, size):
    if suite in ("pci", "ncr_equiv"):
        return _smaller_space_sizes(size)
    if suite == "reconstruction":
        d, b = size
        return sorted(((x, y) for x in range(1, d + 1) for y in range(2, b + 1) if (x, y) != size), key=lambda s: (s[1] ** s[0], s))
    if suite == "sticky_implications":
        return [(d,) for d in range(1, size[0])]
    return []


RUNNERS: dict[str, Callable] = {
    "lattice_axioms": _run_lattice_axioms,
    "pci": _run_pci,
    "ncr_equiv": _run_ncr,
    "sticky_implications": _run_sticky,
    "reconstruction": _run_reconstruction,
}


def shrink(suite: str, lattice: str, seed: str, size, check: str):
    """Smallest size at which the case seed still fails ``check``."""
    runner = RUNNERS[suite]
    for smaller in _smaller(suite, size):
        fails, _ = runner(lattice, seed, smaller)
        if any(name == check for name, _ in fails):
            return smaller
    return size


def fuzz(suite: str, seed=0, cases: int = 100, lattice: str = "extended_real") -> Report:
    """Run ``cases`` seeded cases of ``suite``; failures are shrunk before reporting."""
    if suite not in RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    lattice_by_name(lattice)
    runner = RUNNERS[suite]
    failures: list[Failure] = []
    totals: dict = {}
    for i in range(cases):
        cs = _case_seed(seed, suite, lattice, i)
        size = _default_size(suite, cs)
        fails, stats = runner(lattice, cs, size)
        for k, v in stats.items():
            totals[k] = totals.get(k, 0) + v
        for name, detail in fails:
            small = shrink(suite, lattice, cs, size, name)
            if small != size:
                detail = next((d for n, d in runner(lattice, cs, small)[0] if n == name), detail)
            failures.append(Failure(i, cs, tuple(small), name, detail))
    rep = Report()
    rep.add(
        CheckResult(
            suite,
            not failures,
            None if not failures else {"failures": [f.to_dict() for f in failures[:20]]},
        )
    )
    rep.summary = {
        "suite": suite,
        "lattice": lattice,
        "seed": seed,
        "cases": cases,
        "failures": len(failures),
        "first_failing_seed": failures[0].seed if failures else None,
        "stats": dict(sorted(totals.items())),
    }
    return rep
