"""Acceptance criteria 1 to 10, one pass/fail line each in the terminal summary.

Run with ``pytest tests/test_acceptance.py -v``.  Criterion 8 simulates a
million paths and takes one to two minutes on a single core.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

from condinf import (
    POLYTOPES,
    REALS,
    AdaptedProcess,
    FiniteFilteredSpace,
    check_recovery_i,
    check_sticky,
    check_sticky_monotone,
    cond_inf,
    convex_hull_process,
    gen_space,
    integral_functional,
    is_supermartingale,
    lazy_walk_1d,
    lazy_walk_2d,
    running_max,
    tree_martingale,
    visit_functional,
    visited_sites_process,
)
from condinf.convex import contains_point, gaussian_mass, hull, point
from condinf.fuzz import (
    DEDEKIND_LINE,
    DEDEKIND_PLANE,
    NEG_END,
    POS_END,
    fuzz,
    lattice_axiom_failures,
    random_monotone_process,
    random_value,
)
from condinf.lattice import Ray
from condinf.martingale import (
    ReconstructionInput,
    check_masked_max_identity,
    reconstruct,
    verify_running_max_recovery,
)
from condinf.montecarlo import ely_estimate, ny_check, ny_rhs, simulate_exp_martingale
from condinf.recovery import euclidean_metric
from condinf.space import all_filtrations

import oracles

F = Fraction
INF = math.inf


# ---------------------------------------------------------------------------
# 1. definitional oracle
# ---------------------------------------------------------------------------


def test_criterion_1_definitional_oracle(criterion):
    grid = (-INF, F(1, 2), INF)
    start = time.perf_counter()
    brute: dict = {}
    mismatches = []
    checked = 0
    for m in range(1, 5):
        for T in range(3):
            for chain in all_filtrations(m, T):
                space = FiniteFilteredSpace((F(1, m),) * m, chain)
                for X in itertools.product(grid, repeat=m):
                    for t in range(T + 1):
                        P = space.atoms(t)
                        key = (X, P)
                        if key not in brute:
                            brute[key] = oracles.brute_cond_inf(X, P, grid)
                        checked += 1
                        if cond_inf(X, P) != brute[key]:
                            mismatches.append(key)
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    criterion(1, ok, f"{checked} comparisons, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert not mismatches
    assert elapsed < 10


# ---------------------------------------------------------------------------
# 2. conditional infimum calculus
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("lattice", ["extended_real", "power_set", "polytope2"])
def test_criterion_2_calculus(lattice, criterion):
    start = time.perf_counter()
    rep = fuzz("pci", seed=0, cases=1000, lattice=lattice)
    elapsed = time.perf_counter() - start
    note = ""
    if lattice != "extended_real":
        note = f", join rule broke in {rep.summary['stats']['max_linear_failures']} cases (recorded, not asserted)"
    criterion(2, rep.passed and elapsed < 60, f"{lattice}: {rep.summary['failures']} failures in 1000{note}, {elapsed:.1f}s")
    assert rep.passed, rep.checks[0].witness
    assert elapsed < 60


def test_criterion_2_join_rule_counterexample(criterion):
    # the join rule needs a total order; two points and a third one to their right break it
    X = (point(0, 0), point(1, 0))
    Z = (point(2, 0), point(2, 0))
    P = ((0, 1),)
    lhs = cond_inf(tuple(POLYTOPES.join(x, z) for x, z in zip(X, Z)), P, POLYTOPES)
    rhs = tuple(POLYTOPES.join(c, z) for c, z in zip(cond_inf(X, P, POLYTOPES), Z))
    criterion(2, lhs != rhs, "polytope counterexample to the join rule recorded")
    assert lhs != rhs


# ---------------------------------------------------------------------------
# 3. equivalence of the three recovery conditions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("lattice", ["extended_real", "power_set", "polytope2"])
def test_criterion_3_equivalence(lattice, criterion):
    start = time.perf_counter()
    rep = fuzz("ncr_equiv", seed=0, cases=1000, lattice=lattice)
    elapsed = time.perf_counter() - start
    stats = rep.summary["stats"]
    ok = rep.passed and stats["failing_verdicts"] >= 200 and elapsed < 120
    criterion(3, ok, f"{lattice}: {stats['failing_verdicts']} failing verdicts, {rep.summary['failures']} disagreements, {elapsed:.1f}s")
    assert rep.passed, rep.checks[0].witness
    assert stats["failing_verdicts"] >= 200
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 4. monotone stickiness against condition (i)
# ---------------------------------------------------------------------------


def real_corpus():
    """Every real-valued monotone process used by the other criteria."""
    for i in range(1000):
        rng = random.Random(f"corpus:{i}")
        space = gen_space(f"corpus:{i}", rng.randint(1, 6), rng.randint(0, 3))
        yield random_monotone_process(rng, REALS, space)[0]
    for i in range(200):
        yield running_max(tree_martingale(i, 1 + i % 6))
    X = lazy_walk_1d(6)
    yield running_max(X)
    yield visit_functional(X, [0])
    yield visit_functional(X, [0, 1])
    yield visit_functional(X, [-1, 0, 1])
    yield integral_functional(X, lambda x: min(F(x) ** 2, 1))


def test_criterion_4_sticky_monotone(criterion):
    n = 0
    disagreements = []
    failing = 0
    for U in real_corpus():
        a, b = check_sticky_monotone(U).passed, check_recovery_i(U).passed
        failing += not b
        if a != b:
            disagreements.append(n)
        n += 1
    criterion(4, not disagreements, f"{n} processes, {failing} not recoverable, {len(disagreements)} disagreements")
    assert not disagreements


# ---------------------------------------------------------------------------
# 5. running maxima of supermartingales
# ---------------------------------------------------------------------------


def damped(M):
    """Nonnegative martingale times a decreasing positive sequence: a supermartingale."""
    T = M.space.T
    grid = tuple(tuple(v * F(2 * T + 1 - t, 2 * T + 1) for v in row) for t, row in enumerate(M.grid))
    return AdaptedProcess(M.space, grid, REALS)


def test_criterion_5_running_max(criterion):
    bad = []
    for i in range(500):
        depth = 1 + i % 8
        branching = 2 if depth > 5 else 2 + i % 2
        M = tree_martingale(i, depth, branching)
        if i % 3 == 2:
            M = damped(M)
            assert is_supermartingale(M)
        rep = verify_running_max_recovery(M, reweightings=10, seed=i)
        if not rep.passed:
            bad.append((i, [c.name for c in rep.failures]))
    S = tree_martingale(0, 3).space
    control = AdaptedProcess(S, tuple((F(t),) * S.m for t in range(S.T + 1)), REALS)
    res = check_recovery_i(running_max(control))
    control_ok = not res.passed and res.witness == {"t": 0, "atom": tuple(range(S.m)), "U_t": 0, "cond_inf": 3}
    criterion(5, not bad and control_ok, f"500 processes x 10 reweightings, {len(bad)} failures; growth control fails at t=0 as expected")
    assert not bad, bad[:5]
    assert control_ok, res.witness


# ---------------------------------------------------------------------------
# 6. reconstruction from the terminal value and a masked maximum
# ---------------------------------------------------------------------------


def test_criterion_6_reconstruction(criterion):
    bad = []
    runs = 0
    for i in range(500):
        rng = random.Random(f"rec:{i}")
        M = tree_martingale(i, rng.randint(1, 5), 2) if i % 2 else tree_martingale(i, rng.randint(1, 3), 3)
        Mbar = running_max(M)
        for k in range(21):
            if k == 0:
                mask, c = None, 0
            else:
                c = rng.randint(0, 4)
                mask = tuple(F(rng.randint(0, 2 * c), 2) for _ in range(M.space.m))
            R = reconstruct(ReconstructionInput.from_martingale(M, mask, c))
            runs += 1
            same = R.process.grid == M.grid
            interior = check_masked_max_identity(Mbar, R.inf_process, c).passed
            if not (same and interior and R.consistent):
                bad.append((i, k))
    criterion(6, not bad, f"{runs} reconstructions, {len(bad)} mismatches")
    assert not bad, bad[:5]


# ---------------------------------------------------------------------------
# 7. functionals of lazy walks
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def walk():
    return lazy_walk_1d(8)


FUNCTIONALS = {
    "running_max": lambda X: running_max(X),
    "visit_functional K={0}": lambda X: visit_functional(X, [0]),
    "visit_functional K={0,1}": lambda X: visit_functional(X, [0, 1]),
    "integral_functional x^2 min 1": lambda X: integral_functional(X, lambda x: min(F(x) ** 2, 1)),
    "visited_sites_process": lambda X: visited_sites_process(X),
}


@pytest.mark.parametrize("name", list(FUNCTIONALS))
def test_criterion_7_functionals(name, walk, criterion):
    res = check_recovery_i(FUNCTIONALS[name](walk))
    detail = f"{name}: " + ("pass" if res.passed else f"fails, witness t={res.witness['t']} U_t={res.witness['U_t']} cond_inf={res.witness['cond_inf']}")
    ok = criterion(7, res.passed, detail)
    assert ok, detail


def test_criterion_7_convex_hull(criterion):
    X = lazy_walk_2d(4)
    res = check_recovery_i(convex_hull_process(X))
    criterion(7, res.passed, "convex_hull_process (planar walk, depth 4): " + ("pass" if res.passed else "fails"))
    assert res.passed, res.witness


def test_criterion_7_forced_move_not_sticky(criterion):
    X = lazy_walk_1d(8, p_stay=0)
    res = check_sticky(X)
    ok = not res.passed and res.witness is not None
    if ok:
        # every path through the witness atom leaves the epsilon ball
        t, eps = res.witness["t"], res.witness["epsilon"]
        ok = all(max(abs(X.grid[s][w] - X.grid[t][w]) for s in range(t, X.space.T + 1)) > eps for w in res.witness["atom"])
    criterion(7, ok, "forced-move walk is not sticky" + (f" (t={res.witness['t']}, eps={res.witness['epsilon']})" if ok else ""))
    assert ok


def test_criterion_7_lazy_walks_are_sticky(walk):
    assert check_sticky(walk).passed
    assert check_sticky(lazy_walk_2d(4), euclidean_metric).passed


# ---------------------------------------------------------------------------
# 8. Monte Carlo identities
# ---------------------------------------------------------------------------


def test_criterion_8_monte_carlo(criterion):
    start = time.perf_counter()
    ens = simulate_exp_martingale(20240501, 10**6, checkpoints=(0,), ceiling=8)
    tol = {2: 0.02, 4: 0.02, 8: 0.03}
    parts = []
    ok = True
    for n, eps in tol.items():
        e = ely_estimate(ens, n)
        good = abs(e.value - 1.0) <= eps
        ok &= good
        parts.append(f"ely n={n}: {e.value:.4f} (se {e.stderr:.4f})")
    oracle = ny_rhs("indicator:2", 1.0, 1.0)
    (row,) = ny_check(ens, "indicator:2", checkpoints=[0])["bins"]
    ny_ok = abs(oracle - 0.5) < 1e-12 and abs(row["estimate"] - oracle) <= 0.01
    elapsed = time.perf_counter() - start
    parts.append(f"ny 1[2,inf) at t=0: {row['estimate']:.4f} vs {oracle:.4f}")
    ok = ok and ny_ok and elapsed < 300
    criterion(8, ok, ", ".join(parts) + f", {elapsed:.0f}s")
    assert ok


# ---------------------------------------------------------------------------
# 9. convex-set lattice kernel
# ---------------------------------------------------------------------------


def test_criterion_9_axioms(criterion):
    rng = random.Random("polytopes")
    polys = [random_value(rng, POLYTOPES) for _ in range(10**4)]
    n = len(polys)
    bad = [i for i in range(n) if lattice_axiom_failures(POLYTOPES, polys[i], polys[(i + 1) % n], polys[(i + 7) % n])]
    criterion(9, not bad, f"axioms on {n} polytopes, {len(bad)} violations")
    assert not bad


def test_criterion_9_lattice_point_oracle(criterion):
    rng = random.Random("points")
    pts = [(x, y) for x in range(-3, 4) for y in range(-3, 4)]
    bad = 0
    pairs = 300
    for _ in range(pairs):
        A = hull(rng.sample(pts, rng.randint(1, 5)))
        B = hull(rng.sample(pts, rng.randint(1, 5)))
        M, J = POLYTOPES.meet(A, B), POLYTOPES.join(A, B)
        for p in pts:
            in_a, in_b = oracles.in_convex_hull(A.vertices, p), oracles.in_convex_hull(B.vertices, p)
            bad += contains_point(M, p) != (in_a and in_b)
            bad += contains_point(J, p) != oracles.in_convex_hull(A.vertices + B.vertices, p)
    criterion(9, bad == 0, f"meet/join vs membership oracle on {pairs} pairs over {{-3..3}}^2, {bad} disagreements")
    assert bad == 0


# the dblquad oracle may hit its subdivision limit on thin polygons; its error is still measured below
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_criterion_9_phi_strict(criterion):
    rng = random.Random("phi")
    checked = violations = 0
    quad_err = 0.0
    for _ in range(2000):
        A = random_value(rng, POLYTOPES)
        B = POLYTOPES.join(A, random_value(rng, POLYTOPES))
        if not POLYTOPES.lt(A, B):
            continue
        if A.plane or B.plane or A.dim != B.dim:
            # a dimension jump moves phi by at least one minus the mass
            checked += 1
            violations += not POLYTOPES.phi(A) < POLYTOPES.phi(B)
            continue
        if A.dim == 2:
            ma, mb = oracles.polygon_mass_dblquad(A.vertices), oracles.polygon_mass_dblquad(B.vertices)
            quad_err = max(quad_err, abs(gaussian_mass(A) - ma), abs(gaussian_mass(B) - mb))
            if mb - ma >= 1e-4:
                checked += 1
                violations += not POLYTOPES.phi(A) < POLYTOPES.phi(B)
    ok = violations == 0 and quad_err <= 1e-9 and checked >= 100
    criterion(9, ok, f"phi strict on {checked} resolvable pairs, max quadrature error {quad_err:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 10. Dedekind extension
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name, L", [("line", DEDEKIND_LINE), ("plane", DEDEKIND_PLANE)])
def test_criterion_10_dedekind(name, L, criterion):
    rep = fuzz("lattice_axioms", seed=0, cases=3000, lattice="dedekind" if name == "line" else "dedekind_plane")
    ends = L.phi(POS_END) == 2.0 and L.phi(NEG_END) == -2.0
    rng = random.Random(f"dedekind:{name}")
    inner = [random_value(rng, L) for _ in range(2000)]
    bounded = all(-1 < L.phi(x) < 1 for x in inner if x not in (POS_END, NEG_END))
    base = next(x for x in inner if x not in (POS_END, NEG_END))
    up, down = (1, -1) if name == "line" else ((1, 0), (0, -1))
    unbounded = L.sup([base, Ray(base, up)]) is POS_END and L.inf([base, Ray(base, down)]) is NEG_END
    ok = rep.passed and ends and bounded and unbounded
    criterion(10, ok, f"{name}: 3000 axiom cases, phi(+-inf)=+-2, arctan bounds on 2000 values")
    assert ok, rep.checks[0].witness
