"""Which monotone processes are recovered by the conditional infimum of their endpoint?

Walks through a recoverable example, a sure-growth example with its
witnesses, and the occupation functionals of a lazy walk.
"""

from fractions import Fraction

from condinf import (
    AdaptedProcess,
    REALS,
    check_ncr,
    check_recovery_i,
    check_sticky,
    inf_process,
    integral_functional,
    lazy_walk_1d,
    running_max,
    tree_martingale,
    visit_functional,
)
from condinf.space import tree_space


def show(title, verdict):
    print(f"{title}: {'recoverable' if verdict.passed else 'not recoverable'}  flags={verdict.flags}")
    for check in verdict.checks():
        if check.witness:
            print(f"    {check.name}: {check.to_dict()['witness']}")


M = tree_martingale(3, 3)
Mbar = running_max(M)
V = inf_process(Mbar.terminal, M.space)
print("running max of a binary tree martingale, depth 3")
for t in range(M.space.T + 1):
    print(f"  t={t}  max so far {[str(v) for v in Mbar.grid[t]]}")
    print(f"       inf process {[str(v) for v in V.grid[t]]}")
show("running max", check_ncr(Mbar))

S = tree_space(2, (Fraction(1, 2), Fraction(1, 2)))
growth = AdaptedProcess(S, tuple((Fraction(t),) * S.m for t in range(3)), REALS)
print()
show("U_t = t", check_ncr(growth))

X = lazy_walk_1d(6)
print()
print(f"lazy walk, depth 6, {X.space.m} outcomes, sticky: {check_sticky(X).passed}")
for name, U in [
    ("running max", running_max(X)),
    ("time spent at 0", visit_functional(X, [0])),
    ("time spent in {0, 1}", visit_functional(X, [0, 1])),
    ("time spent in {-1, 0, 1}", visit_functional(X, [-1, 0, 1])),
    ("integral of min(x^2, 1)", integral_functional(X, lambda x: min(Fraction(x) ** 2, 1))),
]:
    res = check_recovery_i(U)
    extra = "" if res.passed else f"  (t={res.witness['t']}, U_t={res.witness['U_t']}, inf={res.witness['cond_inf']})"
    print(f"  {name:26s} {'recoverable' if res.passed else 'not recoverable'}{extra}")

forced = check_sticky(lazy_walk_1d(4, p_stay=0))
print(f"forced-move walk sticky: {forced.passed}  at t={forced.witness['t']} with epsilon={forced.witness['epsilon']}")
