"""Level crossings and the conditional law of the maximum for exp(W - t/2).

Usage: python demos/monte_carlo.py [paths]
"""

import sys

from condinf.montecarlo import ely_estimate, ely_lattice_exact, ny_check, simulate_exp_martingale

paths = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
ens = simulate_exp_martingale(7, paths, checkpoints=(0, 200), ceiling=8)
print(f"{paths} paths, log step {ens.params['log_step']:.4f}")
for n in (1, 2, 4, 8):
    e = ely_estimate(ens, n)
    print(f"  n={n}: n*P(max >= n) = {e.value:.4f} +- {e.stderr:.4f}   exact on the lattice {ely_lattice_exact(n):.7f}")

res = ny_check(ens, "indicator:2", checkpoints=[0, 200], min_count=2000)
print("P(max >= 2 | M_t, running max) against the closed form:")
for row in res["bins"]:
    print(f"  t={row['t']:3d} M={row['m']:.3f} max={row['mbar']:.3f} n={row['count']:6d}  mc={row['estimate']:.4f}  formula={row['rhs']:.4f}")
print(f"largest deviation {res['max_abs_deviation']:.4f}, skipped {res['skipped_bins']} small bins")
