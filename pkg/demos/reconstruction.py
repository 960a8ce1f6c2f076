"""Rebuild a martingale from its terminal value and its maximum hidden below a mask."""

import random
from fractions import Fraction

from condinf import tree_martingale
from condinf.martingale import ReconstructionInput, reconstruct

M = tree_martingale(11, 3)
rng = random.Random(0)
bound = 2
mask = tuple(Fraction(rng.randint(0, 2 * bound), 2) for _ in range(M.space.m))
data = ReconstructionInput.from_martingale(M, mask, bound)

print("terminal values  ", [str(v) for v in data.terminal])
print("masked maximum   ", [str(v) for v in data.masked_max])
R = reconstruct(data)
for t in range(M.space.T + 1):
    print(f"t={t} rebuilt {[str(v) for v in R.process.grid[t]]}")
print("matches the hidden martingale:", R.process.grid == M.grid)
for check in R.report.checks:
    print(f"  {check.name}: {'pass' if check.passed else 'fail'}")
print("levels with a distinct stopped stage:", sorted({n for n in R.stages}))
