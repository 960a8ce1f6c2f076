"""Monte Carlo checks of the running-maximum identities for positive martingales.

The default model is ``M = exp(W - t/2)`` discretised as a multiplicative
binomial walk: each step multiplies by ``u = e^h`` or ``d = e^-h`` with the
up-probability ``(1 - d)/(u - d)`` that makes the one-step mean exact.  The
walk lives on the lattice ``log M in h * Z``, so it is stored as an integer
level and never overshoots a level it crosses.  With ``h = ln 2 / 20`` the
thresholds 2, 4 and 8 sit exactly on the lattice.  The maximum is still
discrete, so smooth functionals carry an ``O(h)`` bias: ``E[1/max M]`` is
``1/(1 + e^-h)`` rather than ``1/2``.

Paths run until ``M`` drops below a floor (default ``1e-6``) or a step cap.
Far from both the running maximum and the floor, ``k`` steps are drawn at
once as a single binomial variate; ``k`` is chosen so the walk cannot reach
either barrier inside the jump, which keeps the sampled law identical to
step-by-step simulation.

Work is split into fixed-size chunks, each with its own child seed from
``numpy.random.SeedSequence``; the number of worker processes (environment
variable ``CONDINF_WORKERS``) therefore never changes the result.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

DEFAULT_LOG_STEP = math.log(2) / 20
DEFAULT_FLOOR = 1e-6
DEFAULT_STEP_CAP = 10**7
CHUNK_SIZE = 50_000
MIN_BIN = 100


@dataclass
class PathEnsemble:
    """Checkpoint summaries of simulated positive martingale paths.

    ``values[i]`` and ``maxima[i]`` hold ``M`` and its running maximum at
    ``checkpoints[i]``; ``final_max`` is the running maximum when the path
    stopped.  Full trajectories are not kept.
    """

    seed: int
    n_paths: int
    model: str
    params: dict
    checkpoints: tuple
    values: np.ndarray
    maxima: np.ndarray
    final_max: np.ndarray
    capped: np.ndarray
    steps: np.ndarray
    levels: np.ndarray | None = None
    max_levels: np.ndarray | None = None
    final_level: np.ndarray | None = None

    @property
    def capped_fraction(self) -> float:
        return float(self.capped.mean()) if self.n_paths else 0.0

    def warnings(self) -> list[str]:
        out = []
        if self.capped_fraction > 1e-3:
            out.append(f"step cap reached on {self.capped_fraction:.4%} of paths")
        return out


# ---------------------------------------------------------------------------
# binomial walk
# ---------------------------------------------------------------------------


def up_probability(log_step: float) -> float:
    u, d = math.exp(log_step), math.exp(-log_step)
    return (1 - d) / (u - d)


def _simulate_chunk(args) -> dict:
    seed_seq, n, log_step, floor_level, cap_level, step_cap, checkpoints = args
    rng = np.random.default_rng(seed_seq)
    p = up_probability(log_step)
    n_ck = len(checkpoints)
    ck = np.asarray(checkpoints, dtype=np.int64)

    S = np.zeros(n, dtype=np.int64)
    Smax = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    next_ck = np.zeros(n, dtype=np.int64)
    lvl_at = np.zeros((n_ck, n), dtype=np.int64)
    max_at = np.zeros((n_ck, n), dtype=np.int64)
    capped = np.zeros(n, dtype=bool)

    idx = np.arange(n)
    while idx.size:
        s, smax, st, nc = S[idx], Smax[idx], steps[idx], next_ck[idx]
        # record checkpoints reached exactly
        while True:
            hit = nc < n_ck
            hit[hit] = ck[nc[hit]] == st[hit]
            if not hit.any():
                break
            lvl_at[nc[hit], idx[hit]] = s[hit]
            max_at[nc[hit], idx[hit]] = smax[hit]
            nc[hit] += 1

        done = s <= floor_level
        if cap_level is not None:
            done |= smax >= cap_level
        at_cap = st >= step_cap
        done |= at_cap
        capped[idx[at_cap & ~(s <= floor_level)]] = True
        if done.any():
            gone = idx[done]
            S[gone], Smax[gone], steps[gone], next_ck[gone] = s[done], smax[done], st[done], nc[done]
            keep = ~done
            idx, s, smax, st, nc = idx[keep], s[keep], smax[keep], st[keep], nc[keep]
            if not idx.size:
                break

        k = np.minimum(smax - s, s - floor_level - 1)
        k = np.minimum(k, step_cap - st)
        pending = nc < n_ck
        to_ck = np.where(pending, ck[np.minimum(nc, n_ck - 1)] - st, k)
        k = np.minimum(k, to_ck)
        k = np.maximum(k, 1)
        ups = rng.binomial(k, p)
        s = s + 2 * ups - k
        st = st + k
        smax = np.maximum(smax, s)
        S[idx], Smax[idx], steps[idx], next_ck[idx] = s, smax, st, nc

    # paths that stopped before a checkpoint keep their final state there
    for j in range(n_ck):
        late = next_ck <= j
        lvl_at[j, late] = S[late]
        max_at[j, late] = Smax[late]
    return {"levels": lvl_at, "max_levels": max_at, "final": Smax, "capped": capped, "steps": steps}


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CONDINF_WORKERS", "1")))
    except ValueError:
        return 1


def simulate_exp_martingale(
    seed: int,
    n_paths: int,
    log_step: float = DEFAULT_LOG_STEP,
    checkpoints: Sequence[int] = (0,),
    floor: float = DEFAULT_FLOOR,
    step_cap: int = DEFAULT_STEP_CAP,
    ceiling: float | None = None,
    chunk_size: int = CHUNK_SIZE,
) -> PathEnsemble:
    """Simulate ``n_paths`` binomial paths of ``exp(W - t/2)`` started at 1.

    ``ceiling`` optionally stops a path once its running maximum reaches
    that value; this is only safe for functionals that do not look above it
    (for instance indicators of ``[a, inf)`` with ``a <= ceiling``).
    """
    if not 0 < log_step <= 0.05:
        raise ValueError("log step must lie in (0, 0.05] to keep the maximum near-continuous")
    if n_paths < 0:
        raise ValueError("n_paths must be nonnegative")
    checkpoints = tuple(sorted(set(int(c) for c in checkpoints)))
    if any(c < 0 for c in checkpoints):
        raise ValueError("checkpoints must be nonnegative step indices")
    floor_level = math.floor(math.log(floor) / log_step)
    cap_level = None if ceiling is None else math.ceil(math.log(ceiling) / log_step - 1e-9)
    children = np.random.SeedSequence(seed).spawn(max(1, -(-n_paths // chunk_size)))
    sizes = [min(chunk_size, n_paths - i * chunk_size) for i in range(len(children))]
    jobs = [(ss, sz, log_step, floor_level, cap_level, step_cap, checkpoints) for ss, sz in zip(children, sizes) if sz > 0]
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_simulate_chunk, jobs))
    else:
        parts = [_simulate_chunk(j) for j in jobs]

    if parts:
        levels = np.concatenate([p["levels"] for p in parts], axis=1)
        max_levels = np.concatenate([p["max_levels"] for p in parts], axis=1)
        final = np.concatenate([p["final"] for p in parts])
        capped = np.concatenate([p["capped"] for p in parts])
        steps = np.concatenate([p["steps"] for p in parts])
    else:
        levels = max_levels = np.zeros((len(checkpoints), 0), dtype=np.int64)
        final = steps = np.zeros(0, dtype=np.int64)
        capped = np.zeros(0, dtype=bool)
    ens = PathEnsemble(
        seed=seed,
        n_paths=n_paths,
        model="exp_martingale",
        params={"log_step": log_step, "floor": floor, "step_cap": step_cap, "ceiling": ceiling, "up_probability": up_probability(log_step)},
        checkpoints=checkpoints,
        values=np.exp(levels * log_step),
        maxima=np.exp(max_levels * log_step),
        final_max=np.exp(final * log_step),
        capped=capped,
        steps=steps,
        levels=levels,
        max_levels=max_levels,
        final_level=final,
    )
    for w in ens.warnings():
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return ens


def simulate_jumpy_martingale(
    seed: int,
    n_paths: int,
    jump_prob: float = 0.01,
    jump_factor: float = 20.0,
    n_steps: int = 2000,
) -> PathEnsemble:
    """Positive martingale with rare upward jumps, for qualitative contrast only.

    Each step multiplies by ``jump_factor`` with probability ``jump_prob``
    and otherwise by the factor that keeps the mean at 1.  The maximum
    overshoots thresholds, so the continuous-maximum identities degrade.
    """
    if not 0 < jump_prob < 1 or jump_prob * jump_factor >= 1:
        raise ValueError("need 0 < jump_prob < 1 and jump_prob * jump_factor < 1")
    down = (1 - jump_prob * jump_factor) / (1 - jump_prob)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    logM = np.zeros(n_paths)
    logmax = np.zeros(n_paths)
    lj, ld = math.log(jump_factor), math.log(down)
    for _ in range(n_steps):
        jumps = rng.random(n_paths) < jump_prob
        logM += np.where(jumps, lj, ld)
        np.maximum(logmax, logM, out=logmax)
    one = np.ones((1, n_paths))
    return PathEnsemble(
        seed=seed,
        n_paths=n_paths,
        model="jumpy",
        params={"jump_prob": jump_prob, "jump_factor": jump_factor, "n_steps": n_steps},
        checkpoints=(0,),
        values=one,
        maxima=one.copy(),
        final_max=np.exp(logmax),
        capped=np.zeros(n_paths, dtype=bool),
        steps=np.full(n_paths, n_steps),
    )


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass
class Estimate:
    value: float
    stderr: float
    n: int

    def to_dict(self) -> dict:
        return {"estimate": self.value, "stderr": self.stderr, "n": self.n}


def _mean_se(x: np.ndarray) -> Estimate:
    n = x.size
    if n == 0:
        return Estimate(float("nan"), float("nan"), 0)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return Estimate(mean, se, n)


def ely_estimate(ensemble: PathEnsemble, n: float) -> Estimate:
    """``n * P(max M >= n)`` at time 0, with its standard error."""
    if ensemble.levels is not None:
        # compare on the integer lattice to avoid rounding at thresholds that are lattice points
        h = ensemble.params["log_step"]
        k = math.ceil(math.log(n) / h - 1e-9)
        hits = ensemble.final_level >= k
    else:
        hits = ensemble.final_max >= n
    e = _mean_se(hits.astype(float))
    return Estimate(n * e.value, n * e.stderr, e.n)


def ely_lattice_exact(n: float, log_step: float = DEFAULT_LOG_STEP, floor: float = DEFAULT_FLOOR) -> float:
    """Exact value of ``n * P(max >= n)`` for the binomial walk absorbed at the floor.

    The stopped walk is a bounded martingale, so optional stopping at the
    first exit of the level band gives the gambler's-ruin probability.
    """
    k = math.ceil(math.log(n) / log_step - 1e-9)
    lo = math.floor(math.log(floor) / log_step)
    top, bottom = math.exp(k * log_step), math.exp(lo * log_step)
    if k <= 0:
        return n
    return n * (1 - bottom) / (top - bottom)


# ---------------------------------------------------------------------------
# scalar functions and the closed-form conditional expectation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarFunction:
    """A function of the running maximum with a known tail integral.

    ``tail(b)`` returns ``int_b^inf f(x) / x^2 dx``.
    """

    kind: str
    params: tuple
    fn: Callable = field(compare=False)
    tail_fn: Callable | None = field(default=None, compare=False)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def tail(self, b: float) -> float:
        if self.tail_fn is not None:
            return float(self.tail_fn(b))
        val, err = integrate.quad(lambda x: float(self.fn(np.asarray(x))) / (x * x), b, np.inf, epsabs=1e-11, epsrel=1e-11, limit=200)
        if not math.isfinite(val):
            raise ValueError("tail integral diverges")
        return val

    def describe(self) -> str:
        return f"{self.kind}:{','.join(str(p) for p in self.params)}"


def indicator(a: float) -> ScalarFunction:
    a = float(a)
    return ScalarFunction("indicator", (a,), lambda x: (x >= a).astype(float), lambda b: 1.0 / max(a, b))


def power(p: float) -> ScalarFunction:
    """``x**-p``; needs ``p > -1`` for the tail integral to converge."""
    p = float(p)
    if p <= -1:
        raise ValueError("x^-p with p <= -1 has a divergent tail integral")
    return ScalarFunction("power", (p,), lambda x: x ** (-p), lambda b: b ** (-p - 1) / (p + 1))


def constant(c: float) -> ScalarFunction:
    c = float(c)
    return ScalarFunction("const", (c,), lambda x: np.full(np.shape(x), c), lambda b: c / b)


def piecewise_constant(breaks: Sequence[float], values: Sequence[float]) -> ScalarFunction:
    """``values[0]`` below ``breaks[0]``, ``values[i]`` on ``[breaks[i-1], breaks[i])``, last value beyond."""
    breaks = tuple(float(b) for b in breaks)
    values = tuple(float(v) for v in values)
    if len(values) != len(breaks) + 1:
        raise ValueError("piecewise constant needs one more value than breakpoints")
    if any(b <= 0 for b in breaks) or list(breaks) != sorted(set(breaks)):
        raise ValueError("breakpoints must be positive and strictly increasing")
    edges = np.asarray(breaks)

    def fn(x):
        return np.asarray(values)[np.searchsorted(edges, x, side="right")]

    def tail(b):
        # int_lo^hi x^-2 dx = 1/lo - 1/hi over each piece meeting [b, inf)
        knots = [b] + [e for e in breaks if e > b] + [math.inf]
        total = 0.0
        for lo, hi in zip(knots, knots[1:]):
            v = values[int(np.searchsorted(edges, lo, side="right"))]
            total += v * (1 / lo - (0.0 if math.isinf(hi) else 1 / hi))
        return total

    return ScalarFunction("piecewise", breaks + values, fn, tail)


def from_callable(f: Callable, name: str = "callable") -> ScalarFunction:
    return ScalarFunction(name, (), np.vectorize(f, otypes=[float]))


def parse_function(spec) -> ScalarFunction:
    """Parse ``indicator:a``, ``power:p``, ``const:c`` or ``piecewise:b1,b2|v0,v1,v2``."""
    if isinstance(spec, ScalarFunction):
        return spec
    if callable(spec):
        return from_callable(spec)
    kind, _, arg = str(spec).partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "indicator":
            return indicator(float(Fraction(arg)))
        if kind == "power":
            return power(float(Fraction(arg)))
        if kind in ("const", "constant"):
            return constant(float(Fraction(arg or "1")))
        if kind == "piecewise":
            b, _, v = arg.partition("|")
            return piecewise_constant([float(Fraction(x)) for x in b.split(",") if x], [float(Fraction(x)) for x in v.split(",")])
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad function spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown function spec {spec!r}")


def ny_rhs(f, m: float, mbar: float) -> float:
    """Closed-form ``E[f(max M) | M_t = m, running max = mbar]``."""
    if not 0 < m <= mbar:
        raise ValueError("need 0 < m <= mbar")
    f = parse_function(f)
    return float(f(mbar)) * (1 - m / mbar) + m * f.tail(mbar)


# ---------------------------------------------------------------------------
# stratified comparison
# ---------------------------------------------------------------------------


def ny_check(ensemble: PathEnsemble, f, checkpoints: Sequence[int] | None = None, min_count: int = MIN_BIN) -> dict:
    """Compare binned Monte Carlo means of ``f(max M)`` with the closed form.

    Paths are grouped by their exact ``(M_t, running max)`` pair at each
    checkpoint; groups smaller than ``min_count`` are skipped and counted.
    """
    f = parse_function(f)
    fx = f(ensemble.final_max)
    if checkpoints is None:
        checkpoints = ensemble.checkpoints
    rows = []
    skipped = 0
    for t in checkpoints:
        j = ensemble.checkpoints.index(t)
        if ensemble.levels is not None:
            keys = np.stack([ensemble.levels[j], ensemble.max_levels[j]], axis=1)
        else:
            keys = np.stack([ensemble.values[j], ensemble.maxima[j]], axis=1)
        uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        order = np.argsort(inverse, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(counts)])
        for b, cnt in enumerate(counts):
            if cnt < min_count:
                skipped += 1
                continue
            members = order[bounds[b] : bounds[b + 1]]
            w = members[0]
            m, mbar = float(ensemble.values[j, w]), float(ensemble.maxima[j, w])
            if m < DEFAULT_FLOOR * 10:
                skipped += 1
                continue
            est = _mean_se(fx[members])
            rhs = ny_rhs(f, m, mbar)
            rows.append({"t": t, "m": m, "mbar": mbar, "count": int(cnt), "estimate": est.value, "stderr": est.stderr, "rhs": rhs, "deviation": est.value - rhs})
    devs = [abs(r["deviation"]) for r in rows]
    worst = max(range(len(rows)), key=lambda i: devs[i]) if rows else None
    return {
        "function": f.describe(),
        "bins": rows,
        "skipped_bins": skipped,
        "max_abs_deviation": max(devs) if devs else None,
        "worst_bin": rows[worst] if worst is not None else None,
        "warnings": ensemble.warnings(),
    }
