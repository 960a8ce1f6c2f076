"""JSON scenarios: a space, a process on it and the checks to run.

A scenario looks like::

    {
      "name": "running max of a tree martingale",
      "lattice": {"lattice": "extended_real"},
      "space": {"generator": "tree_martingale", "seed": 3, "depth": 4},
      "process": {"builder": "running_max"},
      "checks": ["ncr", "running_max_recovery", {"name": "sticky", "assert": false}]
    }

``space`` is either explicit (``probs``, ``partitions``, optional
``outcomes``) or a seeded generator.  Generators that produce a process as
well (``tree_martingale``, ``gen_martingale``, the lazy walks) make it the
*base* process.  An explicit base can be given as ``{"base": {"grid": ...}}``.
``process`` is an explicit ``grid`` (rows indexed by time, one entry per
outcome) or a builder applied to the base.

Rationals are written as strings (``"1/3"``), infinities as ``"inf"`` and
``"-inf"``.
"""

from __future__ import annotations

import json
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

from .conditional import inf_process
from .lattice import INF, Lattice, PowerSet, lattice_from_spec
from .martingale import (
    ReconstructionInput,
    is_martingale,
    is_supermartingale,
    lazy_walk_1d,
    lazy_walk_2d,
    reconstruct,
    tree_martingale,
    verify_running_max_recovery,
)
from .recovery import (
    abs_metric,
    check_ncr,
    check_recovery_i,
    check_sticky,
    check_sticky_monotone,
    convex_hull_process,
    discrete_metric,
    euclidean_metric,
    integral_functional,
    piecewise_linear,
    running_max,
    validate_witness_ii,
    validate_witness_iii,
    visit_functional,
    visited_sites_process,
)
from .report import CheckResult, Report
from .space import (
    AdaptedProcess,
    FiniteFilteredSpace,
    StoppingTime,
    gen_martingale,
    gen_space,
    validate_process,
    validate_space,
)


class ScenarioError(ValueError):
    """The scenario does not describe a valid setup."""


_RATIONAL = {"type": ["string", "integer"]}

SCHEMA: dict = {
    "type": "object",
    "required": ["space", "checks"],
    "properties": {
        "schema_version": {"const": 1},
        "name": {"type": "string"},
        "lattice": {"type": "object", "required": ["lattice"]},
        "space": {
            "type": "object",
            "oneOf": [
                {
                    "required": ["probs", "partitions"],
                    "not": {"required": ["generator"]},
                    "properties": {
                        "probs": {"type": "array", "minItems": 1, "items": _RATIONAL},
                        "partitions": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                        },
                        "outcomes": {"type": "array"},
                    },
                },
                {
                    "required": ["generator"],
                    "properties": {
                        "generator": {"enum": ["gen_space", "gen_martingale", "tree_martingale", "lazy_walk_1d", "lazy_walk_2d"]},
                        "seed": {"type": ["integer", "string"]},
                    },
                },
            ],
        },
        "base": {"type": "object"},
        "process": {
            "type": "object",
            "oneOf": [{"required": ["grid"]}, {"required": ["builder"]}],
            "properties": {
                "grid": {"type": "array", "items": {"type": "array"}},
                "builder": {"enum": ["identity", "running_max", "visit_functional", "integral_functional", "convex_hull", "visited_sites", "inf_process"]},
            },
        },
        "checks": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "string"},
                    {"type": "object", "required": ["name"], "properties": {"name": {"type": "string"}, "assert": {"type": "boolean"}}},
                ]
            },
        },
        "output": {"type": "string"},
    },
}

_SEEDED = {"gen_space", "gen_martingale", "tree_martingale"}


def _rational(x) -> Fraction:
    try:
        return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"not a rational number: {x!r}") from exc


# ---------------------------------------------------------------------------
# exact scalar functions for builders
# ---------------------------------------------------------------------------


def exact_function(spec):
    """Exact rational function from ``"identity"``, ``"abs"`` or a dict spec.

    Dict kinds: ``piecewise_linear`` (``knots``, ``values``), ``min_square``
    (``x^2`` capped at ``cap``), ``indicator`` (``set`` of values).
    """
    if spec is None or spec == "identity":
        return lambda x: x
    if spec == "abs":
        return abs
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError(f"unknown function {spec!r}")
    kind = spec["kind"]
    if kind == "piecewise_linear":
        knots = [_rational(k) for k in spec["knots"]]
        if len(knots) < 1 or knots != sorted(set(knots)) or len(spec["values"]) != len(knots):
            raise ScenarioError("piecewise_linear needs increasing knots and one value per knot")
        return piecewise_linear(knots, [_rational(v) for v in spec["values"]])
    if kind == "min_square":
        cap = _rational(spec.get("cap", 1))
        return lambda x: min(Fraction(x) ** 2, cap)
    if kind == "indicator":
        members = {_rational(v) for v in spec["set"]}
        return lambda x: Fraction(1) if x in members else Fraction(0)
    raise ScenarioError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


class Scenario:
    """A loaded scenario: lattice, space, optional base process and target process."""

    def __init__(self, data: dict):
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ScenarioError(f"schema violation at {where}: {exc.message}") from exc
        self.data = data
        self.name = data.get("name", "scenario")
        self.lattice: Lattice = self._lattice(data.get("lattice", {"lattice": "extended_real"}))
        self.space, self.base = self._space(data["space"])
        if "base" in data:
            self.base = self._grid_process(data["base"], None, "base")
        self.process = self._process(data.get("process"))
        self.checks = [c if isinstance(c, dict) else {"name": c} for c in data["checks"]]

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
        return cls(data)

    def _lattice(self, spec: dict) -> Lattice:
        try:
            return lattice_from_spec(spec)
        except (KeyError, ValueError, TypeError) as exc:
            raise ScenarioError(f"bad lattice: {exc}") from exc

    def _space(self, spec: dict):
        gen = spec.get("generator")
        if gen is None:
            probs = [_rational(p) for p in spec["probs"]]
            space = FiniteFilteredSpace(probs, spec["partitions"], spec.get("outcomes"))
            rep = validate_space(space)
            if not rep.passed:
                bad = rep.failures[0]
                raise ScenarioError(f"invalid space ({bad.name}): {json.dumps(bad.to_dict()['witness'])}")
            return space, None
        if gen in _SEEDED and "seed" not in spec:
            raise ScenarioError(f"generator {gen} needs an explicit seed")
        try:
            if gen == "gen_space":
                return gen_space(spec["seed"], int(spec["m"]), int(spec["T"])), None
            if gen == "gen_martingale":
                space = gen_space(spec["seed"], int(spec["m"]), int(spec["T"]))
                return space, gen_martingale(spec["seed"], space, int(spec.get("low", 0)), int(spec.get("high", 10)))
            if gen == "tree_martingale":
                M = tree_martingale(spec["seed"], int(spec["depth"]), int(spec.get("branching", 2)))
                return M.space, M
            if gen == "lazy_walk_1d":
                X = lazy_walk_1d(int(spec["depth"]), _rational(spec.get("p_stay", "1/3")), int(spec.get("start", 0)))
                return X.space, X
            if gen == "lazy_walk_2d":
                X = lazy_walk_2d(int(spec["depth"]), _rational(spec.get("p_stay", "1/3")))
                return X.space, X
        except KeyError as exc:
            raise ScenarioError(f"generator {gen} is missing parameter {exc}") from exc
        raise ScenarioError(f"unknown generator {gen!r}")

    def _decode(self, v, lattice: Lattice | None):
        if lattice is None:
            if isinstance(v, list):
                return tuple(_rational(c) for c in v)
            return _rational(v)
        try:
            return lattice.decode(v)
        except (ValueError, TypeError, KeyError) as exc:
            raise ScenarioError(f"cannot decode value {v!r}: {exc}") from exc

    def _grid_process(self, spec: dict, lattice: Lattice | None, what: str) -> AdaptedProcess:
        grid = tuple(tuple(self._decode(v, lattice) for v in row) for row in spec["grid"])
        U = AdaptedProcess(self.space, grid, lattice)
        rep = validate_process(U)
        if not rep.passed:
            bad = rep.failures[0]
            raise ScenarioError(f"invalid {what} ({bad.name}): {json.dumps(bad.to_dict()['witness'])}")
        return U

    def _need_base(self, builder: str) -> AdaptedProcess:
        if self.base is None:
            raise ScenarioError(f"builder {builder} needs a base process")
        return self.base

    def _process(self, spec: dict | None) -> AdaptedProcess | None:
        if spec is None:
            return self.base
        if "grid" in spec:
            return self._grid_process(spec, self.lattice, "process")
        b = spec["builder"]
        if b == "identity":
            X = self._need_base(b)
            return AdaptedProcess(X.space, X.grid, self.lattice)
        if b == "running_max":
            return running_max(self._need_base(b), exact_function(spec.get("f")))
        if b == "visit_functional":
            inc = spec.get("increments")
            return visit_functional(self._need_base(b), [_rational(k) for k in spec.get("K", [0])], None if inc is None else [_rational(x) for x in inc])
        if b == "integral_functional":
            return integral_functional(self._need_base(b), exact_function(spec.get("f")), _rational(spec.get("dt", 1)))
        if b == "convex_hull":
            return convex_hull_process(self._need_base(b))
        if b == "visited_sites":
            X = self._need_base(b)
            lattice = None
            if isinstance(self.lattice, PowerSet):
                # JSON labels are strings; the walk visits rational sites
                ground = [_rational(g) for g in self.lattice.ground]
                lattice = PowerSet(ground, [self.lattice.weights[g] for g in self.lattice.ground])
            try:
                return visited_sites_process(X, lattice)
            except ValueError as exc:
                raise ScenarioError(f"visited_sites: {exc}") from exc
        if b == "inf_process":
            if "X" in spec:
                X = tuple(self._decode(v, self.lattice) for v in spec["X"])
                if len(X) != self.space.m:
                    raise ScenarioError("X needs one value per outcome")
            else:
                X = self._need_base(b).terminal
            return inf_process(X, self.space, self.lattice)
        raise ScenarioError(f"unknown builder {b!r}")

    # -----------------------------------------------------------------------
    # checks
    # -----------------------------------------------------------------------

    def _target(self, check: dict, default: str) -> AdaptedProcess:
        which = check.get("target", default)
        obj = self.base if which == "base" else self.process
        if obj is None:
            obj = self.process if which == "base" else self.base
        if obj is None:
            raise ScenarioError(f"check {check['name']} has no process to act on")
        return obj

    def _metric(self, check: dict, X: AdaptedProcess):
        name = check.get("metric")
        if name is None:
            sample = X.grid[0][0]
            name = "euclidean" if isinstance(sample, tuple) else "abs"
        return {"abs": abs_metric, "euclidean": euclidean_metric, "discrete": discrete_metric}[name]

    def _tau(self, raw) -> StoppingTime:
        if not isinstance(raw, list) or len(raw) != self.space.m:
            raise ScenarioError("tau needs one entry per outcome")
        return StoppingTime(self.space, tuple(INF if v in ("inf", None) else int(v) for v in raw))

    def _run_check(self, check: dict) -> list[CheckResult]:
        name = check["name"]
        if name == "ncr":
            verdict = check_ncr(self._target(check, "process"))
            out = verdict.checks()
            out.append(CheckResult("ncr_consistent", verdict.consistent, None if verdict.consistent else {"flags": verdict.flags}))
            return out
        if name == "recovery_i":
            return [check_recovery_i(self._target(check, "process"))]
        if name == "sticky":
            X = self._target(check, "base")
            return [check_sticky(X, self._metric(check, X))]
        if name == "sticky_monotone":
            return [check_sticky_monotone(self._target(check, "process"))]
        if name in ("martingale", "supermartingale"):
            M = self._target(check, "base")
            ok = is_martingale(M) if name == "martingale" else is_supermartingale(M)
            return [CheckResult(name, ok)]
        if name == "running_max_recovery":
            rep = verify_running_max_recovery(self._target(check, "base"), int(check.get("reweightings", 10)), check.get("seed", 0))
            return rep.checks
        if name == "reconstruction":
            M = self._target(check, "base")
            bound = _rational(check.get("bound", 0))
            mask = check.get("mask")
            mask = None if mask is None else [_rational(v) for v in mask]
            rec = reconstruct(ReconstructionInput.from_martingale(M, mask, bound))
            same = rec.process.grid == M.grid
            return rec.report.checks + [CheckResult("reconstruction_matches", same)]
        if name == "validate":
            U = self._target(check, "process")
            rep = validate_space(self.space)
            rep.extend(validate_process(U, monotone=bool(check.get("monotone", False))))
            return rep.checks
        if name in ("witness_ii", "witness_iii"):
            U = self._target(check, "process")
            tau = self._tau(check.get("tau"))
            Y = tuple(self._decode(v, U.lattice) for v in check.get("Y", []))
            if len(Y) != self.space.m:
                raise ScenarioError("Y needs one value per outcome")
            valid = (validate_witness_ii if name == "witness_ii" else validate_witness_iii)(U, tau, Y)
            return [CheckResult(name, valid, None if valid else {"reason": "witness does not certify a violation"})]
        raise ScenarioError(f"unknown check {name!r}")

    def run(self, timing: bool = False) -> Report:
        rep = Report()
        for check in self.checks:
            asserted = bool(check.get("assert", True))
            t0 = time.perf_counter()
            try:
                results = self._run_check(check)
            except ScenarioError:
                raise
            except ValueError as exc:
                results = [CheckResult(check["name"], False, {"error": str(exc)})]
            dt = time.perf_counter() - t0
            for r in results:
                r.asserted = asserted
                r.seconds = dt if timing else None
                rep.add(r)
        rep.summary = {
            "scenario": self.name,
            "lattice": (self.process.lattice or self.lattice).describe() if self.process is not None else self.lattice.describe(),
            "outcomes": self.space.m,
            "horizon": self.space.T,
        }
        return rep


def run_scenario(source: Any, timing: bool = False) -> Report:
    """Load a scenario (path or dict) and run its checks."""
    scen = Scenario(source) if isinstance(source, dict) else Scenario.load(source)
    return scen.run(timing)
