"""Named scenarios loaded from JSON files, with executable verdict tables.

A scenario file looks like::

    {"name": "dyadic_spikes",
     "description": "...",
     "ladder": [6, 8, 10],
     "young": {"kind": "power", "parameters": {"p": 2}, "role": "phistar"},
     "sequence": {"generator": {"name": "dyadic_spikes", "params": {}}},
     "verdicts": [{"check": "unit_norms", "expect": "pass", "params": {"tol": 1e-12}}]}

Sequence checks run once per ladder depth (the depth overrides the
generator's ``depth`` parameter); ladder-wide checks run once.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Mapping

import numpy as np

from .errors import InvariantViolation, ScenarioNotFound
from .estimates import DisjointFamily, cesaro_disjoint_bounds, verify_upper_q_estimate
from .komlos import RvSequence, komlos_extract, non_delta2_counterexample, sequence_from_config
from .norms import luxemburg_norm
from .space import RandomVariable, l0_metric, ui_modulus
from .young import YoungFunction, conjugate, from_config

__all__ = ["Scenario", "VerdictResult", "ScenarioResult", "CHECKS", "build_scenario", "list_scenarios", "scenario_aliases", "load_scenario", "run_scenario"]

_PACKAGE = "orlicz_lab.scenarios"


@dataclass(frozen=True)
class Scenario:
    name: str
    ladder: tuple
    young: Mapping
    sequence: Mapping | None
    verdicts: tuple
    description: str = ""

    @property
    def role(self) -> str:
        return self.young.get("role", "phistar")

    def young_function(self) -> YoungFunction:
        return from_config(self.young)

    def sequence_at(self, depth: int) -> RvSequence:
        if self.sequence is None:
            raise InvariantViolation(f"scenario {self.name!r} has no sequence")
        entry = json.loads(json.dumps(self.sequence))
        entry.setdefault("generator", {}).setdefault("params", {})["depth"] = depth
        return sequence_from_config(entry)


@dataclass(frozen=True)
class VerdictResult:
    check: str
    expect: str
    outcome: str
    value: float
    tol: float | None
    depth: int | None

    @property
    def passed(self) -> bool:
        return self.outcome == self.expect

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "expect": self.expect,
            "outcome": self.outcome,
            "passed": self.passed,
            "value": self.value,
            "tol": self.tol,
            "depth": self.depth,
        }


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "verdicts": [r.to_dict() for r in self.results]}


_ALIASES = "aliases.json"


def list_scenarios() -> list[str]:
    files = resources.files(_PACKAGE).iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json") and f.name != _ALIASES)


def scenario_aliases() -> dict:
    """Alternate names accepted by ``build_scenario``, mapped to registered names."""
    return json.loads(resources.files(_PACKAGE).joinpath(_ALIASES).read_text())


def load_scenario(data: Mapping) -> Scenario:
    for key in ("name", "ladder", "young", "verdicts"):
        if key not in data:
            raise InvariantViolation(f"scenario is missing {key!r}")
    known = set(CHECKS) | set(LADDER_CHECKS)
    for v in data["verdicts"]:
        if v.get("check") not in known:
            raise InvariantViolation(f"unknown verdict check {v.get('check')!r}")
        if v.get("expect") not in ("pass", "fail"):
            raise InvariantViolation("verdict 'expect' must be 'pass' or 'fail'")
    return Scenario(
        name=data["name"],
        ladder=tuple(int(k) for k in data["ladder"]),
        young=dict(data["young"]),
        sequence=data.get("sequence"),
        verdicts=tuple(data["verdicts"]),
        description=data.get("description", ""),
    )


def build_scenario(name: str, ladder=None) -> Scenario:
    """Load a registered scenario; ``ladder`` optionally overrides its depths."""
    name = scenario_aliases().get(name, name)
    if name not in list_scenarios():
        raise ScenarioNotFound(name)
    text = resources.files(_PACKAGE).joinpath(f"{name}.json").read_text()
    sc = load_scenario(json.loads(text))
    if ladder is not None:
        sc = Scenario(sc.name, tuple(int(k) for k in ladder), sc.young, sc.sequence, sc.verdicts, sc.description)
    return sc


# ----------------------------------------------------------------------------
# checks: each returns (passed, value)


class _Context:
    """Per-depth cache of the sequence, the conjugate and the certificate."""

    def __init__(self, scenario: Scenario, depth: int):
        self.scenario = scenario
        self.depth = depth
        self.young = scenario.young_function()
        self._seq = None
        self._cert = None
        self._other = None

    @property
    def seq(self) -> RvSequence:
        if self._seq is None:
            self._seq = self.scenario.sequence_at(self.depth)
        return self._seq

    @property
    def phistar(self) -> YoungFunction:
        if self.scenario.role == "phistar":
            return self.young
        if self._other is None:
            self._other = conjugate(self.young)
        return self._other

    @property
    def phi(self) -> YoungFunction:
        if self.scenario.role == "phi":
            return self.young
        if self._other is None:
            self._other = conjugate(self.young)
        return self._other

    @property
    def cert(self):
        if self._cert is None:
            self._cert = komlos_extract(self.seq, self.phistar)
        return self._cert


def _unit_norms(ctx, p):
    worst = max(abs(luxemburg_norm(t, ctx.phistar).value - 1.0) for t in ctx.seq.terms)
    return worst <= p.get("tol", 1e-12), worst


def _l0_null(ctx, p):
    zero = ctx.seq.terms[0] * 0.0
    trace = [l0_metric(t, zero) for t in ctx.seq.terms]
    last = trace[-1]
    return bool(np.all(np.diff(trace) <= 0) and last <= p.get("tol", 0.01)), last


def _uniformly_integrable(ctx, p):
    # E[|xi_n|^r 1{|xi_n|^r > N}] at a fixed level N
    r = p.get("power", 2.0)
    fam = [RandomVariable(t.space, np.abs(t.values) ** r) for t in ctx.seq.terms]
    one = RandomVariable(fam[0].space, np.ones(fam[0].space.size))
    value = ui_modulus(fam, one, p.get("level", 16.0))
    return value <= p.get("tol", 0.1), value


def _order_bound(ctx, p):
    bound = p.get("bound", 1.0)
    if p.get("bound_name") == "sqrt_zeta2":
        bound = math.pi / math.sqrt(6.0)
    value = ctx.cert.order_bound_norm
    return value <= bound + p.get("tol", 1e-9), value


def _komlos_complete(ctx, p):
    return ctx.cert.complete, float(ctx.cert.complete)


def _forward_valid(ctx, p):
    return ctx.cert.forward_valid(), float(ctx.cert.forward_valid())


def _limit_matches_truth(ctx, p):
    seq = ctx.seq
    truth = seq.meta.get("bounded_part", seq.limit)
    pos = seq.space.positive
    gap = float(np.max(np.abs(ctx.cert.limit.values - truth.values)[pos]))
    return gap <= p.get("tol", 1e-9), gap


def _order_bound_within_constructed(ctx, p):
    # ||b|| + ||sup |delta_n| || + 1: the spikes' block means contribute at most 1
    seq = ctx.seq
    bound = luxemburg_norm(seq.meta["bounded_part"], ctx.phistar).value
    bound += luxemburg_norm(seq.meta["noise_sup"], ctx.phistar).value + 1.0
    value = ctx.cert.order_bound_norm
    return value <= bound, value


def _disjoint_family(ctx):
    return DisjointFamily(ctx.seq.terms)


def _q_estimate_ratio(ctx, p):
    rep = verify_upper_q_estimate(_disjoint_family(ctx), ctx.phi, p["q"], declared_C=p.get("C"), phistar=ctx.phistar)
    target = p.get("ratio", rep.empirical_C)
    return abs(rep.empirical_C - target) <= p.get("tol", 1e-9) and rep.holds, rep.empirical_C


def _cesaro_identity(ctx, p):
    rep = cesaro_disjoint_bounds(_disjoint_family(ctx), ctx.phi, p["q"], phistar=ctx.phistar)
    return rep.sup_identity_exact, rep.extras["max_abs_identity_gap"]


def _cesaro_exponent(ctx, p):
    rep = cesaro_disjoint_bounds(_disjoint_family(ctx), ctx.phi, p["q"], phistar=ctx.phistar)
    return abs(rep.fitted_exponent - rep.expected_exponent) <= p.get("tol", 0.05), rep.fitted_exponent


def _obstruction(scenario, ladder, p):
    phi = scenario.young_function() if scenario.role == "phi" else conjugate(scenario.young_function())
    rep = non_delta2_counterexample(phi, ladder=ladder, floor=p.get("floor", 0.25), seed=p.get("seed", 0))
    return rep.obstruction, min(rep.eps_by_level)


CHECKS: dict[str, Callable] = {
    "unit_norms": _unit_norms,
    "l0_null": _l0_null,
    "uniformly_integrable": _uniformly_integrable,
    "order_bound": _order_bound,
    "komlos_complete": _komlos_complete,
    "forward_valid": _forward_valid,
    "limit_matches_truth": _limit_matches_truth,
    "order_bound_within_constructed_bound": _order_bound_within_constructed,
    "q_estimate_ratio": _q_estimate_ratio,
    "cesaro_identity": _cesaro_identity,
    "cesaro_exponent": _cesaro_exponent,
}

LADDER_CHECKS: dict[str, Callable] = {"obstruction": _obstruction}


def run_scenario(scenario: Scenario | str, ladder=None) -> ScenarioResult:
    """Execute every verdict; a verdict passes when its outcome matches ``expect``."""
    if isinstance(scenario, str):
        scenario = build_scenario(scenario, ladder)
    elif ladder is not None:
        scenario = Scenario(scenario.name, tuple(ladder), scenario.young, scenario.sequence, scenario.verdicts, scenario.description)
    results = []
    contexts = {}
    for v in scenario.verdicts:
        params = dict(v.get("params", {}))
        if v["check"] in LADDER_CHECKS:
            ok, value = LADDER_CHECKS[v["check"]](scenario, list(scenario.ladder), params)
            results.append(VerdictResult(v["check"], v["expect"], "pass" if ok else "fail", float(value), params.get("floor"), None))
            continue
        for depth in scenario.ladder:
            ctx = contexts.setdefault(depth, _Context(scenario, depth))
            ok, value = CHECKS[v["check"]](ctx, params)
            results.append(VerdictResult(v["check"], v["expect"], "pass" if ok else "fail", float(value), params.get("tol"), depth))
    return ScenarioResult(scenario.name, results)
