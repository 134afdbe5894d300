"""Command-line front end: JSON reports, optional CSV traces, distinct exit codes.

Exit codes: 0 all declared verdicts pass, 1 a verdict failed, 2 the
command line or config could not be parsed, 3 unknown scenario, 4 solver
consistency error, 5 any other library error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gallery, risk
from .errors import ConsistencyError, OrliczLabError, ScenarioNotFound
from .estimates import DisjointFamily, cesaro_disjoint_bounds, verify_upper_q_estimate
from .komlos import komlos_extract, sequence_from_config
from .norms import dual_orlicz_norm, holder_check, luxemburg_norm
from .space import RandomVariable, rv_from_config, ui_profile
from .young import conjugate, delta2_index, doubling_oracle, from_config

EXIT_OK, EXIT_VERDICT, EXIT_PARSE, EXIT_SCENARIO, EXIT_CONSISTENCY, EXIT_OTHER = range(6)


class ConfigError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    assertions: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def check(self, name: str, passed: bool, value=None, tol=None) -> None:
        self.assertions.append({"name": name, "passed": bool(passed), "value": _jsonable(value), "tol": tol})

    @property
    def ok(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "ok": self.ok,
            "assertions": self.assertions,
            "payload": _jsonable(self.payload),
            "wall_time": self.wall_time,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, RandomVariable):
        return _jsonable(x.values.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config is missing {key!r}")
    return cfg[key]


def _digest(command, cfg, args) -> str:
    blob = json.dumps({"command": command, "config": cfg, "seed": args.seed, "tol": args.tol, "ladder": args.ladder}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ORLICZ_LAB_THREADS", "4")))
    except ValueError:
        return 1


def _ladder(args):
    if args.ladder is None:
        return None
    try:
        return [int(k) for k in args.ladder.split(",") if k.strip()]
    except ValueError:
        raise ConfigError(f"bad --ladder {args.ladder!r}") from None


def _write_csv(path, header, rows) -> None:
    if path is None:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ----------------------------------------------------------------------------
# commands


def cmd_norm(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    xi = rv_from_config(_need(cfg, "rv"))
    kind = cfg.get("kind", "both")
    tol = args.tol or 1e-6
    if kind in ("luxemburg", "both"):
        res = luxemburg_norm(xi, phi)
        rep.payload["luxemburg"] = res.to_dict()
        rep.check("luxemburg_finite", math.isfinite(res.value), res.value)
    if kind in ("dual", "both"):
        res = dual_orlicz_norm(xi, phi, tol=tol)
        rep.payload["dual"] = res.to_dict()
        rep.check("solvers_agree", res.residual <= tol, res.residual, tol)


def cmd_conjugate(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    g = cfg.get("grid", {})
    ys = np.linspace(0.0, float(g.get("y_max", 10.0)), int(g.get("n", 41)))
    numeric = conjugate(phi, method="numeric")
    vals = numeric(ys)
    rep.payload["kind"] = phi.kind
    rep.payload["y"] = ys
    rep.payload["numeric"] = vals
    closed = None
    try:
        closed = conjugate(phi, method="closed")
    except OrliczLabError:
        pass
    rows = [[y, v] for y, v in zip(ys, vals)]
    if closed is not None:
        ref = closed(ys)
        err = float(np.max(np.abs(vals - ref)))
        rep.payload["closed"] = ref
        rep.check("matches_closed_form", err <= (args.tol or 1e-6), err, args.tol or 1e-6)
        rows = [[y, v, r] for (y, v), r in zip(zip(ys, vals), ref)]
    xs = np.linspace(0.0, float(g.get("x_max", 5.0)), 41)
    young_gap = float(np.min(phi(xs)[:, None] + vals[None, :] - xs[:, None] * ys[None, :]))
    rep.check("young_inequality", young_gap >= -1e-9, young_gap, 1e-9)
    _write_csv(args.csv, ["y", "numeric", "closed"][: len(rows[0])], rows)


def cmd_delta2(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    d2 = delta2_index(phi, y_cutoff=float(cfg.get("y_cutoff", 100.0)))
    oracle, trace = doubling_oracle(phi, cutoff=float(cfg.get("y_cutoff", 100.0)))
    rep.payload.update(
        {"p_phi": d2.p_phi, "q_phi": d2.q_phi, "is_delta2": d2.is_delta2, "scan_grid": d2.scan_grid, "cutoff_trace": d2.cutoff_trace, "doubling_trace": trace}
    )
    rep.check("agrees_with_doubling_oracle", oracle == d2.is_delta2, oracle)
    if "expect_delta2" in cfg:
        rep.check("declared_delta2", d2.is_delta2 == bool(cfg["expect_delta2"]), d2.is_delta2)
    _write_csv(args.csv, ["x", "p_phi_of_x"], zip(d2.x_grid, d2.p_phi_of_x))


def _family(cfg):
    seq = sequence_from_config(_need(cfg, "family"))
    return DisjointFamily(seq.terms)


def cmd_q_estimate(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    fam = _family(cfg)
    q = float(_need(cfg, "q"))
    phistar = conjugate(phi)
    d2 = delta2_index(phi)
    rows = []
    for n in cfg.get("ns", list(range(1, len(fam) + 1))):
        sub = DisjointFamily(fam.members[:n])
        r = verify_upper_q_estimate(sub, phi, q, declared_C=cfg.get("C"), phistar=phistar, delta2=d2)
        rows.append([n, r.lhs, r.rhs_sum, r.empirical_C])
        if r.declared_C is not None:
            rep.check(f"q_estimate_n{n}", r.holds, r.empirical_C, r.declared_C)
    rep.payload["columns"] = ["n", "lhs", "rhs", "ratio"]
    rep.payload["rows"] = rows
    rep.payload["certifying_x0"] = r.certifying_x0
    rep.payload["certifying_p"] = r.certifying_p
    if "expect_ratio" in cfg:
        tol = args.tol or 1e-9
        worst = max(abs(row[3] - cfg["expect_ratio"]) for row in rows)
        rep.check("ratio_column", worst <= tol, worst, tol)
    _write_csv(args.csv, rep.payload["columns"], rows)


def cmd_cesaro(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    fam = _family(cfg)
    q = float(_need(cfg, "q"))
    r = cesaro_disjoint_bounds(fam, phi, q, C=cfg.get("C"))
    rep.payload.update(
        {"fitted_exponent": r.fitted_exponent, "expected_exponent": r.expected_exponent, "sup_norm": r.sup_norm, "bound": r.bound, "C": r.C}
    )
    rep.check("sup_identity_exact", r.sup_identity_exact, r.extras["max_abs_identity_gap"], 0.0)
    tol = args.tol or 0.05
    rep.check("decay_exponent", abs(r.fitted_exponent - r.expected_exponent) <= tol, r.fitted_exponent, tol)
    rep.check("sup_within_bound", r.within_bound, r.sup_norm)
    _write_csv(args.csv, ["n", "mean_norm"], [[n + 1, v] for n, v in enumerate(r.mean_norms)])


def cmd_holder(cfg, args, rep):
    phi = from_config(_need(cfg, "young"))
    eta = rv_from_config(_need(cfg, "eta"))
    xi = rv_from_config(_need(cfg, "xi"))
    r = holder_check(eta, xi, phi)
    rep.payload.update({"lhs": r.lhs, "rhs": r.rhs, "eta_norm": r.eta_norm, "xi_dual_norm": r.xi_dual_norm})
    rep.check("holder", r.holds, r.slack)


def cmd_ui(cfg, args, rep):
    seq = sequence_from_config(_need(cfg, "sequence"))
    levels = [float(x) for x in cfg.get("levels", [1, 4, 16, 64])]
    power = float(cfg.get("power", 1.0))
    fam = [RandomVariable(t.space, np.abs(t.values) ** power) for t in seq.terms]
    one = RandomVariable(seq.space, np.ones(seq.space.size))
    prof = ui_profile(fam, one, levels)
    rep.payload.update({"levels": levels, "modulus": prof})
    if "expect_ui" in cfg:
        tol = args.tol or 0.1
        rep.check("uniformly_integrable", (prof[-1] <= tol) == bool(cfg["expect_ui"]), prof[-1], tol)
    _write_csv(args.csv, ["level", "modulus"], zip(levels, prof))


def cmd_komlos(cfg, args, rep):
    if args.scenario or "scenario" in cfg:
        sc = gallery.build_scenario(args.scenario or cfg["scenario"], _ladder(args))
        ys = sc.young_function()
        phistar = ys if sc.role == "phistar" else conjugate(ys)
        seq = sc.sequence_at(sc.ladder[-1])
        name = sc.name
    else:
        phistar = from_config(_need(cfg, "young"))
        seq = sequence_from_config(_need(cfg, "sequence"))
        name = seq.name
    cert = komlos_extract(seq, phistar, mode=cfg.get("mode", args.mode))
    d = cert.to_dict()
    rep.payload.update({"sequence": name, "certificate": d, "metric_trace": cert.as_convergence})
    tol = args.tol or 1e-9
    rep.check("order_bound_sound", cert.order_bound_sound(), cert.order_bound_norm)
    if cert.mode == "forward_convex":
        rep.check("forward_valid", cert.forward_valid(), None)
    bound = cfg.get("bound")
    if bound is None and name == "dyadic_spikes":
        bound = math.pi / math.sqrt(6.0)
    if bound is not None:
        rep.check("order_bound_norm", cert.order_bound_norm <= bound + tol, cert.order_bound_norm, bound)
    _write_csv(args.csv, ["step", "l0_gap"], enumerate(cert.as_convergence))


def _chains(xi, rng, count, steps, direction):
    out = []
    for _ in range(count):
        v = RandomVariable(xi.space, rng.uniform(0.0, 1.0, xi.space.size))
        sign = 1.0 if direction == "above" else -1.0
        out.append([xi + v * (sign * 2.0**-n) for n in range(steps)])
    return out


def cmd_risk(cfg, args, rep):
    u = risk.utility_from_config(_need(cfg, "utility"))
    pos_cfg = _need(cfg, "position")
    if isinstance(pos_cfg, str):
        pos_cfg = _load_config(pos_cfg)
    xi = rv_from_config(pos_cfg)
    dual = risk.dual_representation_check(u, xi, granularity=cfg.get("granularity"))
    rep.payload.update(dual.to_dict())
    tol = args.tol or 1e-8
    rep.check("dual_gap", abs(dual.gap) <= tol, dual.gap, tol)
    rng = np.random.default_rng(args.seed)
    n_chains = int(cfg.get("chains", 5))
    probes = {}
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        for direction, fn in (("above", risk.continuity_from_above), ("below", risk.continuity_from_below)):
            chains = _chains(xi, rng, n_chains, 45, direction)
            reports = list(pool.map(lambda c: fn(u, c, xi), chains))
            probes[direction] = {
                "passed": all(r.passed for r in reports),
                "final_errors": [float(r.errors[-1]) for r in reports],
                "min_sandwich_slack": float(min(r.sandwich_slack.min() for r in reports)),
            }
            rep.check(f"continuity_from_{direction}", probes[direction]["passed"], probes[direction]["min_sandwich_slack"])
    rep.payload["probe_results"] = probes


def _run_one(name, ladder):
    return gallery.run_scenario(name, ladder)


def cmd_scenario_list(cfg, args, rep):
    rep.payload["scenarios"] = [{"name": n, "description": gallery.build_scenario(n).description} for n in gallery.list_scenarios()]


def cmd_scenario_run(cfg, args, rep):
    names = gallery.list_scenarios() if args.name == "all" else [gallery.scenario_aliases().get(args.name, args.name)]
    for n in names:
        if n not in gallery.list_scenarios():
            raise ScenarioNotFound(n)
    ladder = _ladder(args)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda n: _run_one(n, ladder), names))
    results.sort(key=lambda r: r.name)
    rep.payload["scenarios"] = [r.to_dict() for r in results]
    rows = []
    for r in results:
        for v in r.results:
            rep.check(f"{r.name}:{v.check}" + ("" if v.depth is None else f"@{v.depth}"), v.passed, v.value, v.tol)
            rows.append([r.name, v.check, v.depth, v.expect, v.outcome, v.value])
    _write_csv(args.csv, ["scenario", "check", "depth", "expect", "outcome", "value"], rows)


# ----------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="override the default tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--ladder", default=None, help='comma-separated depths, e.g. "4,8,12"')
    common.add_argument("--csv", default=None, help="write a CSV trace here")

    p = _Parser(prog="orlicz-lab", description="Orlicz-space norms, conjugates, extraction certificates and risk duality on dyadic spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("norm", parents=[common], help="Luxemburg and dual norms").set_defaults(func=cmd_norm)
    sub.add_parser("conjugate", parents=[common], help="numeric conjugate vs closed form").set_defaults(func=cmd_conjugate)
    sub.add_parser("delta2", parents=[common], help="Delta2 index scan").set_defaults(func=cmd_delta2)
    verify = sub.add_parser("verify", help="inequality checks")
    vsub = verify.add_subparsers(dest="what", required=True, parser_class=_Parser)
    vsub.add_parser("q-estimate", parents=[common]).set_defaults(func=cmd_q_estimate)
    vsub.add_parser("cesaro", parents=[common]).set_defaults(func=cmd_cesaro)
    vsub.add_parser("holder", parents=[common]).set_defaults(func=cmd_holder)
    vsub.add_parser("ui", parents=[common]).set_defaults(func=cmd_ui)
    k = sub.add_parser("komlos", parents=[common], help="subsequence / convex-combination certificate")
    k.add_argument("--scenario", default=None)
    k.add_argument("--mode", default="forward_convex", choices=["forward_convex", "cesaro"])
    k.set_defaults(func=cmd_komlos)
    sub.add_parser("risk", parents=[common], help="utility value, dual gap and continuity probes").set_defaults(func=cmd_risk)
    sc = sub.add_parser("scenario", help="named scenarios")
    ssub = sc.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ssub.add_parser("list", parents=[common]).set_defaults(func=cmd_scenario_list)
    run = ssub.add_parser("run", parents=[common])
    run.add_argument("name", help='scenario name or "all"')
    run.set_defaults(func=cmd_scenario_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = " ".join(x for x in (args.command, getattr(args, "what", None), getattr(args, "action", None)) if x)
    try:
        cfg = _load_config(args.config)
        rep = RunReport(command, _digest(command, cfg, args))
        t0 = time.perf_counter()
        args.func(cfg, args, rep)
        rep.wall_time = time.perf_counter() - t0
    except ConfigError as exc:
        print(f"orlicz-lab: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScenarioNotFound as exc:
        print(f"orlicz-lab: unknown scenario {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except ConsistencyError as exc:
        print(f"orlicz-lab: consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (OrliczLabError, KeyError, ValueError) as exc:
        print(f"orlicz-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    text = json.dumps(rep.to_dict(), sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if rep.ok else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
