"""Monetary utility functions on finite spaces: penalties, duality, continuity.

A monetary utility ``u`` is concave, cash invariant (``u(xi + a) = u(xi) + a``)
and normalised (``u(0) = 0``).  Its penalty is
``c(Q) = sup_xi (u(xi) - E_Q[xi])`` and ``u(xi) = inf_Q (E_Q[xi] + c(Q))``.
Densities ``dQ/dP`` are random variables on the same space.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ConsistencyError, DomainError, PreconditionError
from .komlos import KomlosCertificate, RvSequence, komlos_extract
from .norms import luxemburg_norm
from .space import RandomVariable
from .young import YoungFunction

__all__ = [
    "MonetaryUtility",
    "PenaltyResult",
    "DualReport",
    "ChainReport",
    "MonotonicityReport",
    "ConvexSetProbe",
    "ClosureReport",
    "entropic",
    "ess_inf",
    "average_value_at_risk",
    "expectation",
    "utility_from_config",
    "penalty",
    "dual_representation_check",
    "simplex_mesh",
    "continuity_from_above",
    "continuity_from_below",
    "monotonicity_check",
    "usc_sequence_check",
    "norm_ball",
    "acceptance_set",
    "half_space",
    "closure_certificate",
    "closure_examples",
]


@dataclass(frozen=True)
class MonetaryUtility:
    """Value oracle plus optional closed-form penalty and supergradient.

    ``gradient(xi)`` returns a density ``d`` with ``u(xi + h) <= u(xi) + E[d h]``.
    """

    evaluate: Callable[[RandomVariable], float]
    name: str
    closed_form_penalty: Callable[[RandomVariable], float] | None = None
    gradient: Callable[[RandomVariable], np.ndarray] | None = None
    params: Mapping = field(default_factory=dict)

    def __call__(self, xi: RandomVariable) -> float:
        return float(self.evaluate(xi))


def _check_density(d: RandomVariable, tol: float = 1e-9) -> None:
    pos = d.space.positive
    if np.any(d.values[pos] < -tol):
        raise DomainError("density must be nonnegative")
    if abs(d.expect() - 1.0) > tol:
        raise DomainError(f"density must integrate to 1, got {d.expect()!r}")


def entropic(gamma: float = 1.0) -> MonetaryUtility:
    """``u(xi) = -(1/gamma) log E[exp(-gamma xi)]``; penalty is relative entropy over ``gamma``."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")

    def evaluate(xi):
        pos = xi.space.positive
        v = xi.values[pos]
        m = float(v.min())
        s = math.fsum(xi.space.weights[pos] * np.exp(-gamma * (v - m)))
        return m - math.log(s) / gamma

    def grad(xi):
        pos = xi.space.positive
        v = xi.values
        e = np.where(pos, np.exp(-gamma * (v - v[pos].min())), 0.0)
        return e / math.fsum(xi.space.weights * e)

    def pen(d):
        _check_density(d)
        v = np.maximum(d.values, 0.0)
        return d.expect(lambda x: np.where(x > 0, np.maximum(x, 0) * np.log(np.where(x > 0, x, 1.0)), 0.0)) / gamma if np.any(v > 0) else 0.0

    return MonetaryUtility(evaluate, "entropic", pen, grad, {"gamma": gamma})


def ess_inf() -> MonetaryUtility:
    """Worst case over atoms of positive probability; every density has penalty 0."""

    def grad(xi):
        pos = xi.space.positive
        i = np.flatnonzero(pos)[np.argmin(xi.values[pos])]
        d = np.zeros(xi.space.size)
        d[i] = 1.0 / xi.space.weights[i]
        return d

    def pen(d):
        _check_density(d)
        return 0.0

    return MonetaryUtility(lambda xi: xi.ess_min(), "ess_inf", pen, grad)


def average_value_at_risk(alpha: float) -> MonetaryUtility:
    """Mean of the worst ``alpha`` fraction; penalty 0 on ``dQ/dP <= 1/alpha``, infinite elsewhere."""
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")

    def density(xi):
        pos = np.flatnonzero(xi.space.positive)
        order = pos[np.argsort(xi.values[pos], kind="stable")]
        d = np.zeros(xi.space.size)
        left = alpha
        for i in order:
            p = xi.space.weights[i]
            take = min(p, left)
            d[i] = take / (alpha * p)
            left -= take
            if left <= 0:
                break
        return d

    def evaluate(xi):
        return math.fsum(xi.space.weights * density(xi) * xi.values)

    def pen(d):
        _check_density(d)
        return 0.0 if np.all(d.values[d.space.positive] <= 1.0 / alpha + 1e-12) else math.inf

    return MonetaryUtility(evaluate, f"average_value_at_risk({alpha:g})", pen, density, {"alpha": alpha})


def expectation() -> MonetaryUtility:
    """``u(xi) = E[xi]``; only ``Q = P`` has finite penalty."""

    def pen(d):
        _check_density(d)
        return 0.0 if np.allclose(d.values[d.space.positive], 1.0, atol=1e-12) else math.inf

    return MonetaryUtility(lambda xi: xi.expect(), "expectation", pen, lambda xi: np.ones(xi.space.size))


def utility_from_config(entry: Mapping) -> MonetaryUtility:
    name = entry.get("name")
    params = dict(entry.get("params", {}))
    if name == "entropic":
        return entropic(params.get("gamma", 1.0))
    if name == "ess_inf":
        return ess_inf()
    if name in ("average_value_at_risk", "avar"):
        return average_value_at_risk(params["alpha"])
    if name == "expectation":
        return expectation()
    raise DomainError(f"unknown utility {name!r}")


# ----------------------------------------------------------------------------
# penalty and duality


@dataclass(frozen=True)
class PenaltyResult:
    value: float
    closed_form: float | None
    direction: np.ndarray | None = None
    argmax: np.ndarray | None = None

    def __float__(self) -> float:
        return self.value


def _objective(u: MonetaryUtility, d: RandomVariable):
    space = d.space
    pos = np.flatnonzero(space.positive)
    p = space.weights[pos]
    dq = d.values[pos]

    def full(x):
        v = np.zeros(space.size)
        v[pos] = x
        return RandomVariable(space, v)

    def f(x):
        return u(full(x)) - math.fsum(p * dq * x)

    def g(x):
        return p * (u.gradient(full(x))[pos] - dq)

    return f, (g if u.gradient is not None else None), pos


def penalty(u: MonetaryUtility, density: RandomVariable, starts: int = 6, seed: int = 0, tol: float = 1e-8) -> PenaltyResult:
    """``sup_xi (u(xi) - E_Q[xi])`` by multi-start quasi-Newton ascent.

    Unbounded ascent is detected by probing the coordinate directions and
    the best start's direction at growing scales; the result is then
    ``+inf`` together with the diverging direction.
    """
    _check_density(density)
    f, g, pos = _objective(u, density)
    n = len(pos)
    scale = 10.0 ** np.array([2.0, 4.0, 6.0])
    dirs = [s * e for e in np.eye(n) for s in (-1.0, 1.0)]
    base = f(np.zeros(n))
    for v in dirs:
        vals = [f(t * v) for t in scale]
        slope = (vals[2] - vals[1]) / (scale[2] - scale[1])
        if vals[2] > vals[1] > vals[0] > base and slope > 1e-9:
            return PenaltyResult(math.inf, _closed(u, density), direction=v)
    rng = np.random.default_rng(seed)
    best_val, best_x = -math.inf, None
    x0s = [np.zeros(n)] + [rng.normal(size=n) for _ in range(starts - 1)]
    for x0 in x0s:
        res = minimize(lambda x: -f(x), x0, jac=(lambda x: -g(x)) if g else None, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        val = f(res.x)
        if val > best_val:
            best_val, best_x = val, res.x
    # a last check along the optimiser's own direction
    if best_x is not None and np.linalg.norm(best_x - best_x.mean()) > 0:
        v = best_x - best_x.mean()
        v = v / np.linalg.norm(v)
        vals = [f(best_x + t * v) for t in scale]
        if vals[2] > vals[1] > vals[0] > best_val and (vals[2] - vals[1]) / (scale[2] - scale[1]) > 1e-9:
            return PenaltyResult(math.inf, _closed(u, density), direction=v)
    closed = _closed(u, density)
    if closed is not None and math.isfinite(closed) and best_val > closed + max(tol, 1e-6) * max(1.0, abs(closed)):
        raise ConsistencyError(f"numeric penalty {best_val!r} exceeds closed form {closed!r}")
    return PenaltyResult(max(best_val, 0.0) if abs(best_val) < 1e-14 else best_val, closed, argmax=best_x)


def _closed(u, density):
    return None if u.closed_form_penalty is None else float(u.closed_form_penalty(density))


def simplex_mesh(space, granularity: int) -> list:
    """Densities ``d_i = m_i / (granularity p_i)`` over compositions ``m`` of ``granularity``."""
    pos = np.flatnonzero(space.positive)
    n = len(pos)
    out = []
    for cuts in itertools.combinations(range(granularity + n - 1), n - 1):
        parts = np.diff(np.concatenate([[-1], cuts, [granularity + n - 1]])) - 1
        d = np.zeros(space.size)
        d[pos] = parts / (granularity * space.weights[pos])
        out.append(RandomVariable(space, d))
    return out


@dataclass(frozen=True)
class DualReport:
    value: float
    dual_value: float
    gap: float
    optimizer_density: RandomVariable
    penalties: list
    densities_checked: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "dual_value": self.dual_value,
            "dual_gap": self.gap,
            "optimizer_density": self.optimizer_density.values.tolist(),
            "densities_checked": self.densities_checked,
        }


def _kkt_density(u: MonetaryUtility, xi: RandomVariable, h: float = 1e-6) -> RandomVariable:
    if u.gradient is not None:
        return RandomVariable(xi.space, u.gradient(xi))
    pos = np.flatnonzero(xi.space.positive)
    base = u(xi)
    d = np.zeros(xi.space.size)
    for i in pos:
        bump = np.zeros(xi.space.size)
        bump[i] = -h
        # one-sided difference downwards: a supergradient of a concave function
        d[i] = (base - u(xi + bump)) / (h * xi.space.weights[i])
    d = np.maximum(d, 0.0)
    return RandomVariable(xi.space, d / math.fsum(xi.space.weights * d))


def dual_representation_check(
    u: MonetaryUtility,
    xi: RandomVariable,
    density_family: Sequence[RandomVariable] | None = None,
    granularity: int | None = None,
    penalty_source: str = "auto",
    tol: float = 1e-8,
) -> DualReport:
    """``inf_Q (E_Q[xi] + c(Q)) - u(xi)`` over the KKT density, a simplex mesh and any given densities.

    ``penalty_source`` picks closed-form penalties (``"closed"``), the
    numeric ascent (``"numeric"``), or closed form when available (``"auto"``).
    A gap below ``-tol`` means the representation is violated.
    """
    value = u(xi)
    densities = [_kkt_density(u, xi)]
    if density_family:
        densities.extend(density_family)
    n_pos = int(xi.space.positive.sum())
    if granularity is None:
        granularity = 4 if n_pos <= 8 else 1
    densities.extend(simplex_mesh(xi.space, granularity))
    terms, pens = [], []
    for d in densities:
        if penalty_source == "numeric" or (penalty_source == "auto" and u.closed_form_penalty is None):
            c = penalty(u, d).value
        else:
            if u.closed_form_penalty is None:
                raise PreconditionError(f"{u.name} has no closed-form penalty")
            c = float(u.closed_form_penalty(d))
        pens.append(c)
        terms.append((d * xi).expect() + c)
    i = int(np.argmin(terms))
    gap = terms[i] - value
    if gap < -tol * max(1.0, abs(value)):
        raise ConsistencyError(f"dual value {terms[i]!r} below u(xi) = {value!r}: representation violated")
    return DualReport(value, terms[i], gap, densities[i], pens, len(densities))


# ----------------------------------------------------------------------------
# continuity and monotonicity


@dataclass(frozen=True)
class ChainReport:
    direction: str
    values: np.ndarray
    limit_value: float
    errors: np.ndarray
    sup_distances: np.ndarray
    monotone_values: bool
    errors_nonincreasing: bool
    lipschitz_ok: bool
    converged: bool
    sandwich_slack: np.ndarray

    @property
    def passed(self) -> bool:
        return self.monotone_values and self.errors_nonincreasing and self.lipschitz_ok and self.converged and bool(
            np.all(self.sandwich_slack >= -1e-9)
        )


def _chain(u, chain, limit, direction, final_tol, tol):
    if len(chain) == 0:
        raise DomainError("empty chain")
    stack = np.stack([c.values for c in chain])
    pos = chain[0].space.positive
    steps = np.diff(stack[:, pos], axis=0)
    if direction == "above" and np.any(steps > 0):
        raise DomainError("chain is not atomwise nonincreasing")
    if direction == "below" and np.any(steps < 0):
        raise DomainError("chain is not atomwise nondecreasing")
    if limit is None:
        lim_vals = stack.min(axis=0) if direction == "above" else stack.max(axis=0)
        limit = RandomVariable(chain[0].space, lim_vals)
    bad = (stack[:, pos] < limit.values[pos] - tol) if direction == "above" else (stack[:, pos] > limit.values[pos] + tol)
    if np.any(bad):
        raise DomainError("limit is not an atomwise bound of the chain")
    vals = np.array([u(c) for c in chain])
    lim_val = u(limit)
    errors = np.abs(vals - lim_val)
    dist = np.array([float(np.max(np.abs(c.values - limit.values)[pos])) for c in chain])
    dv = np.diff(vals)
    monotone = bool(np.all(dv <= tol) if direction == "above" else np.all(dv >= -tol))
    nonincreasing = bool(np.all(np.diff(errors) <= tol))
    lipschitz = bool(np.all(errors <= dist + tol))
    # concavity sandwich u(xi) >= (u(xi_n) + u(2 xi - xi_n)) / 2
    slack = np.array([lim_val - 0.5 * (v + u(2.0 * limit - c)) for v, c in zip(vals, chain)])
    return ChainReport(direction, vals, lim_val, errors, dist, monotone, nonincreasing, lipschitz, bool(errors[-1] <= final_tol), slack)


def continuity_from_above(u: MonetaryUtility, chain: Sequence[RandomVariable], limit: RandomVariable | None = None, final_tol: float = 1e-6, tol: float = 1e-12) -> ChainReport:
    """Probe ``xi_n`` decreasing to ``xi`` implies ``u(xi_n) -> u(xi)``."""
    return _chain(u, chain, limit, "above", final_tol, tol)


def continuity_from_below(u: MonetaryUtility, chain: Sequence[RandomVariable], limit: RandomVariable | None = None, final_tol: float = 1e-6, tol: float = 1e-12) -> ChainReport:
    """Probe ``xi_n`` increasing to ``xi`` implies ``u(xi_n) -> u(xi)``, with the concavity sandwich."""
    return _chain(u, chain, limit, "below", final_tol, tol)


@dataclass(frozen=True)
class MonotonicityReport:
    violations: list
    margins: np.ndarray

    @property
    def passed(self) -> bool:
        return not self.violations


def monotonicity_check(u: MonetaryUtility, pairs: Sequence[tuple], tol: float = 1e-12) -> MonotonicityReport:
    """``xi <= eta`` atomwise implies ``u(xi) <= u(eta)``."""
    violations, margins = [], []
    for i, (xi, eta) in enumerate(pairs):
        if not xi <= eta:
            raise DomainError(f"pair {i} is not atomwise ordered")
        m = u(eta) - u(xi)
        margins.append(m)
        if m < -tol:
            violations.append(i)
    return MonotonicityReport(violations, np.array(margins))


def usc_sequence_check(u: MonetaryUtility, seq: Sequence[RandomVariable], limit: RandomVariable, tail: int | None = None, tol: float = 1e-9) -> tuple[bool, float, float]:
    """``u(xi) >= limsup u(xi_n)`` along an order-bounded, atomwise convergent sequence."""
    vals = np.array([u(x) for x in seq])
    tail = max(1, len(vals) // 4) if tail is None else tail
    limsup = float(np.max(vals[-tail:]))
    lv = u(limit)
    return lv >= limsup - tol, lv, limsup


# ----------------------------------------------------------------------------
# closure certificates


@dataclass(frozen=True)
class ConvexSetProbe:
    membership: Callable[[RandomVariable], bool]
    description: str

    def __call__(self, xi: RandomVariable) -> bool:
        return bool(self.membership(xi))

    def spot_check(self, members: Sequence[RandomVariable], trials: int = 20, seed: int = 0) -> bool:
        """Random convex combinations of member pairs stay members."""
        rng = np.random.default_rng(seed)
        if len(members) < 2:
            return True
        for _ in range(trials):
            i, j = rng.choice(len(members), 2, replace=False)
            t = rng.uniform()
            if not self(members[i] * t + members[j] * (1.0 - t)):
                return False
        return True


def norm_ball(phistar: YoungFunction, radius: float, tol: float = 1e-9) -> ConvexSetProbe:
    return ConvexSetProbe(lambda x: luxemburg_norm(x, phistar).value <= radius * (1.0 + tol), f"Luxemburg ball of radius {radius:g}")


def acceptance_set(u: MonetaryUtility, level: float = 0.0, tol: float = 1e-12) -> ConvexSetProbe:
    return ConvexSetProbe(lambda x: u(x) >= level - tol, f"{{{u.name} >= {level:g}}}")


def half_space(eta: RandomVariable, eps: float, tol: float = 1e-12) -> ConvexSetProbe:
    return ConvexSetProbe(lambda x: (eta * x).expect() >= eps - tol, f"{{E[eta xi] >= {eps:g}}}")


@dataclass(frozen=True)
class ClosureReport:
    members_in_C: bool
    combos_in_C: bool
    limit_in_interval: bool
    limit_in_C: bool
    bound_norm: float
    verdict: str
    certificate: KomlosCertificate

    def to_dict(self) -> dict:
        return {
            "members_in_C": self.members_in_C,
            "combos_in_C": self.combos_in_C,
            "limit_in_interval": self.limit_in_interval,
            "limit_in_C": self.limit_in_C,
            "bound_norm": self.bound_norm,
            "verdict": self.verdict,
            "certificate_complete": self.certificate.complete,
        }


def closure_certificate(C: ConvexSetProbe, seq: RvSequence, phistar: YoungFunction, interval_tol: float = 1e-9, **kwargs) -> ClosureReport:
    """Run the forward-convex extraction and check what survives in ``C``.

    Verdicts: ``"closed"`` (combinations and limit in ``C``, limit in the
    order interval of the bound), ``"limit_outside"`` (the limit leaves
    ``C``), ``"convexity_violation"`` (a combination left ``C``).
    """
    members_ok = all(C(x) for x in seq.terms)
    if not members_ok:
        raise PreconditionError("every sequence member must belong to C")
    cert = komlos_extract(seq, phistar, mode="forward_convex", **kwargs)
    combos_ok = all(C(c) for c in cert.combinations)
    zeta = cert.order_bound.values
    in_interval = bool(np.all((np.abs(cert.limit.values) <= zeta + interval_tol * (1.0 + zeta))[seq.space.positive]))
    limit_ok = C(cert.limit)
    if not combos_ok:
        verdict = "convexity_violation"
    elif not limit_ok:
        verdict = "limit_outside"
    else:
        verdict = "closed" if in_interval else "limit_outside_interval"
    return ClosureReport(members_ok, combos_ok, in_interval, limit_ok, cert.order_bound_norm, verdict, cert)


def closure_examples() -> dict:
    """Three reference closure problems: ``name -> (C, seq, phistar, expected verdict)``.

    ``ball``: a noisy sequence converging inside the unit ball of ``L2``.
    ``acceptance``: acceptable positions for the entropic utility carrying
    positive spikes that vanish in probability.
    ``half_space``: unit ``L2`` spikes on disjoint dyadic blocks, all paired to
    ``eps`` by a test function that blows up on small blocks; the limit 0 is
    not in the half-space.
    """
    from .komlos import SEQUENCE_GENERATORS
    from .space import DyadicSpace, dyadic_block
    from .young import power

    l2 = power(2.0)
    out = {}

    space = DyadicSpace(6)
    rng = np.random.default_rng(3)
    b = rng.uniform(-1.0, 1.0, space.size)
    b = RandomVariable(space, 0.5 * b / math.sqrt(float(np.mean(b**2))))
    g = rng.standard_normal((64, space.size))
    terms = [b + RandomVariable(space, 0.2 * 2.0**-n * g[n - 1]) for n in range(1, 65)]
    out["ball"] = (norm_ball(l2, 1.0), RvSequence(terms, norm_bound=1.0, limit=b, name="ball_sequence", p_convergent=True), l2, "closed")

    seq = SEQUENCE_GENERATORS["mixed_spikes"]({"depth": 8, "count": 128, "seed": 5, "offset": 0.5, "amplitude": 0.3, "noise": 0.1})
    out["acceptance"] = (acceptance_set(entropic(), 0.0), seq, l2, "closed")

    depth, eps = 12, 0.5
    space = DyadicSpace(depth)
    eta = np.zeros(space.size)
    for j in range(1, depth + 1):
        mask = dyadic_block(space, j)
        eta[mask] = eps * 2.0 ** (j / 2.0)
    seq = SEQUENCE_GENERATORS["dyadic_spikes"]({"depth": depth})
    out["half_space"] = (half_space(RandomVariable(space, eta), eps, tol=1e-12), seq, l2, "limit_outside")
    return out
