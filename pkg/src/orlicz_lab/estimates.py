"""Upper q-estimates and Cesàro bounds for disjointly supported families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError
from .norms import dual_orlicz_norm, luxemburg_norm
from .space import RandomVariable
from .young import Delta2Report, TruncatedPsi, YoungFunction, conjugate, delta2_index

__all__ = [
    "DisjointFamily",
    "QEstimateReport",
    "CesaroReport",
    "ForwardShift",
    "verify_upper_q_estimate",
    "cesaro_disjoint_bounds",
    "forward_convex_shift",
    "fit_decay_exponent",
    "pairing_trend",
    "psi_equivalence_ratios",
    "truncation_modular_bound",
]


class DisjointFamily:
    """Random variables with pairwise disjoint supports on one space."""

    def __init__(self, members: Sequence[RandomVariable]):
        if len(members) == 0:
            raise DomainError("a disjoint family needs at least one member")
        space = members[0].space
        if any(m.space != space for m in members):
            raise InvariantViolation("all members must live on the same space")
        stack = np.stack([m.values for m in members])
        supports = stack != 0
        if np.any(supports.sum(axis=0) > 1):
            raise InvariantViolation("members overlap: supports are not pairwise disjoint")
        self.members = list(members)
        self.supports = list(supports)
        self.space = space
        self._stack = stack

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def total(self, count: int | None = None) -> RandomVariable:
        n = len(self) if count is None else count
        return RandomVariable(self.space, self._stack[:n].sum(axis=0))

    def scaled(self, factors) -> "DisjointFamily":
        return DisjointFamily([m * float(f) for m, f in zip(self.members, factors)])


def _norms(members, phi, method, phistar):
    return np.array([dual_orlicz_norm(m, phi, method=method, phistar=phistar).value for m in members])


@dataclass(frozen=True)
class QEstimateReport:
    q: float
    lhs: float
    rhs_sum: float
    empirical_C: float
    declared_C: float | None
    member_norms: np.ndarray
    certifying_x0: float | None
    certifying_p: float | None

    @property
    def holds(self) -> bool:
        if self.declared_C is None:
            return math.isfinite(self.empirical_C)
        return self.lhs <= self.declared_C * self.rhs_sum * (1.0 + 1e-9)


def _check_q(phi: YoungFunction, q: float, report: Delta2Report | None) -> tuple[Delta2Report, float | None, float | None]:
    if q < 1.0:
        raise DomainError(f"q must be at least 1, got {q}")
    report = report or delta2_index(phi)
    if not report.is_delta2:
        raise PreconditionError("upper q-estimates need a doubling (Delta2) Young function")
    q_phi = report.q_phi
    pure_power = float(np.ptp(report.p_phi_of_x)) <= 1e-9
    if q > q_phi + 1e-9 or (q >= q_phi - 1e-9 and not pure_power):
        raise PreconditionError(f"q = {q} is outside [1, q_Phi) with q_Phi = {q_phi:.6g}")
    if q == 1.0:
        return report, float(report.x_grid[0]), math.inf
    p_needed = q / (q - 1.0)
    ok = np.flatnonzero(report.p_phi_of_x <= p_needed + 1e-9)
    if len(ok) == 0:
        return report, None, p_needed
    return report, float(report.x_grid[ok[0]]), p_needed


def verify_upper_q_estimate(
    fam: DisjointFamily,
    phi: YoungFunction,
    q: float,
    declared_C: float | None = None,
    method: str = "both",
    phistar: YoungFunction | None = None,
    delta2: Delta2Report | None = None,
    member_norms: np.ndarray | None = None,
) -> QEstimateReport:
    """Compare ``||sum xi_k||`` with ``(sum ||xi_k||^q)^(1/q)`` in the dual norm.

    ``q == q_Phi`` is accepted only for pure powers, where the elasticity is
    constant and the estimate holds with constant 1.
    """
    _, x0, p_cert = _check_q(phi, q, delta2)
    phistar = phistar or conjugate(phi)
    norms = _norms(fam.members, phi, method, phistar) if member_norms is None else np.asarray(member_norms)
    lhs = dual_orlicz_norm(fam.total(), phi, method=method, phistar=phistar).value
    rhs = float(np.sum(norms**q) ** (1.0 / q))
    emp = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return QEstimateReport(q, lhs, rhs, emp, declared_C, norms, x0, p_cert)


def fit_decay_exponent(ns, values) -> float:
    """Least-squares slope of ``log values`` against ``log n``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class CesaroReport:
    q: float
    mean_norms: np.ndarray
    fitted_exponent: float
    expected_exponent: float
    sup_identity_exact: bool
    sup_norm: float
    bound: float
    a: float
    C: float
    extras: dict = field(default_factory=dict)

    @property
    def within_bound(self) -> bool:
        return self.sup_norm <= self.bound * (1.0 + 1e-9)


def cesaro_disjoint_bounds(
    fam: DisjointFamily,
    phi: YoungFunction,
    q: float,
    C: float | None = None,
    N: int | None = None,
    method: str = "both",
    phistar: YoungFunction | None = None,
    delta2: Delta2Report | None = None,
) -> CesaroReport:
    """Decay of ``||(xi_1 + ... + xi_n)/n||`` and the bound on ``sup_n |mean_n|``.

    The sup over ``n <= N`` is evaluated atomwise from the running means and
    compared with ``sum_k |xi_k| / k``; for disjoint members both are the same
    floating-point numbers.  ``C`` defaults to the empirical q-estimate constant
    of the family ``(xi_k / k)``.
    """
    _check_q(phi, q, delta2)
    N = len(fam) if N is None else N
    if N > len(fam) or N < 1:
        raise DomainError(f"N = {N} outside 1..{len(fam)}")
    phistar = phistar or conjugate(phi)
    stack = fam._stack[:N]
    ks = np.arange(1, N + 1, dtype=float)
    running = np.cumsum(stack, axis=0) / ks[:, None]
    sup_means = np.max(np.abs(running), axis=0)
    identity = np.sum(np.abs(stack) / ks[:, None], axis=0)
    exact = bool(np.array_equal(sup_means, identity))
    space = fam.space
    mean_norms = np.array(
        [dual_orlicz_norm(RandomVariable(space, running[n]), phi, method=method, phistar=phistar).value for n in range(N)]
    )
    lo = max(1, N // 4)
    ns = np.arange(lo, N + 1)
    exponent = fit_decay_exponent(ns, mean_norms[lo - 1 :]) if N >= 4 else math.nan
    member_norms = _norms(fam.members[:N], phi, method, phistar)
    a = float(member_norms.max())
    sup_rv = RandomVariable(space, identity)
    sup_norm = dual_orlicz_norm(sup_rv, phi, method=method, phistar=phistar).value
    if C is None:
        scaled_norms = member_norms / ks
        rhs = float(np.sum(scaled_norms**q) ** (1.0 / q))
        C = sup_norm / rhs if rhs > 0 else 1.0
    bound = a * C * float(np.sum(ks**-q) ** (1.0 / q))
    return CesaroReport(
        q=q,
        mean_norms=mean_norms,
        fitted_exponent=exponent,
        expected_exponent=1.0 / q - 1.0,
        sup_identity_exact=exact,
        sup_norm=sup_norm,
        bound=bound,
        a=a,
        C=float(C),
        extras={"max_abs_identity_gap": float(np.max(np.abs(sup_means - identity)))},
    )


@dataclass(frozen=True)
class ForwardShift:
    """Blocks ``(xi_{n+1} + ... + xi_{2n}) / n`` for ``n = 1..n_max``."""

    terms: list
    weights: np.ndarray  # row n-1 holds the weights on xi_1..xi_{2 n_max}
    identity_exact: bool

    def is_forward(self) -> bool:
        w = self.weights
        rows_ok = np.allclose(w.sum(axis=1), 1.0, atol=1e-12) and np.all(w >= 0)
        cols = np.arange(1, w.shape[1] + 1)
        tail_ok = all(np.all(w[n - 1, cols <= n] == 0) for n in range(1, w.shape[0] + 1))
        return bool(rows_ok and tail_ok)


def forward_convex_shift(fam: DisjointFamily, n_max: int | None = None) -> ForwardShift:
    """Shifted Cesàro blocks, checked against ``2 mean(1..2n) - mean(1..n)``."""
    m = len(fam)
    n_max = m // 2 if n_max is None else n_max
    if n_max < 1 or 2 * n_max > m:
        raise DomainError(f"need {2 * n_max} members for {n_max} shifted blocks, have {m}")
    stack = fam._stack
    cums = np.cumsum(stack[: 2 * n_max], axis=0)
    terms, exact = [], True
    weights = np.zeros((n_max, 2 * n_max))
    for n in range(1, n_max + 1):
        block = stack[n : 2 * n].sum(axis=0) / n
        other = 2.0 * (cums[2 * n - 1] / (2 * n)) - cums[n - 1] / n
        exact &= bool(np.array_equal(block, other))
        weights[n - 1, n : 2 * n] = 1.0 / n
        terms.append(RandomVariable(fam.space, block))
    return ForwardShift(terms, weights, exact)


def pairing_trend(sequence: Sequence[RandomVariable], etas: Sequence[RandomVariable]) -> np.ndarray:
    """Matrix of ``E[eta_j xi_n]`` (rows: test functions, columns: n)."""
    return np.array([[(eta * x).expect() for x in sequence] for eta in etas])


def psi_equivalence_ratios(
    xs: Sequence[RandomVariable], psi: TruncatedPsi, psi_star: YoungFunction | None = None, phistar: YoungFunction | None = None
) -> np.ndarray:
    """``||xi||_(Phi*) / ||xi||_(Psi*)`` over fixtures (should stay in a bounded band)."""
    psi_star = psi_star or conjugate(psi.young, method="numeric")
    phistar = phistar or conjugate(psi.base)
    out = []
    for x in xs:
        a = dual_orlicz_norm(x, psi.base, phistar=phistar).value
        b = dual_orlicz_norm(x, psi.young, phistar=psi_star).value
        out.append(a / b if b > 0 else math.nan)
    return np.array(out)


def truncation_modular_bound(psi: TruncatedPsi, eta: RandomVariable) -> tuple[float, float]:
    """``(||eta||_Psi, E[Psi(eta)]^(1/p))``; the first is at most the second when ``||eta||_Psi <= 1``."""
    norm = luxemburg_norm(eta, psi.young).value
    if norm > 1.0 + 1e-12:
        raise DomainError(f"bound applies to the unit ball; ||eta||_Psi = {norm}")
    return norm, eta.expect(psi.young) ** (1.0 / psi.p)
