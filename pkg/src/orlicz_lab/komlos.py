"""Komlós-type extraction with order-bound certificates.

Pipeline for ``komlos_extract``:

1. stabilisation: if the tail of the sequence is not yet Cauchy in
   probability, replace it by forward block means ``mean(xi_j..xi_2j)``;
2. limit estimate: atomwise median of the trailing half;
3. centring and normalisation so that ``E[Phi*(zeta_n)] <= 1``;
4. Kadec-Pełczyński split into a regular and a disjointly supported part;
5. order-bounded subsequence of the regular part;
6. recombination: Cesàro means or forward block means of the subsequence.

Every stage is logged; when a stage cannot be certified on the realised
prefix the certificate is returned with ``complete=False`` and the stage named.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError
from .norms import dual_orlicz_norm, luxemburg_norm
from .space import DyadicSpace, RandomVariable, dyadic_block, l0_metric, ui_modulus
from .young import YoungFunction, conjugate, delta2_index

__all__ = [
    "RvSequence",
    "KpSplit",
    "KomlosCertificate",
    "NonDelta2Report",
    "kp_split",
    "order_bounded_subsequence",
    "komlos_extract",
    "non_delta2_counterexample",
    "pairing_trace",
    "sequence_from_config",
    "SEQUENCE_GENERATORS",
]


@dataclass
class RvSequence:
    """Finite prefix of a sequence of random variables on one space."""

    terms: list
    norm_bound: float | None = None
    limit: RandomVariable | None = None
    name: str = "sequence"
    p_convergent: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.terms) == 0:
            raise DomainError("a sequence needs at least one realised term")
        space = self.terms[0].space
        if any(t.space != space for t in self.terms):
            raise InvariantViolation("all terms must live on a common space")

    @classmethod
    def from_generator(cls, gen: Callable[[int], RandomVariable], count: int, **kwargs) -> "RvSequence":
        return cls([gen(n) for n in range(1, count + 1)], **kwargs)

    @property
    def space(self) -> DyadicSpace:
        return self.terms[0].space

    @property
    def prefix_len(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def stack(self) -> np.ndarray:
        return np.stack([t.values for t in self.terms])

    def verify_norm_bound(self, phistar: YoungFunction, tol: float = 1e-9) -> tuple[bool, float]:
        """Check ``sup_n ||xi_n||_Phi* <= norm_bound`` on the prefix."""
        worst = max(luxemburg_norm(t, phistar).value for t in self.terms)
        if self.norm_bound is None:
            return True, worst
        return worst <= self.norm_bound * (1.0 + tol) + tol, worst


# ----------------------------------------------------------------------------
# certificates


@dataclass
class KpSplit:
    indices: list
    sets: list
    thresholds: list
    regular: list
    singular: list
    ui_levels: np.ndarray
    ui_profile: np.ndarray
    levels_needed: int
    complete: bool

    def reconstructs(self, terms: Sequence[RandomVariable]) -> bool:
        return all(np.array_equal((r + s).values, t.values) for r, s, t in zip(self.regular, self.singular, terms))

    def sets_disjoint(self) -> bool:
        if not self.sets:
            return True
        return bool(np.all(np.sum(np.stack(self.sets), axis=0) <= 1))


@dataclass
class KomlosCertificate:
    """Selected indices, combination weights, limit and order bound.

    ``weights[r, c]`` is the weight of original term ``c`` (0-based) in
    combination ``r``; forward combinations have row ``r`` supported on
    columns ``>= r``.
    """

    mode: str
    indices: list
    weights: np.ndarray
    combinations: list
    limit: RandomVariable
    order_bound: RandomVariable
    order_bound_norm: float
    as_convergence: np.ndarray
    stage_log: list
    analytic_bound: RandomVariable | None = None
    complete: bool = True
    failed_stage: str | None = None
    extras: dict = field(default_factory=dict)

    def forward_valid(self, tol: float = 1e-12) -> bool:
        w = self.weights
        if w.size == 0:
            return False
        if np.any(w < -tol) or not np.allclose(w.sum(axis=1), 1.0, atol=tol):
            return False
        cols = np.arange(w.shape[1])
        return all(np.all(np.abs(w[r, cols < r]) <= tol) for r in range(w.shape[0]))

    def order_bound_sound(self, tol: float = 1e-12) -> bool:
        eta = self.order_bound.values
        return all(np.all(np.abs(c.values) <= eta + tol * (1.0 + eta)) for c in self.combinations)

    def analytic_bound_sound(self, tol: float = 1e-9) -> bool:
        if self.analytic_bound is None:
            return True
        b = self.analytic_bound.values
        return bool(np.all(self.order_bound.values <= b + tol * (1.0 + b)))

    def converged(self, tol: float) -> bool:
        return len(self.as_convergence) > 0 and float(self.as_convergence[-1]) <= tol

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "indices": [int(i) for i in self.indices],
            "weights": [[float(x) for x in row] for row in self.weights],
            "limit": self.limit.values.tolist(),
            "order_bound_norm": self.order_bound_norm,
            "metric_trace": [float(x) for x in self.as_convergence],
            "stage_log": self.stage_log,
            "complete": self.complete,
            "failed_stage": self.failed_stage,
            "forward_valid": self.forward_valid(),
            "extras": {k: v for k, v in self.extras.items() if isinstance(v, (int, float, str, bool, list, type(None)))},
        }


# ----------------------------------------------------------------------------
# Kadec-Pełczyński split


def _threshold(f: np.ndarray, w: np.ndarray, budget: float) -> float:
    """Smallest value ``M`` of ``f`` with ``P(f > M) <= budget``."""
    pos = w > 0
    f, w = f[pos], w[pos]
    vals, inv = np.unique(f, return_inverse=True)
    mass = np.bincount(inv, weights=w, minlength=len(vals))
    greater = np.concatenate([np.cumsum(mass[::-1])[::-1][1:], [0.0]])
    ok = np.flatnonzero(greater <= budget + 1e-15)
    return float(vals[ok[0]])


def kp_split(seq, phistar: YoungFunction, tol: float = 1e-9, ui_levels=None) -> KpSplit:
    """Split ``zeta_k = zeta_k 1{A_k^c} + zeta_k 1{A_k}`` with ``P(A_k) <= 2^-k``.

    ``A_k = {Phi*(zeta_k) > M_k}`` with ``M_k`` the smallest threshold meeting
    the budget, minus the earlier sets.  The split is complete once the
    budget has fallen below the smallest atom (the resolution limit).
    """
    terms = list(seq.terms if isinstance(seq, RvSequence) else seq)
    space = terms[0].space
    w = space.weights
    with np.errstate(over="ignore"):
        fvals = [np.asarray(phistar(t.values), dtype=float) for t in terms]
    mods = [t.expect(phistar) for t in terms]
    if max(mods) > 1.0 + tol:
        raise PreconditionError(f"normalise first: max E[Phi*(xi_n)] = {max(mods):.6g} > 1")
    used = np.zeros(space.size, dtype=bool)
    sets, thresholds, regular, singular = [], [], [], []
    for k, (t, f) in enumerate(zip(terms, fvals), start=1):
        M = _threshold(f, w, 2.0**-k)
        A = (f > M) & space.positive & ~used
        used |= A
        sets.append(A)
        thresholds.append(M)
        regular.append(RandomVariable(space, np.where(A, 0.0, t.values)))
        singular.append(RandomVariable(space, np.where(A, t.values, 0.0)))
    min_w = float(w[space.positive].min())
    needed = max(1, math.ceil(-math.log2(min_w)))
    fam = [r.apply(lambda v: np.asarray(phistar(v), dtype=float)) for r in regular]
    top = max(float(np.max(f.values)) for f in fam)
    if ui_levels is None:
        ui_levels = np.geomspace(1.0, max(top, 2.0), 12)
    one = RandomVariable(space, np.ones(space.size))
    profile = np.array([ui_modulus(fam, one, N) for N in ui_levels])
    return KpSplit(
        indices=list(range(len(terms))),
        sets=sets,
        thresholds=thresholds,
        regular=regular,
        singular=singular,
        ui_levels=np.asarray(ui_levels),
        ui_profile=profile,
        levels_needed=needed,
        complete=len(terms) >= needed,
    )


# ----------------------------------------------------------------------------
# order-bounded subsequence


def order_bounded_subsequence(
    seq,
    phistar: YoungFunction,
    budget: float = 1.0,
    l0_tol: float = 0.1,
) -> KomlosCertificate:
    """Pick ``n_k`` with ``E[Phi*(xi_{n_k})] <= budget 2^-k``.

    The certificate records ``E[Phi*(sup_k |xi_{n_k}|)]`` next to
    ``sum_k E[Phi*(xi_{n_k})]``; the first never exceeds the second because
    ``Phi*(|a| v |b|) <= Phi*(a) + Phi*(b)`` atom by atom.
    """
    terms = list(seq.terms if isinstance(seq, RvSequence) else seq)
    space = terms[0].space
    zero = RandomVariable(space, np.zeros(space.size))
    with np.errstate(over="ignore"):
        mods = np.array([t.expect(phistar) for t in terms])
    l0 = np.array([l0_metric(t, zero) for t in terms])
    tail = l0[-max(1, len(l0) // 4) :]
    log = [{"stage": "hypotheses", "l0_tail_min": float(tail.min()), "modular_min": float(mods.min())}]
    selected = []
    k = 1
    for n, m in enumerate(mods):
        if m <= budget * 2.0**-k:
            selected.append(n)
            k += 1
    hyp_ok = float(tail.min()) <= l0_tol and len(selected) > 0
    if not selected:
        eta = zero
    else:
        eta = RandomVariable(space, np.max(np.abs(np.stack([terms[n].values for n in selected])), axis=0))
    mod_sup = eta.expect(phistar)
    sum_mods = math.fsum(mods[selected]) if selected else 0.0
    inequality = mod_sup <= sum_mods * (1.0 + 1e-12) + 1e-300 and sum_mods <= budget * (1.0 + 1e-12)
    log.append({"stage": "selection", "selected": len(selected), "sum_modulars": sum_mods, "modular_of_sup": mod_sup})
    weights = np.zeros((len(selected), len(terms)))
    for r, n in enumerate(selected):
        weights[r, n] = 1.0
    failed = None if hyp_ok else "hypotheses"
    if hyp_ok and not inequality:
        failed = "selection"
    return KomlosCertificate(
        mode="subsequence",
        indices=selected,
        weights=weights,
        combinations=[terms[n] for n in selected],
        limit=zero,
        order_bound=eta,
        order_bound_norm=luxemburg_norm(eta, phistar).value,
        as_convergence=l0[selected] if selected else np.array([]),
        stage_log=log,
        complete=failed is None,
        failed_stage=failed,
        extras={"modular_of_sup": mod_sup, "sum_modulars": sum_mods, "budget": budget, "certified": bool(inequality)},
    )


# ----------------------------------------------------------------------------
# full extraction


def _tail_cauchy(stack: np.ndarray, w: np.ndarray) -> float:
    """Largest pairwise ``l0`` distance within the last quarter of the rows."""
    tail = stack[-max(2, len(stack) // 4) :]
    worst = 0.0
    for i in range(len(tail) - 1):
        d = np.minimum(np.abs(tail[i + 1 :] - tail[i]), 1.0) @ w
        worst = max(worst, float(d.max()))
    return worst


def _forward_blocks(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``j`` (1-based) become ``mean(rows j..2j)``; weights against the input rows."""
    m = len(stack)
    count = m // 2
    W = np.zeros((count, m))
    for j in range(1, count + 1):
        W[j - 1, j - 1 : 2 * j] = 1.0 / (j + 1)
    return W @ stack, W


def _geometric_blocks(count: int) -> list:
    """Consecutive blocks of lengths 2, 4, 8, ... fitting in ``count`` positions."""
    blocks, start, length = [], 0, 2
    while start + length <= count:
        blocks.append(np.arange(start, start + length))
        start += length
        length *= 2
    return blocks


def komlos_extract(
    seq: RvSequence,
    phistar: YoungFunction,
    mode: str = "forward_convex",
    l0_tol: float = 1e-2,
    conv_tol: float = 1e-3,
    max_rounds: int = 4,
) -> KomlosCertificate:
    """Forward convex combinations (or Cesàro means) converging in order.

    In ``forward_convex`` mode combination ``N`` is the mean of the ``N``-th
    block (length ``2^N``) of the order-bounded subsequence, composed with
    the stabilisation weights; in ``cesaro`` mode it is the running mean of
    that subsequence.  ``analytic_bound`` is ``|xi| + s (eta' + S)`` with
    ``eta'`` the order bound of the regular parts and ``S`` the atomwise sup
    of the recombined singular parts.
    """
    if mode not in ("forward_convex", "cesaro"):
        raise ValueError(f"unknown mode {mode!r}")
    space = seq.space
    w = space.weights
    stack = seq.stack()
    n_orig = len(stack)
    compose = np.eye(n_orig)
    log = []

    # 1. stabilisation
    rounds = 0
    spread = _tail_cauchy(stack, w) if len(stack) > 1 else 0.0
    while spread > l0_tol and rounds < max_rounds and len(stack) >= 8:
        stack, W = _forward_blocks(stack)
        compose = W @ compose
        rounds += 1
        spread = _tail_cauchy(stack, w)
    stable = spread <= l0_tol
    log.append({"stage": "stabilisation", "rounds": rounds, "tail_l0_spread": spread, "ok": bool(stable)})

    # 2. limit
    tail = stack[len(stack) // 2 :]
    limit_vals = np.median(tail, axis=0)
    limit = RandomVariable(space, limit_vals)
    extras = {}
    if seq.limit is not None:
        extras["declared_limit_gap"] = float(np.max(np.abs(seq.limit.values - limit_vals)[space.positive]))
    log.append({"stage": "limit", "estimator": "median of trailing half", "terms_used": len(tail)})

    # 3. centring and normalisation
    centred = [RandomVariable(space, row - limit_vals) for row in stack]
    scale = max(luxemburg_norm(z, phistar).value for z in centred)
    log.append({"stage": "normalise", "scale": scale})
    if scale == 0.0:
        lim_abs = abs(limit)
        weights = np.zeros((n_orig, n_orig))
        np.fill_diagonal(weights, 1.0)
        return KomlosCertificate(
            mode=mode,
            indices=list(range(n_orig)),
            weights=weights,
            combinations=list(seq.terms),
            limit=limit,
            order_bound=lim_abs,
            order_bound_norm=luxemburg_norm(lim_abs, phistar).value,
            as_convergence=np.zeros(n_orig),
            stage_log=log + [{"stage": "recombine", "note": "stationary sequence, point masses"}],
            analytic_bound=lim_abs,
            complete=stable,
            failed_stage=None if stable else "stabilisation",
            extras=extras,
        )
    normed = [z / scale for z in centred]

    # 4. Kadec-Pełczyński split
    split = kp_split(normed, phistar)
    log.append(
        {
            "stage": "kp_split",
            "levels_needed": split.levels_needed,
            "levels_reached": len(normed),
            "singular_sets": int(sum(bool(a.any()) for a in split.sets)),
            "ok": split.complete,
        }
    )

    # 5. order-bounded subsequence of the regular part
    sub = order_bounded_subsequence(split.regular, phistar, l0_tol=max(l0_tol, 0.1))
    sel = sub.indices
    log.append({"stage": "order_bounded_subsequence", "selected": len(sel), "ok": sub.complete})

    def partial(stage):
        return KomlosCertificate(
            mode=mode,
            indices=sel,
            weights=np.zeros((0, n_orig)),
            combinations=[],
            limit=limit,
            order_bound=RandomVariable(space, np.zeros(space.size)),
            order_bound_norm=math.nan,
            as_convergence=np.array([]),
            stage_log=log,
            complete=False,
            failed_stage=stage,
            extras=extras,
        )

    if not sel:
        return partial("order_bounded_subsequence")

    # 6. recombination over the selected subsequence
    if mode == "cesaro":
        groups = [np.arange(N) for N in range(1, len(sel) + 1)]
    else:
        groups = _geometric_blocks(len(sel))
        if not groups:
            return partial("recombine")
    sel_arr = np.asarray(sel)
    rows = np.zeros((len(groups), len(stack)))
    for r, g in enumerate(groups):
        rows[r, sel_arr[g]] = 1.0 / len(g)
    weights = rows @ compose
    combos_vals = weights @ seq.stack()
    combos = [RandomVariable(space, v) for v in combos_vals]
    eta = RandomVariable(space, np.max(np.abs(combos_vals), axis=0))

    reg = np.stack([split.regular[n].values for n in sel])
    sing = np.stack([split.singular[n].values for n in sel])
    eta_reg = np.max(np.abs(reg), axis=0)
    sing_combos = np.stack([sing[g].sum(axis=0) / len(g) for g in groups])
    sing_sup = np.max(np.abs(sing_combos), axis=0)
    analytic = RandomVariable(space, np.abs(limit_vals) + scale * (eta_reg + sing_sup))

    as_conv = np.array([l0_metric(c, limit) for c in combos])
    cauchy = l0_metric(combos[-1], combos[-2]) if len(combos) > 1 else 0.0
    converged = len(as_conv) > 0 and as_conv[-1] <= conv_tol and cauchy <= conv_tol
    log.append(
        {
            "stage": "recombine",
            "combinations": len(combos),
            "final_l0": float(as_conv[-1]),
            "last_step_l0": float(cauchy),
            "ok": bool(converged),
        }
    )
    extras.update(
        {
            "scale": scale,
            "regular_bound_norm": luxemburg_norm(RandomVariable(space, eta_reg), phistar).value,
            "singular_sup_norm": luxemburg_norm(RandomVariable(space, sing_sup), phistar).value,
            "modular_of_regular_sup": sub.extras["modular_of_sup"],
            "sum_regular_modulars": sub.extras["sum_modulars"],
            "stabilisation_rounds": rounds,
        }
    )
    # Whether Cesàro means of the whole stabilised sequence are already
    # order bounded is recorded as data, not asserted.
    running = np.cumsum(stack, axis=0) / np.arange(1, len(stack) + 1)[:, None]
    extras["unsubsequenced_cesaro_sup_norm"] = luxemburg_norm(
        RandomVariable(space, np.max(np.abs(running), axis=0)), phistar
    ).value
    failed = None
    for stage_ok, name in ((stable, "stabilisation"), (split.complete, "kp_split"), (sub.complete, "order_bounded_subsequence"), (converged, "recombine")):
        if not stage_ok:
            failed = name
            break
    return KomlosCertificate(
        mode=mode,
        indices=[int(np.flatnonzero(compose[n])[0]) if rounds else n for n in sel],
        weights=weights,
        combinations=combos,
        limit=limit,
        order_bound=eta,
        order_bound_norm=luxemburg_norm(eta, phistar).value,
        as_convergence=as_conv,
        stage_log=log,
        analytic_bound=analytic,
        complete=failed is None,
        failed_stage=failed,
        extras=extras,
    )


def pairing_trace(combinations: Sequence[RandomVariable], limit: RandomVariable, etas: Sequence[RandomVariable]) -> np.ndarray:
    """``|E[eta c_N] - E[eta xi]|`` per test function (rows) and combination (columns)."""
    return np.array([[abs((eta * c).expect() - (eta * limit).expect()) for c in combinations] for eta in etas])


# ----------------------------------------------------------------------------
# non-doubling obstruction


@dataclass
class NonDelta2Report:
    phi_kind: str
    is_delta2: bool
    levels: list
    eps_by_level: list
    eps_by_set: list
    floor: float
    slope: float
    obstruction: bool
    min_pairing: float
    pairing_floor_exact: bool
    l0_trace: list
    combos_checked: int

    def to_dict(self) -> dict:
        return {
            "phi": self.phi_kind,
            "is_delta2": self.is_delta2,
            "levels": self.levels,
            "eps_by_level": self.eps_by_level,
            "floor": self.floor,
            "slope": self.slope,
            "obstruction": self.obstruction,
            "min_pairing": self.min_pairing,
            "pairing_floor_exact": self.pairing_floor_exact,
            "combos_checked": self.combos_checked,
        }


def _level_of(phi: YoungFunction, target: float) -> float:
    """``x`` with ``Phi(x) = target`` by bisection."""
    lo, hi = 0.0, 1.0
    while float(phi(hi)) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if float(phi(mid)) < target:
            lo = mid
        else:
            hi = mid
    return hi


def non_delta2_counterexample(
    phi: YoungFunction,
    ladder: Sequence[int] = (4, 8, 12, 16),
    floor: float = 0.25,
    seed: int = 0,
    random_combos: int = 20,
) -> NonDelta2Report:
    """Build ``zeta_0`` in the modular ball with tail dual mass bounded below.

    On each ladder level ``k`` the sets ``A_j = [2^-j, 2^-(j-1))``, ``j <= k``,
    carry ``zeta_0 = x_j`` with ``Phi(x_j) = 2^j / (j (j+1))``, so that
    ``E[Phi(zeta_0)] <= 1``.  ``eta_j`` is the maximiser of ``E[eta zeta_0 1_{A_j}]``
    over the modular ball of ``Phi*``; ``eps_k = min_j E[zeta_0 eta_j 1_{A_j}]``.
    Forward convex combinations of ``eta_j 1_{A_j}`` keep pairing at least
    ``eps_k`` with ``zeta_0`` while tending to 0 in probability.  The
    obstruction is certified when ``eps_k`` stays above ``floor`` and does
    not decay along the ladder (log-log slope above ``-0.25``).
    """
    rng = np.random.default_rng(seed)
    phistar = conjugate(phi)
    is_d2 = delta2_index(phi).is_delta2
    heights = {}
    eps_levels, eps_sets, l0_trace = [], [], []
    min_pair = math.inf
    floor_exact = True
    combos = 0
    for k in ladder:
        space = DyadicSpace(k)
        zeta = np.zeros(space.size)
        blocks = [dyadic_block(space, j) for j in range(1, k + 1)]
        for j, mask in enumerate(blocks, start=1):
            if j not in heights:
                heights[j] = _level_of(phi, 2.0**j / (j * (j + 1)))
            zeta[mask] = heights[j]
        zeta_rv = RandomVariable(space, zeta)
        if zeta_rv.expect(phi) > 1.0 + 1e-12:
            raise InvariantViolation("zeta_0 left the modular ball")
        members, eps = [], []
        for mask in blocks:
            piece = RandomVariable(space, np.where(mask, zeta, 0.0))
            res = dual_orlicz_norm(piece, phistar, phistar=phi)
            eta = RandomVariable(space, np.where(mask, res.witness.values, 0.0))
            members.append(eta)
            eps.append((zeta_rv * eta).expect())
        eps = np.array(eps)
        eps_k = float(eps.min())
        eps_sets.append(eps.tolist())
        eps_levels.append(eps_k)
        # forward combinations: point masses, tail blocks, random weights on tails
        zero = RandomVariable(space, np.zeros(space.size))
        stack = np.stack([m.values for m in members])
        trace = []
        for n in range(k):
            tests = [np.eye(k)[n]]
            block = np.zeros(k)
            block[n:] = 1.0 / (k - n)
            tests.append(block)
            for _ in range(random_combos):
                wts = np.zeros(k)
                wts[n:] = rng.dirichlet(np.ones(k - n))
                tests.append(wts)
            for wts in tests:
                comb = RandomVariable(space, wts @ stack)
                pair = (zeta_rv * comb).expect()
                combos += 1
                min_pair = min(min_pair, pair)
                if pair < eps_k * (1.0 - 1e-12):
                    floor_exact = False
            trace.append(l0_metric(RandomVariable(space, block @ stack), zero))
        l0_trace.append(trace)
    levels = list(ladder)
    slope = float(np.polyfit(np.log(levels), np.log(eps_levels), 1)[0]) if len(levels) > 1 else 0.0
    obstruction = min(eps_levels) >= floor and slope > -0.25
    return NonDelta2Report(
        phi_kind=phi.kind,
        is_delta2=is_d2,
        levels=levels,
        eps_by_level=eps_levels,
        eps_by_set=eps_sets,
        floor=floor,
        slope=slope,
        obstruction=bool(obstruction),
        min_pairing=float(min_pair),
        pairing_floor_exact=floor_exact,
        l0_trace=l0_trace,
        combos_checked=combos,
    )


# ----------------------------------------------------------------------------
# generators


def _dyadic_spikes(p: Mapping) -> RvSequence:
    depth = int(p.get("depth", 10))
    count = int(p.get("count", depth))
    if count > depth:
        raise DomainError(f"only {depth} disjoint blocks are resolved at depth {depth}")
    power = float(p.get("power", 0.5))
    space = DyadicSpace(depth)
    terms = []
    for n in range(1, count + 1):
        mask = dyadic_block(space, n)
        terms.append(RandomVariable(space, np.where(mask, (2.0**-n) ** -power, 0.0)))
    return RvSequence(terms, norm_bound=1.0, limit=RandomVariable(space, np.zeros(space.size)), name="dyadic_spikes", p_convergent=True)


def _base_rv(space: DyadicSpace, p: Mapping, rng) -> np.ndarray:
    if "values" in p:
        return np.asarray(p["values"], dtype=float)
    return rng.uniform(-1.0, 1.0, space.size)


def _constant(p: Mapping) -> RvSequence:
    space = DyadicSpace(int(p.get("depth", 3)))
    rng = np.random.default_rng(int(p.get("seed", 0)))
    base = RandomVariable(space, _base_rv(space, p, rng))
    return RvSequence([base] * int(p.get("count", 16)), limit=base, name="identity_sequence", p_convergent=True)


def _scaled(p: Mapping) -> RvSequence:
    space = DyadicSpace(int(p.get("depth", 3)))
    rng = np.random.default_rng(int(p.get("seed", 0)))
    base = RandomVariable(space, _base_rv(space, p, rng))
    terms = [base / n for n in range(1, int(p.get("count", 16)) + 1)]
    return RvSequence(terms, limit=base * 0.0, name="scaled", p_convergent=True)


def _alternating(p: Mapping) -> RvSequence:
    space = DyadicSpace(int(p.get("depth", 3)))
    rng = np.random.default_rng(int(p.get("seed", 0)))
    base = RandomVariable(space, _base_rv(space, p, rng))
    terms = [base * (-1.0) ** n for n in range(1, int(p.get("count", 64)) + 1)]
    return RvSequence(terms, limit=base * 0.0, name="alternating")


def _mixed_spikes(p: Mapping) -> RvSequence:
    """``b + delta_n + s_n``: bounded part, vanishing noise and L2-normalised spikes.

    ``b = offset + amplitude * U[-1, 1]``, ``delta_n = noise 2^-n g_n`` with
    standard normal ``g_n``; the spike at ``n = 2^j`` sits on
    ``[2^-j, 2^-(j-1))`` with height ``P^-1/2``.
    """
    depth = int(p.get("depth", 10))
    count = int(p.get("count", 512))
    rng = np.random.default_rng(int(p.get("seed", 0)))
    space = DyadicSpace(depth)
    b = float(p.get("offset", 0.0)) + float(p.get("amplitude", 1.0)) * rng.uniform(-1.0, 1.0, space.size)
    noise_scale = float(p.get("noise", 1.0))
    spikes_at = {2**j: j for j in range(1, depth) if 2**j <= count}
    terms, noise = [], []
    for n in range(1, count + 1):
        delta = noise_scale * 2.0**-n * rng.standard_normal(space.size)
        noise.append(delta)
        v = b + delta
        if n in spikes_at:
            mask = dyadic_block(space, spikes_at[n])
            v = v + np.where(mask, 2.0 ** (spikes_at[n] / 2.0), 0.0)
        terms.append(RandomVariable(space, v))
    meta = {
        "bounded_part": RandomVariable(space, b),
        "noise_sup": RandomVariable(space, np.max(np.abs(np.stack(noise)), axis=0)),
        "spike_positions": sorted(spikes_at),
    }
    return RvSequence(terms, limit=RandomVariable(space, b), name="mixed_spikes", p_convergent=False, meta=meta)


def _modular_decay(p: Mapping) -> RvSequence:
    """``xi_n = n^-1/2`` on the whole space, so ``E[xi_n^2] = 1/n``."""
    space = DyadicSpace(int(p.get("depth", 2)))
    terms = [RandomVariable(space, np.full(space.size, n**-0.5)) for n in range(1, int(p.get("count", 1024)) + 1)]
    return RvSequence(terms, limit=RandomVariable(space, np.zeros(space.size)), name="modular_decay", p_convergent=True)


SEQUENCE_GENERATORS: dict[str, Callable[[Mapping], RvSequence]] = {
    "dyadic_spikes": _dyadic_spikes,
    "constant": _constant,
    "scaled": _scaled,
    "alternating": _alternating,
    "mixed_spikes": _mixed_spikes,
    "modular_decay": _modular_decay,
}


def sequence_from_config(entry: Mapping) -> RvSequence:
    """``{generator: {name, params}}`` or ``{space: {k}, terms: [[...], ...]}``."""
    if "terms" in entry:
        space = DyadicSpace(int(entry["space"]["k"]))
        return RvSequence([RandomVariable(space, t) for t in entry["terms"]], name=entry.get("name", "explicit"))
    gen = entry.get("generator")
    if gen is None or gen.get("name") not in SEQUENCE_GENERATORS:
        raise InvariantViolation(f"unknown sequence generator {gen!r}")
    return SEQUENCE_GENERATORS[gen["name"]](dict(gen.get("params", {})))
