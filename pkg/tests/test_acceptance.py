"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import math
import time
from fractions import Fraction

import numpy as np

from orlicz_lab import gallery, risk, young
from orlicz_lab.estimates import DisjointFamily, cesaro_disjoint_bounds, truncation_modular_bound, verify_upper_q_estimate
from orlicz_lab.komlos import RvSequence, non_delta2_counterexample, order_bounded_subsequence, pairing_trace
from orlicz_lab.norms import dual_orlicz_norm, luxemburg_norm
from orlicz_lab.space import DyadicSpace, RandomVariable, dyadic_block

from conftest import DELTA2_FAMILIES


def report(number, title, ok, detail=""):
    print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {title} {detail}".rstrip())
    assert ok, detail


# 1 -------------------------------------------------------------------------


def test_criterion_01_conjugate_oracle_equivalence():
    t0 = time.perf_counter()
    ys = np.linspace(0.0, 20.0, 401)
    xs = np.linspace(0.0, 5.0, 101)
    families = {"power3": young.power(3.0), "quadratic": young.quadratic(), "entropic": young.entropic(), "exp_minus_one": young.exp_minus_one()}
    worst_conj, worst_bi = 0.0, 0.0
    for name, phi in families.items():
        closed = young.conjugate(phi, method="closed")
        numeric = young.conjugate(phi, method="numeric")
        worst_conj = max(worst_conj, float(np.max(np.abs(numeric(ys) - closed(ys)))))
        # biconjugate: numeric transform of the closed conjugate, on a grid covering Phi'([0, 5])
        top = float(phi.deriv(np.asarray(5.0))) * 1.2
        bi = young.conjugate(closed, grid=young.default_grid(min(top, float(closed.x_max))), method="numeric", validate=False)
        worst_bi = max(worst_bi, float(np.max(np.abs(bi(xs) - phi(xs)))))
    elapsed = time.perf_counter() - t0
    ok = worst_conj <= 1e-6 and worst_bi <= 2e-6 and elapsed < 5.0
    report(1, "conjugate oracle equivalence", ok, f"sup_err={worst_conj:.2e} biconj_err={worst_bi:.2e} time={elapsed:.2f}s")


# 2 -------------------------------------------------------------------------


def test_criterion_02_delta2_classification():
    lines, ok = [], True
    for p in (1.5, 2.0, 3.0, 4.0):
        phi = young.power(p)
        rep = young.delta2_index(phi)
        oracle, _ = young.doubling_oracle(phi)
        good = rep.is_delta2 and abs(rep.p_phi - p) <= 1e-6 and oracle
        ok &= good
        lines.append(f"p={p}:{rep.p_phi:.8f}")
    for make in (young.exp_minus_one, young.entropic):
        phi = make()
        rep = young.delta2_index(phi)
        oracle, trace = young.doubling_oracle(phi)
        # divergence evidence: the elasticity at the cutoffs Y, 2Y, 4Y keeps growing
        ps = [p for _, p in rep.cutoff_trace]
        good = (not rep.is_delta2) and rep.diverging and not oracle and bool(np.all(np.diff(ps) > 0))
        ok &= good
        lines.append(f"{phi.kind}:trace={tuple(round(v, 2) for v in ps)}")
    for name, make in DELTA2_FAMILIES.items():
        phi = make()
        ok &= young.delta2_index(phi).is_delta2 == young.doubling_oracle(phi)[0]
    report(2, "Delta2 classification", ok, " ".join(lines))


# 3 -------------------------------------------------------------------------


def test_criterion_03_norm_solver_cross_check():
    rng = np.random.default_rng(2024)
    makers = list(DELTA2_FAMILIES.values()) + [young.entropic, young.exp_minus_one]
    phis = [m() for m in makers]
    stars = [young.conjugate(p) for p in phis]
    worst_gap, worst_sandwich = 0.0, math.inf
    for i in range(200):
        j = i % len(phis)
        k = int(rng.integers(1, 5))
        x = RandomVariable(DyadicSpace(k), rng.normal(size=2**k) * rng.uniform(0.05, 5.0))
        kkt = dual_orlicz_norm(x, phis[j], method="kkt", phistar=stars[j]).value
        am = dual_orlicz_norm(x, phis[j], method="amemiya", phistar=stars[j]).value
        worst_gap = max(worst_gap, abs(kkt - am) / max(1.0, kkt))
        lux = luxemburg_norm(x, stars[j]).value
        both = min(kkt, am)
        slack = min(both - lux, 2 * lux - max(kkt, am))
        worst_sandwich = min(worst_sandwich, slack)
    ok = worst_gap <= 1e-6 and worst_sandwich >= -1e-9
    report(3, "dual norm solvers agree and sandwich holds", ok, f"max_gap={worst_gap:.2e} min_slack={worst_sandwich:.2e}")


# 4 -------------------------------------------------------------------------


def _random_disjoint(rng, space, n):
    owner = rng.integers(0, n, space.size)
    vals = rng.normal(size=space.size) * rng.uniform(0.1, 3.0, n)[owner]
    return DisjointFamily([RandomVariable(space, np.where(owner == i, vals, 0.0)) for i in range(n)])


def test_criterion_04_q_estimate_growth_truncation_battery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    space = DyadicSpace(10)
    ns = [4, 8, 16, 32, 64, 128, 256]
    ratios = {}
    for p in (2.0, 1.5, 3.0):
        phi = young.power(p)
        phistar = young.conjugate(phi)
        d2 = young.delta2_index(phi)
        q = p / (p - 1.0)
        ratios[p] = [verify_upper_q_estimate(_random_disjoint(rng, space, n), phi, q, phistar=phistar, delta2=d2).empirical_C for n in ns]
    table = np.array([ratios[p] for p in ratios])
    battery = float(table.max())
    running = np.maximum.accumulate(table.max(axis=0))
    stable = running[-1] <= 1.05 * running[0]
    # growth bound Psi(lam x) <= lam^p Psi(x) and the modular bound on every (Phi, x0, p) triple
    growth_ok, trunc_ok, triples = True, True, 0
    xs = np.linspace(0.0, 20.0, 801)
    lams = np.array([1.0, 1.5, 2.0, 4.0, 8.0])
    for pp in (2.0, 1.5, 3.0):
        for x0 in (0.5, 1.0, 2.0):
            base = young.make_truncated_psi(young.power(pp), x0)
            for p_extra in (0.0, 0.5):
                psi = young.make_truncated_psi(young.power(pp), x0, p=base.p + p_extra)
                triples += 1
                lhs = psi(lams[None, :] * xs[:, None])
                rhs = lams[None, :] ** psi.p * psi(xs)[:, None]
                growth_ok &= bool(np.all(lhs <= rhs * (1 + 1e-12) + 1e-300))
                for _ in range(5):
                    eta = RandomVariable(DyadicSpace(4), rng.normal(size=16))
                    eta = eta / luxemburg_norm(eta, psi.young).value * rng.uniform(0.05, 1.0)
                    norm, bound = truncation_modular_bound(psi, eta)
                    trunc_ok &= norm <= bound * (1 + 1e-12)
    elapsed = time.perf_counter() - t0
    ok = battery <= 1.0 + 1e-9 and stable and growth_ok and trunc_ok and elapsed < 30.0
    report(
        4,
        "upper q-estimate battery, growth and truncation bounds",
        ok,
        f"battery_C={battery:.6f} running_max={running[0]:.6f}->{running[-1]:.6f} triples={triples} time={elapsed:.1f}s",
    )


# 5 -------------------------------------------------------------------------


def test_criterion_05_cesaro_identity_and_decay():
    rng = np.random.default_rng(11)
    exact = True
    for _ in range(20):
        fam = _random_disjoint(rng, DyadicSpace(8), int(rng.integers(1, 40)))
        rep = cesaro_disjoint_bounds(fam, young.power(2.0), 2.0, method="kkt")
        exact &= rep.sup_identity_exact and rep.extras["max_abs_identity_gap"] == 0.0
    space = DyadicSpace(14)
    exps = []
    for p in (2.0, 1.5, 3.0):
        phi = young.power(p)
        q = p / (p - 1.0)
        members = []
        for n in range(1, 15):
            x = RandomVariable(space, np.where(dyadic_block(space, n), 1.0, 0.0))
            members.append(x / dual_orlicz_norm(x, phi).value)
        rep = cesaro_disjoint_bounds(DisjointFamily(members), phi, q)
        exact &= rep.sup_identity_exact
        exps.append((rep.fitted_exponent, rep.expected_exponent))
    close = all(abs(f - e) <= 0.05 for f, e in exps)
    detail = " ".join(f"{f:.4f}/{e:.4f}" for f, e in exps)
    report(5, "Cesaro sup identity exact, decay exponent 1/q - 1", exact and close, f"exponents={detail}")


# 6 -------------------------------------------------------------------------


def _hypothesis_sequence(seed):
    # bounded by 3 atomwise (so Phi*(xi_n) is uniformly integrable), null in probability
    rng = np.random.default_rng(seed)
    space = DyadicSpace(8)
    beta = rng.uniform(0.5, 1.5)
    g = np.clip(rng.normal(size=(256, space.size)), -3, 3)
    shrink = rng.uniform(size=(256, space.size))
    terms = []
    for n in range(1, 257):
        v = g[n - 1] * n**-beta
        if seed % 2:
            v = np.where(shrink[n - 1] <= 1.0 / math.sqrt(n), g[n - 1], 0.0)
        terms.append(RandomVariable(space, v))
    return RvSequence(terms, name=f"hyp_{seed}")


def test_criterion_06_subsequence_certificate_and_pairing_null():
    rng = np.random.default_rng(5)
    space = DyadicSpace(8)
    etas = [RandomVariable(space, np.ones(space.size)), RandomVariable(space, np.linspace(-1, 1, space.size)), RandomVariable(space, rng.choice([-1.0, 1.0], space.size))]
    cert_ok, null_ok, counts = True, True, []
    for seed in range(50):
        p = 2.0 if seed < 25 else 3.0
        phistar = young.power(p)
        seq = _hypothesis_sequence(seed)
        cert = order_bounded_subsequence(seq, phistar)
        ex = cert.extras
        cert_ok &= cert.complete and ex["modular_of_sup"] <= ex["sum_modulars"] * (1 + 1e-12) and ex["sum_modulars"] <= 1.0
        counts.append(len(cert.indices))
        zero = RandomVariable(space, np.zeros(space.size))
        tr = pairing_trace(cert.combinations, zero, etas)
        # Holder: |E[eta xi_{n_k}]| <= ||eta||_{p'} E[|xi_{n_k}|^p]^(1/p) <= ||eta||_{p'} 2^(-k/p)
        pp = p / (p - 1.0)
        ks = np.arange(1, len(cert.indices) + 1)
        for eta, row in zip(etas, tr):
            dual = eta.expect(lambda v: np.abs(v) ** pp) ** (1 / pp)
            null_ok &= bool(np.all(row <= dual * 2.0 ** (-ks / p) * (1 + 1e-9)))
            null_ok &= row[-1] <= 0.1 * dual
    ok = cert_ok and null_ok and min(counts) >= 4
    report(6, "order-bounded subsequence certificates, pairing-null", ok, f"selected={min(counts)}..{max(counts)}")


# 7 -------------------------------------------------------------------------


def test_criterion_07_komlos_end_to_end():
    t0 = time.perf_counter()
    res = gallery.run_scenario("mixed_spikes")
    elapsed = time.perf_counter() - t0
    by = {r.check: r for r in res.results}
    ok = res.ok and by["limit_matches_truth"].value <= 1e-9 and by["order_bound_within_constructed_bound"].passed and elapsed < 60.0
    report(7, "extraction recovers the bounded part", ok, f"limit_gap={by['limit_matches_truth'].value:.1e} bound={by['order_bound_within_constructed_bound'].value:.4f} time={elapsed:.1f}s")


# 8 -------------------------------------------------------------------------


def test_criterion_08_non_doubling_dichotomy():
    floor = 0.25
    exp_rep = non_delta2_counterexample(young.exp_minus_one(), ladder=(4, 8, 12, 16), floor=floor)
    quad_rep = non_delta2_counterexample(young.power(2.0), ladder=(4, 8, 12, 16), floor=floor)
    eps = np.asarray(quad_rep.eps_by_level)
    ok = exp_rep.obstruction and min(exp_rep.eps_by_level) >= floor and exp_rep.pairing_floor_exact
    ok = ok and not quad_rep.obstruction and bool(np.all(np.diff(eps) < 0))
    report(8, "obstruction for exp(|x|)-1, negative control x^2", ok, f"floor={floor} eps_exp={min(exp_rep.eps_by_level):.4f} eps_quad_last={eps[-1]:.4f}")


# 9 -------------------------------------------------------------------------


def _atom_space(n_atoms, rng):
    k = max(1, math.ceil(math.log2(n_atoms)))
    raw = rng.integers(1, 20, n_atoms)
    total = int(raw.sum())
    weights = [Fraction(int(r), total) for r in raw] + [Fraction(0)] * (2**k - n_atoms)
    perm = rng.permutation(2**k)
    return DyadicSpace(k, [weights[i] for i in perm])


def test_criterion_09_risk_duality_and_continuity():
    rng = np.random.default_rng(99)
    u = risk.entropic()
    worst_gap, worst_pen, chains_ok, min_slack, n_chains = 0.0, 0.0, True, math.inf, {"above": 0, "below": 0}
    spaces = [_atom_space(n, rng) for n in range(2, 9) for _ in range(3)]
    for s in spaces:
        xi = RandomVariable(s, rng.normal(size=s.size) * 2.0)
        rep = risk.dual_representation_check(u, xi)
        worst_gap = max(worst_gap, abs(rep.gap))
        d = np.where(s.positive, rng.uniform(0.1, 2.0, s.size), 0.0)
        d = RandomVariable(s, d / math.fsum(s.weights * d))
        pen = risk.penalty(u, d)
        worst_pen = max(worst_pen, abs(pen.value - pen.closed_form))
    for i in range(100):
        s = spaces[i % len(spaces)]
        xi = RandomVariable(s, rng.normal(size=s.size))
        v = RandomVariable(s, rng.uniform(0.0, 1.0, s.size))
        for direction, sign, probe in (("above", 1.0, risk.continuity_from_above), ("below", -1.0, risk.continuity_from_below)):
            rep = probe(u, [xi + v * (sign * 2.0**-n) for n in range(45)], limit=xi)
            chains_ok &= rep.passed
            min_slack = min(min_slack, float(rep.sandwich_slack.min()))
            n_chains[direction] += 1
    ok = worst_gap <= 1e-8 and worst_pen <= 1e-8 and chains_ok and min_slack >= -1e-9 and n_chains == {"above": 100, "below": 100}
    report(9, "entropic duality, penalty, continuity chains", ok, f"max_gap={worst_gap:.1e} max_pen_err={worst_pen:.1e} min_slack={min_slack:.1e}")


# 10 ------------------------------------------------------------------------


def test_criterion_10_closure_certificates():
    verdicts, ok = {}, True
    for name, (C, seq, phistar, expected) in risk.closure_examples().items():
        rep = risk.closure_certificate(C, seq, phistar)
        verdicts[name] = rep.verdict
        ok &= rep.verdict == expected
        if name == "half_space":
            ok &= not rep.limit_in_C
    report(10, "closure certificates", ok, " ".join(f"{k}={v}" for k, v in verdicts.items()))
