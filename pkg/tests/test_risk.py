import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orlicz_lab import risk, young
from orlicz_lab.errors import ConsistencyError, DomainError, PreconditionError
from orlicz_lab.komlos import RvSequence
from orlicz_lab.space import DyadicSpace, RandomVariable

UTILITIES = {
    "entropic": risk.entropic,
    "entropic_gamma3": lambda: risk.entropic(3.0),
    "ess_inf": risk.ess_inf,
    "avar_quarter": lambda: risk.average_value_at_risk(0.25),
    "avar_half": lambda: risk.average_value_at_risk(0.5),
    "expectation": risk.expectation,
}

values = arrays(np.float64, 8, elements=st.floats(-20, 20, allow_subnormal=False))


def rv(vals, k=3):
    return RandomVariable(DyadicSpace(k), vals)


def density(vals, k=1):
    return RandomVariable(DyadicSpace(k), vals)


# --- axioms -----------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(UTILITIES))
def test_normalised(name):
    assert UTILITIES[name]()(rv(np.zeros(8))) == 0.0


@given(values, st.floats(-10, 10), st.sampled_from(sorted(UTILITIES)))
def test_cash_invariance(vals, a, name):
    u = UTILITIES[name]()
    x = rv(vals)
    assert u(x + a) == pytest.approx(u(x) + a, abs=1e-12 * (1 + np.max(np.abs(vals)) + abs(a)))


@given(values, values, st.floats(0, 1), st.sampled_from(sorted(UTILITIES)))
def test_concavity(a, b, t, name):
    u = UTILITIES[name]()
    x, y = rv(a), rv(b)
    scale = 1 + np.max(np.abs(a)) + np.max(np.abs(b))
    assert u(x * t + y * (1 - t)) >= t * u(x) + (1 - t) * u(y) - 1e-12 * scale


@given(values, arrays(np.float64, 8, elements=st.floats(0, 5)), st.sampled_from(sorted(UTILITIES)))
def test_monotone(vals, bump, name):
    u = UTILITIES[name]()
    rep = risk.monotonicity_check(u, [(rv(vals), rv(vals + bump))])
    assert rep.passed


def test_utility_examples():
    x = rv(np.arange(8.0))
    assert risk.ess_inf()(x) == 0.0
    assert risk.expectation()(x) == 3.5
    # worst quarter of 0..7 is {0, 1}
    assert risk.average_value_at_risk(0.25)(x) == 0.5
    assert risk.average_value_at_risk(1.0)(x) == 3.5
    # constant position: entropic value is the constant
    assert risk.entropic(2.0)(rv(np.full(8, -1.25))) == -1.25
    assert risk.utility_from_config({"name": "avar", "params": {"alpha": 0.5}})(x) == 1.5
    with pytest.raises(DomainError):
        risk.utility_from_config({"name": "nope"})
    with pytest.raises(DomainError):
        risk.average_value_at_risk(0.0)
    with pytest.raises(DomainError):
        risk.entropic(-1.0)


def test_entropic_large_values_stable():
    x = rv(np.r_[1e4, -1e4, np.zeros(6)])
    # dominated by the worst atom: -1e4 - log(1/8)
    assert risk.entropic()(x) == pytest.approx(-1e4 + math.log(8), rel=1e-12)


# --- penalties --------------------------------------------------------------


def test_ess_inf_penalty_zero():
    for d in ([1.0, 1.0], [2.0, 0.0], [0.5, 1.5]):
        res = risk.penalty(risk.ess_inf(), density(d))
        assert res.value == pytest.approx(0.0, abs=1e-8) and res.closed_form == 0.0


def test_entropic_penalty_is_relative_entropy():
    d = density([1.5, 0.5])
    expected = 0.5 * (1.5 * math.log(1.5) + 0.5 * math.log(0.5))
    res = risk.penalty(risk.entropic(), d)
    assert res.closed_form == pytest.approx(expected, rel=1e-14)
    assert res.value == pytest.approx(expected, abs=1e-8)
    # gamma scales the penalty by 1/gamma
    assert risk.penalty(risk.entropic(2.0), d).value == pytest.approx(expected / 2, abs=1e-8)


def test_penalty_of_reference_measure_is_zero():
    one = density(np.ones(4), k=2)
    for name in sorted(UTILITIES):
        assert risk.penalty(UTILITIES[name](), one).value == pytest.approx(0.0, abs=1e-8)


def test_infinite_penalties_report_direction():
    d = density([1.5, 0.5])
    res = risk.penalty(risk.expectation(), d)
    assert res.value == math.inf and res.closed_form == math.inf
    # u - E_Q along v is (v_1 - v_0) / 4, unbounded wherever that is positive
    v = res.direction
    assert v is not None and v[1] - v[0] > 0
    # density 4 on one quarter exceeds the cap 1/alpha = 2
    res = risk.penalty(risk.average_value_at_risk(0.5), density([4.0, 0.0, 0.0, 0.0], k=2))
    assert res.value == math.inf and res.closed_form == math.inf
    assert risk.penalty(risk.average_value_at_risk(0.5), density([2.0, 0.0])).value == pytest.approx(0.0, abs=1e-8)


def test_penalty_rejects_non_density():
    with pytest.raises(DomainError):
        risk.penalty(risk.entropic(), density([1.0, 0.5]))
    with pytest.raises(DomainError):
        risk.penalty(risk.entropic(), density([2.5, -0.5]))


def test_wrong_closed_form_detected():
    u = risk.entropic()
    bad = risk.MonetaryUtility(u.evaluate, "entropic_bad", lambda d: 0.0, u.gradient)
    with pytest.raises(ConsistencyError):
        risk.penalty(bad, density([1.5, 0.5]))


# --- dual representation ----------------------------------------------------


def test_dual_two_atom_entropic():
    x = density([1.0, 0.0])
    rep = risk.dual_representation_check(risk.entropic(), x)
    expected = -math.log((math.exp(-1) + 1) / 2)
    assert rep.value == pytest.approx(expected, rel=1e-15)
    assert abs(rep.gap) <= 1e-8
    # optimiser is the Gibbs density e^{-xi} / E[e^{-xi}]
    gibbs = np.exp(-x.values) / np.mean(np.exp(-x.values))
    assert np.allclose(rep.optimizer_density.values, gibbs, rtol=1e-12)


def test_dual_constant_position():
    rep = risk.dual_representation_check(risk.entropic(), rv(np.full(8, 2.0)))
    assert rep.value == 2.0 and abs(rep.gap) <= 1e-12
    assert np.allclose(rep.optimizer_density.values, 1.0)


@pytest.mark.parametrize("name", sorted(UTILITIES))
def test_dual_gap_nonnegative_and_tight(name, rng):
    u = UTILITIES[name]()
    for _ in range(3):
        x = rv(rng.normal(size=4), k=2)
        rep = risk.dual_representation_check(u, x)
        assert rep.gap >= -1e-10 and rep.gap <= 1e-8
        assert np.all(rep.optimizer_density.values >= 0)
        assert rep.densities_checked == 1 + math.comb(4 + 3, 3)


def test_dual_numeric_penalties_without_gradient(rng):
    u = risk.entropic()
    plain = risk.MonetaryUtility(u.evaluate, "entropic_oracle")
    x = rv(rng.normal(size=2), k=1)
    rep = risk.dual_representation_check(plain, x, granularity=2)
    assert rep.gap >= -1e-8 and rep.gap <= 1e-5
    with pytest.raises(PreconditionError):
        risk.dual_representation_check(plain, x, penalty_source="closed")


def test_simplex_mesh_counts_and_densities():
    s = DyadicSpace(1, [0.25, 0.75])
    mesh = risk.simplex_mesh(s, 4)
    assert len(mesh) == 5
    for d in mesh:
        assert d.expect() == pytest.approx(1.0) and np.all(d.values >= 0)


# --- continuity -------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(UTILITIES))
def test_cash_chain_errors_exact(name, rng):
    u = UTILITIES[name]()
    x = rv(rng.normal(size=8))
    ns = np.arange(1, 50)
    above = risk.continuity_from_above(u, [x + 1.0 / n for n in ns], limit=x)
    # cash invariance: the error along xi + 1/n is exactly 1/n
    assert np.allclose(above.errors, 1.0 / ns, rtol=1e-9, atol=1e-12)
    assert above.monotone_values and above.errors_nonincreasing and above.lipschitz_ok
    assert not above.converged  # 1/49 is far above the default 1e-6
    below = risk.continuity_from_below(u, [x - 2.0**-n for n in range(45)], limit=x)
    assert below.passed


def test_sandwich_equality_for_expectation(rng):
    x = rv(rng.normal(size=8))
    v = RandomVariable(x.space, rng.uniform(0, 1, 8))
    chain = [x - v * 2.0**-n for n in range(45)]
    rep = risk.continuity_from_below(risk.expectation(), chain, limit=x)
    assert np.max(np.abs(rep.sandwich_slack)) <= 1e-14


def test_chain_validation():
    x = rv(np.zeros(8))
    with pytest.raises(DomainError):
        risk.continuity_from_above(risk.entropic(), [x, x + 1.0])
    with pytest.raises(DomainError):
        risk.continuity_from_below(risk.entropic(), [x - 1.0, x], limit=x - 2.0)
    with pytest.raises(DomainError):
        risk.continuity_from_above(risk.entropic(), [])


def test_monotonicity_unordered_pair_rejected():
    with pytest.raises(DomainError):
        risk.monotonicity_check(risk.entropic(), [(rv(np.arange(8.0)), rv(np.zeros(8)))])


def test_usc_along_order_bounded_sequence(rng):
    x = rv(rng.normal(size=8))
    seq = [x + RandomVariable(x.space, rng.normal(size=8)) * 2.0**-n for n in range(60)]
    for name in sorted(UTILITIES):
        ok, lv, limsup = risk.usc_sequence_check(UTILITIES[name](), seq, x)
        assert ok and lv == pytest.approx(limsup, abs=1e-12)


# --- closure ----------------------------------------------------------------


def test_convex_probes():
    phi = young.power(2)
    ball = risk.norm_ball(phi, 1.0)
    assert ball(rv(np.full(8, 1.0))) and not ball(rv(np.full(8, 1.01)))
    acc = risk.acceptance_set(risk.entropic())
    assert acc(rv(np.zeros(8))) and not acc(rv(np.r_[-1.0, np.zeros(7)]))
    assert acc.spot_check([rv(np.full(8, t)) for t in (0.0, 1.0, 2.0)])
    hs = risk.half_space(rv(np.ones(8)), 0.5)
    assert hs(rv(np.full(8, 0.5))) and not hs(rv(np.full(8, 0.4)))


@pytest.mark.parametrize("name", ["ball", "acceptance", "half_space"])
def test_closure_examples(name):
    C, seq, phistar, expected = risk.closure_examples()[name]
    rep = risk.closure_certificate(C, seq, phistar)
    assert rep.verdict == expected
    assert rep.members_in_C and rep.combos_in_C
    d = rep.to_dict()
    assert d["verdict"] == expected


def test_half_space_limit_is_zero():
    C, seq, phistar, _ = risk.closure_examples()["half_space"]
    rep = risk.closure_certificate(C, seq, phistar)
    # each spike pairs with eta to exactly eps, the null limit pairs to 0
    assert np.all(rep.certificate.limit.values == 0) and not rep.limit_in_C


def test_closure_requires_members_in_set():
    phi = young.power(2)
    seq = RvSequence([rv(np.full(8, 2.0))])
    with pytest.raises(PreconditionError):
        risk.closure_certificate(risk.norm_ball(phi, 1.0), seq, phi)
