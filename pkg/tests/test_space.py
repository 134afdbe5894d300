import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orlicz_lab import space as sp
from orlicz_lab.errors import DomainError, InvariantViolation, SpaceMismatchError
from orlicz_lab.space import DyadicSpace, RandomVariable


def test_space_weights_exact_and_refinement():
    s = DyadicSpace(3)
    assert s.size == 8 and math.fsum(s.weights) == 1.0
    assert s.refine().weights[0] == s.weights[0] / 2
    w = DyadicSpace(1, [Fraction(1, 3), Fraction(2, 3)])
    r = w.refine(2)
    assert r.size == 8 and r.weights[0] == pytest.approx(1 / 12)
    with pytest.raises(InvariantViolation):
        DyadicSpace(1, [0.5, 0.6])
    with pytest.raises(InvariantViolation):
        DyadicSpace(1, [Fraction(1, 2), Fraction(1, 3)])
    with pytest.raises(DomainError):
        DyadicSpace(-1)


def test_weights_are_read_only():
    s = DyadicSpace(2)
    with pytest.raises(ValueError):
        s.weights[0] = 1.0
    x = RandomVariable(s, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        x.values[0] = 0.0


def test_l0_metric_examples():
    s = DyadicSpace(1)
    x = RandomVariable(s, [2.0, 0.0])
    zero = RandomVariable(s, [0.0, 0.0])
    assert sp.l0_metric(x, x) == 0.0
    assert sp.l0_metric(x, zero) == 0.5
    assert sp.l0_metric(sp.constant(s, 0.25), zero) == 0.25
    with pytest.raises(SpaceMismatchError):
        sp.l0_metric(x, RandomVariable(DyadicSpace(2), np.zeros(4)))


def _spikes(depth, count):
    s = DyadicSpace(depth)
    out = []
    for n in range(1, count + 1):
        mask = sp.dyadic_block(s, n)
        out.append(RandomVariable(s, np.where(mask, 2.0 ** (n / 2), 0.0)))
    return out


def test_ui_modulus_examples():
    s = DyadicSpace(3)
    one = sp.constant(s, 1.0)
    assert sp.ui_modulus([one], sp.constant(s, 0.5), 1.0) == 0.0
    fam = _spikes(8, 6)
    # every spike exceeds 1; E[spike 1{spike > 1}] = P(A_n)^(1/2), largest for n = 1
    assert sp.ui_modulus(fam, sp.constant(fam[0].space, 1.0), 1.0) == pytest.approx(2**-0.5, rel=1e-15)
    eta = RandomVariable(s, np.arange(8.0) - 3)
    x = sp.constant(s, 2.0)
    assert sp.ui_modulus([eta, -eta], x, 3.0) == sp.ui_modulus([eta], x, 3.0)
    with pytest.raises(DomainError):
        sp.ui_modulus([], x, 1.0)


def test_refine_examples():
    s = DyadicSpace(1)
    x = RandomVariable(s, [1.0, 0.0])
    assert sp.refine(x, 0) == x
    assert sp.refine(x, 1).values.tolist() == [1.0, 1.0, 0.0, 0.0]


@given(arrays(np.float64, 8, elements=st.floats(-1e3, 1e3)), st.integers(0, 3))
def test_refine_preserves_expectations_exactly(vals, levels):
    x = RandomVariable(DyadicSpace(3), vals)
    y = sp.refine(x, levels)
    assert y.expect(lambda v: v**2) == x.expect(lambda v: v**2)
    assert y.expect() == x.expect()
    assert y.expect(np.abs) == x.expect(np.abs)


@given(arrays(np.float64, 4, elements=st.floats(-10, 10)), arrays(np.float64, 4, elements=st.floats(-10, 10)))
def test_lattice_ops_commute_with_refine(a, b):
    s = DyadicSpace(2)
    x, y = RandomVariable(s, a), RandomVariable(s, b)
    assert sp.refine(x.maximum(y), 2) == sp.refine(x, 2).maximum(sp.refine(y, 2))
    assert sp.refine(abs(x), 1) == abs(sp.refine(x, 1))
    assert sp.refine(sp.sup([x, y]), 1) == sp.sup([sp.refine(x, 1), sp.refine(y, 1)])


def test_dyadic_spikes_unit_l2_and_l0_null():
    fam = _spikes(10, 9)
    zero = sp.constant(fam[0].space, 0.0)
    for n, x in enumerate(fam, start=1):
        # exact up to the rounding of the height 2^(n/2) for odd n
        assert x.expect(np.square) == pytest.approx(1.0, abs=4.5e-16)
        assert sp.l0_metric(x, zero) == 2.0**-n


def test_finite_space_convergence_modes_coincide(rng):
    # atomwise, l0 and L2 convergence are the same thing on a fixed finite space
    s = DyadicSpace(4)
    limit = RandomVariable(s, rng.normal(size=16))
    seq = [limit + RandomVariable(s, rng.normal(size=16)) * 2.0**-n for n in range(40)]
    atomwise = [float(np.max(np.abs((x - limit).values))) for x in seq]
    l0 = [sp.l0_metric(x, limit) for x in seq]
    l2 = [math.sqrt((x - limit).expect(np.square)) for x in seq]
    min_w = s.weights.min()
    for a, m, n in zip(atomwise, l0, l2):
        assert m <= a and n <= a
        # on a finite space the sup is controlled by either metric through the smallest atom
        assert min(a, 1.0) <= m / min_w * (1 + 1e-12)
        assert a <= n / math.sqrt(min_w) * (1 + 1e-12)
    assert atomwise[-1] < 1e-9 and l0[-1] < 1e-9 and l2[-1] < 1e-9


def test_order_interval_and_interval_indicator():
    s = DyadicSpace(3)
    zeta = RandomVariable(s, np.linspace(0, 1, 8))
    oi = sp.OrderInterval(zeta)
    assert oi.contains(-zeta) and oi.contains(zeta * 0.5)
    assert not oi.contains(zeta + 0.01)
    with pytest.raises(InvariantViolation):
        sp.OrderInterval(-zeta - 1)
    ind = sp.interval_indicator(s, Fraction(1, 4), Fraction(1, 2))
    assert ind.values.tolist() == [0, 0, 1, 1, 0, 0, 0, 0]
    assert ind.expect() == 0.25
    with pytest.raises(DomainError):
        sp.interval_indicator(s, Fraction(1, 3), Fraction(1, 2))


def test_convex_combination_and_common_refinement():
    a = RandomVariable(DyadicSpace(1), [1.0, 3.0])
    b = RandomVariable(DyadicSpace(2), [0.0, 0.0, 4.0, 4.0])
    ra, rb = sp.common_refinement(a, b)
    assert ra.space == rb.space
    c = sp.convex_combination([ra, rb], [0.25, 0.75])
    assert c.values.tolist() == [0.25, 0.25, 3.75, 3.75]
    with pytest.raises(InvariantViolation):
        sp.convex_combination([ra, rb], [0.5, 0.6])
    with pytest.raises(DomainError):
        sp.convex_combination([ra, rb], [1.0])


def test_zero_weight_atoms_ignored():
    s = DyadicSpace(1, [1.0, 0.0])
    x = RandomVariable(s, [2.0, 1e300])
    assert x.expect() == 2.0 and x.ess_max() == 2.0 and x.ess_min() == 2.0


def test_rv_from_config():
    x = sp.rv_from_config({"space": {"k": 2}, "values": [1, 2, 3, 4]})
    assert x.expect() == 2.5
    spike = sp.rv_from_config({"space": {"k": 4}, "generator": {"name": "spike", "params": {"j": 2}}})
    assert spike.expect(np.square) == pytest.approx(1.0)
    w = sp.rv_from_config({"space": {"k": 1, "weights": ["1/3", "2/3"]}, "values": [3, 0]})
    assert w.expect() == pytest.approx(1.0)
    with pytest.raises(InvariantViolation):
        sp.rv_from_config({"values": [1]})
    with pytest.raises(InvariantViolation):
        sp.rv_from_config({"space": {"k": 1}, "generator": {"name": "nope"}})
