import json
import math

import pytest

from orlicz_lab import gallery
from orlicz_lab.errors import InvariantViolation, ScenarioNotFound

EXPECTED = {"disjoint_l2", "dyadic_spikes", "identity_sequence", "mixed_spikes", "non_doubling_exp", "non_doubling_quadratic"}


def test_registry_lists_every_scenario():
    assert set(gallery.list_scenarios()) == EXPECTED


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_every_verdict_table_holds(name):
    res = gallery.run_scenario(name)
    failed = [r.to_dict() for r in res.results if not r.passed]
    assert res.ok, failed
    assert res.results, "every scenario declares at least one verdict"


def test_sequence_checks_run_per_depth():
    res = gallery.run_scenario("dyadic_spikes")
    sc = gallery.build_scenario("dyadic_spikes")
    depths = {r.depth for r in res.results}
    assert depths == set(sc.ladder)
    assert len(res.results) == len(sc.verdicts) * len(sc.ladder)


def test_dyadic_spikes_values():
    res = gallery.run_scenario("dyadic_spikes", ladder=[10])
    by = {r.check: r for r in res.results}
    assert by["unit_norms"].value <= 1e-12
    # P(A_10) = 2^-10 is the l0 distance of the last spike to zero
    assert by["l0_null"].value == 2.0**-10
    assert by["order_bound"].value <= math.pi / math.sqrt(6)
    assert by["uniformly_integrable"].outcome == "fail"


def test_ladder_override_and_aliases():
    sc = gallery.build_scenario("dyadic_spikes", ladder=[4, 5])
    assert sc.ladder == (4, 5)
    assert sc.sequence_at(5).prefix_len == 5
    for alias, target in gallery.scenario_aliases().items():
        assert target in EXPECTED
        assert gallery.build_scenario(alias).name == target


def test_unknown_scenario():
    with pytest.raises(ScenarioNotFound):
        gallery.build_scenario("no_such_scenario")
    with pytest.raises(ScenarioNotFound):
        gallery.run_scenario("no_such_scenario")


def test_load_validation():
    good = {"name": "x", "ladder": [3], "young": {"kind": "power", "parameters": {"p": 2}}, "verdicts": []}
    assert gallery.load_scenario(good).role == "phistar"
    for key in ("name", "ladder", "young", "verdicts"):
        with pytest.raises(InvariantViolation):
            gallery.load_scenario({k: v for k, v in good.items() if k != key})
    with pytest.raises(InvariantViolation):
        gallery.load_scenario({**good, "verdicts": [{"check": "bogus", "expect": "pass"}]})
    with pytest.raises(InvariantViolation):
        gallery.load_scenario({**good, "verdicts": [{"check": "unit_norms", "expect": "maybe"}]})
    with pytest.raises(InvariantViolation):
        gallery.load_scenario(good).sequence_at(3)


def test_declared_pass_that_fails_is_reported():
    # the quadratic control cannot produce the obstruction, so a declared pass fails
    sc = gallery.build_scenario("non_doubling_quadratic")
    flipped = gallery.load_scenario(
        {"name": sc.name, "ladder": list(sc.ladder), "young": sc.young, "verdicts": [{**sc.verdicts[0], "expect": "pass"}]}
    )
    res = gallery.run_scenario(flipped)
    assert not res.ok and res.results[0].outcome == "fail"
    json.dumps(res.to_dict())
