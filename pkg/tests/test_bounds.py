"""Tests for exact optima and lower bounds."""

from __future__ import annotations

from fractions import Fraction

import pytest

from odtn.bounds import (
    brute_force_nonadaptive_opt,
    compute_bounds,
    entropy_lower_bound,
    opt_ssc_exact,
    optimal_policy_cost,
    sparsity_lower_bound,
    ssc_lower_bound,
)
from odtn.errors import DegenerateInstanceError, EnumerationInfeasibleError
from odtn.harness import ScriptedOracle, exact_policy_cost
from odtn.models import OdtnInstance
from odtn.nonident import Criterion, NonIdentPolicy
from odtn.settings import Caps
from tests.corpus import identifiable_corpus


def test_opt_of_separating_pair(separating_pair: OdtnInstance) -> None:
    assert optimal_policy_cost(separating_pair).cost == 1


def test_opt_of_balanced_split(balanced_four: OdtnInstance) -> None:
    assert optimal_policy_cost(balanced_four).cost == 2


def test_opt_of_star_instance_by_hand(noisy_three: OdtnInstance) -> None:
    # Test 1 splits {0, 1} from {2}; test 0 then settles 0 against 1.
    policy = optimal_policy_cost(noisy_three)
    assert policy.cost == Fraction(5, 3)
    assert exact_policy_cost(noisy_three, policy).cost == policy.cost


def test_opt_replays_its_decisions(balanced_four: OdtnInstance) -> None:
    policy = optimal_policy_cost(balanced_four)
    for truth in range(4):
        transcript = policy.run(ScriptedOracle(balanced_four, truth, []))
        assert transcript.identified == truth
        assert transcript.policy == "opt"
    assert policy.states > 0


def test_opt_dp_cap(balanced_four: OdtnInstance) -> None:
    with pytest.raises(EnumerationInfeasibleError):
        optimal_policy_cost(balanced_four, caps=Caps(dp_max_tests=1))


def test_opt_unreachable_stop_rule() -> None:
    assert optimal_policy_cost(OdtnInstance.from_rows(["+*"])).cost is None


def test_opt_with_clique_stop(twins: OdtnInstance) -> None:
    stop = NonIdentPolicy(twins, Criterion.CLIQUE).stop
    policy = optimal_policy_cost(twins, stop)
    assert policy.cost == Fraction(3, 2)


def test_ssc_separating_pair(separating_pair: OdtnInstance) -> None:
    assert opt_ssc_exact(separating_pair, 0) == 1
    assert ssc_lower_bound(separating_pair) == 1 == optimal_policy_cost(separating_pair).cost


def test_ssc_star_on_only_test() -> None:
    inst = OdtnInstance.from_rows(["*+-"])
    assert opt_ssc_exact(inst, 0) == 3


def test_ssc_unreachable() -> None:
    assert opt_ssc_exact(OdtnInstance.from_rows(["+*"]), 0) is None


def test_ssc_cap(uniform_eight: OdtnInstance) -> None:
    with pytest.raises(EnumerationInfeasibleError):
        opt_ssc_exact(uniform_eight, 0, Caps(ssc_max_m=4))


def test_entropy_bound(uniform_eight: OdtnInstance) -> None:
    assert entropy_lower_bound(uniform_eight) == pytest.approx(3.0)
    point = OdtnInstance.from_rows(["+-"], prior=[1, 0])
    assert entropy_lower_bound(point) == 0
    skewed = OdtnInstance.from_rows(["+--"], prior=["1/2", "1/4", "1/4"])
    assert entropy_lower_bound(skewed) == pytest.approx(1.5)


def test_sparsity_bound() -> None:
    quarter = OdtnInstance.from_rows(["++++----" + "*" * 8])
    assert sparsity_lower_bound(quarter) == 4
    half = OdtnInstance.from_rows(["+" * 8 + "-" * 8])
    assert sparsity_lower_bound(half) == 2


def test_sparsity_bound_without_eliminations() -> None:
    with pytest.raises(DegenerateInstanceError):
        sparsity_lower_bound(OdtnInstance.from_rows(["**"]))


def test_brute_force_nonadaptive(useless_first: OdtnInstance) -> None:
    assert brute_force_nonadaptive_opt(useless_first) == (Fraction(1), (1, 0))
    single = OdtnInstance.from_rows(["+-"])
    assert brute_force_nonadaptive_opt(single) == (Fraction(1), (0,))


def test_brute_force_cap(balanced_four: OdtnInstance) -> None:
    with pytest.raises(EnumerationInfeasibleError):
        brute_force_nonadaptive_opt(balanced_four, Caps(brute_force_max_n=1))


def test_bounds_are_ordered_on_corpus() -> None:
    for inst in identifiable_corpus(seed=6, count=12, star_rate=0.25):
        report = compute_bounds(inst)
        assert report.ssc_lb is not None
        assert report.opt_adaptive is not None
        assert report.opt_nonadaptive is not None
        assert report.ssc_lb <= report.opt_adaptive <= report.opt_nonadaptive


@pytest.mark.slow
def test_lower_bounds_hold_on_full_corpus() -> None:
    corpus = identifiable_corpus(seed=16, count=100, m_range=(3, 8), n_range=(3, 8), star_rate=0.2)
    for inst in corpus:
        opt = optimal_policy_cost(inst).cost
        assert opt is not None
        lower = ssc_lower_bound(inst)
        assert lower is not None
        assert lower <= opt
        assert sparsity_lower_bound(inst) <= opt


def test_entropy_is_below_opt_on_noiseless_corpus() -> None:
    for inst in identifiable_corpus(seed=8, count=10, star_rate=0.0):
        report = compute_bounds(inst)
        assert report.opt_adaptive is not None
        assert report.entropy_lb <= float(report.opt_adaptive) + 1e-9


def test_compute_bounds_skips_capped(uniform_eight: OdtnInstance) -> None:
    report = compute_bounds(uniform_eight, Caps(ssc_max_m=4, dp_max_tests=2))
    assert report.ssc_lb is None
    assert report.opt_adaptive is None
    assert report.opt_nonadaptive == 3
    assert report.sparsity_lb == 2
