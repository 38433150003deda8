import json
import math
import random

import pytest

from seqalloc import (
    DecisionProblem,
    Mode,
    Objective,
    PolicyClass,
    classify_policy,
    make_instance,
)
from seqalloc.mechanism import SizeGuardExceeded
from seqalloc import oracle
from conftest import random_instance


class TestEnumeration:
    def test_ba_two_agents_four_items(self):
        policies = set(oracle.enumerate_policies(PolicyClass.BALANCED_ALTERNATING, 2, 4))
        assert policies == {(0, 1, 1, 0), (1, 0, 0, 1)}

    def test_rb_two_agents_four_items(self):
        policies = list(oracle.enumerate_policies(PolicyClass.RECURSIVELY_BALANCED, 2, 4))
        assert len(policies) == 4

    def test_single_agent(self):
        assert list(oracle.enumerate_policies(PolicyClass.ALL, 1, 3)) == [(0, 0, 0)]

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("k", [1, 2])
    def test_counts_match_closed_forms(self, n, k):
        m = n * k
        expected = {
            PolicyClass.ALL: n**m,
            PolicyClass.BALANCED: math.factorial(m) // math.factorial(k) ** n,
            PolicyClass.RECURSIVELY_BALANCED: math.factorial(n) ** k,
            PolicyClass.BALANCED_ALTERNATING: math.factorial(n),
        }
        for cls, count in expected.items():
            policies = list(oracle.enumerate_policies(cls, n, m))
            assert len(policies) == count == oracle.class_size(cls, n, m)
            assert len(set(policies)) == count  # no duplicates

    @pytest.mark.parametrize(
        "cls",
        [
            PolicyClass.BALANCED,
            PolicyClass.RECURSIVELY_BALANCED,
            PolicyClass.BALANCED_ALTERNATING,
        ],
    )
    def test_membership(self, cls):
        inst = make_instance(3, [[0] * 6] * 3)
        for policy in oracle.enumerate_policies(cls, 3, 6):
            assert cls in classify_policy(policy, inst)

    def test_guard(self):
        with pytest.raises(SizeGuardExceeded):
            list(oracle.enumerate_policies(PolicyClass.ALL, 3, 20, guard=100))

    def test_divisibility_required(self):
        with pytest.raises(Exception):
            list(oracle.enumerate_policies(PolicyClass.BALANCED, 2, 3))


class TestBruteForce:
    def test_example1_max_egalitarian(self, example1):
        result = oracle.brute_force_optimum(
            example1, PolicyClass.ALL, Objective.EGALITARIAN, "max"
        )
        assert result.value == 1

    def test_remark1_balanced_utilitarian(self, remark1):
        result = oracle.brute_force_optimum(
            remark1, PolicyClass.BALANCED, Objective.UTILITARIAN, "max"
        )
        assert result.value == 14

    def test_single_agent_max_equals_min(self):
        inst = make_instance(1, [[2, 3, 4]])
        for direction in ("max", "min"):
            result = oracle.brute_force_optimum(
                inst, PolicyClass.ALL, Objective.UTILITARIAN, direction
            )
            assert result.value == 9

    def test_decide_consistent_with_optimum(self):
        rng = random.Random(37)
        for _ in range(30):
            inst = random_instance(rng, 2, 4, 4)
            for objective in Objective:
                maximum = oracle.brute_force_optimum(
                    inst, PolicyClass.ALL, objective, "max"
                ).value
                minimum = oracle.brute_force_optimum(
                    inst, PolicyClass.ALL, objective, "min"
                ).value
                for t in range(0, maximum + 2):
                    possible = oracle.brute_force_decide(
                        inst,
                        DecisionProblem(objective, Mode.POSSIBLE, t, PolicyClass.ALL),
                    )
                    necessary = oracle.brute_force_decide(
                        inst,
                        DecisionProblem(objective, Mode.NECESSARY, t, PolicyClass.ALL),
                    )
                    assert possible.answer == (maximum >= t)
                    assert necessary.answer == (minimum >= t)
                    if possible.answer:
                        assert possible.witness is not None
                    if not necessary.answer:
                        assert necessary.witness is not None

    def test_threshold_zero_always_yes(self, remark1):
        for mode in Mode:
            answer = oracle.brute_force_decide(
                remark1,
                DecisionProblem(Objective.EGALITARIAN, mode, 0, PolicyClass.ALL),
            )
            assert answer.answer


class TestDistribution:
    def test_remark1_egalitarian(self, remark1):
        dist = oracle.ba_welfare_distribution(remark1, Objective.EGALITARIAN)
        assert dist.entries == {3: 1, 6: 1}
        assert dist.total == 2
        assert dist.prob_at_least(5) == 0.5

    def test_single_agent_point_mass(self):
        inst = make_instance(1, [[2, 5]])
        dist = oracle.ba_welfare_distribution(inst, Objective.UTILITARIAN)
        assert dist.entries == {7: 1}

    def test_uniform_utilities_point_mass(self):
        inst = make_instance(2, [[1, 1, 1, 1], [1, 1, 1, 1]])
        dist = oracle.ba_welfare_distribution(inst, Objective.EGALITARIAN)
        assert len(dist.entries) == 1

    def test_total_matches_class_size(self):
        rng = random.Random(41)
        for n in (2, 3):
            inst = random_instance(rng, n, 2 * n, 4)
            dist = oracle.ba_welfare_distribution(inst, Objective.UTILITARIAN)
            assert dist.total == math.factorial(n)
            assert sum(dist.entries.values()) == dist.total


class TestMonteCarlo:
    def test_reproducible(self, remark1):
        a = oracle.monte_carlo_ba(remark1, Objective.EGALITARIAN, 5, 2000, seed=99)
        b = oracle.monte_carlo_ba(remark1, Objective.EGALITARIAN, 5, 2000, seed=99)
        assert json.dumps(a.to_document()) == json.dumps(b.to_document())

    def test_threshold_zero(self, remark1):
        est = oracle.monte_carlo_ba(remark1, Objective.EGALITARIAN, 0, 500, seed=1)
        assert est.estimate == 1.0

    def test_threshold_above_total(self, remark1):
        est = oracle.monte_carlo_ba(remark1, Objective.UTILITARIAN, 10**6, 500, seed=1)
        assert est.estimate == 0.0

    def test_converges_to_exact(self, remark1):
        # exact probability is 1/2; 4 sigma at 10000 samples is 0.02
        est = oracle.monte_carlo_ba(remark1, Objective.EGALITARIAN, 5, 10000, seed=7)
        assert abs(est.estimate - 0.5) <= 4 * math.sqrt(0.25 / 10000)
        assert est.ci_low <= 0.5 <= est.ci_high
