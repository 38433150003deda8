import json
import random

import pytest

from seqalloc import (
    Allocation,
    InstanceError,
    PolicyClass,
    classify_policy,
    derive_rankings,
    load_instance,
    make_instance,
    pad_to_multiple,
    parse_policy,
    format_policy,
    welfare,
)
from conftest import random_instance


class TestLoadInstance:
    def test_remark1_document(self):
        doc = json.dumps(
            {
                "agents": 2,
                "items": ["a", "b", "c", "d"],
                "utilities": [[5, 4, 2, 0], [8, 2, 1, 0]],
            }
        )
        inst = load_instance(doc)
        assert inst.n_agents == 2
        assert inst.n_items == 4
        assert inst.tie_break == ((0, 1, 2, 3), (0, 1, 2, 3))

    def test_degenerate_minimum(self):
        inst = load_instance({"agents": 1, "utilities": [[0]]})
        assert inst.n_agents == 1 and inst.n_items == 1

    def test_ragged_matrix(self):
        with pytest.raises(InstanceError, match="ragged"):
            load_instance({"agents": 2, "utilities": [[1, 2], [3]]})

    def test_negative_utility(self):
        with pytest.raises(InstanceError, match="negative"):
            load_instance({"agents": 1, "utilities": [[1, -2]]})

    def test_bad_permutation(self):
        with pytest.raises(InstanceError, match="tie_break"):
            load_instance({"agents": 1, "utilities": [[1, 2]], "tie_break": [[0, 0]]})

    def test_malformed_json(self):
        with pytest.raises(InstanceError, match="malformed"):
            load_instance("{nope")

    def test_missing_field(self):
        with pytest.raises(InstanceError, match="utilities"):
            load_instance({"agents": 2})


class TestDeriveRankings:
    def test_remark1_agent1(self, remark1):
        profile = derive_rankings(remark1)
        assert profile.rankings[0] == (0, 1, 2, 3)  # a, b, c, d

    def test_all_equal_default_tiebreak(self):
        inst = make_instance(2, [[3, 3, 3], [3, 3, 3]])
        profile = derive_rankings(inst)
        assert profile.rankings == ((0, 1, 2), (0, 1, 2))

    def test_custom_tiebreak(self):
        inst = make_instance(1, [[3, 3, 5]], tie_break=[[2, 0, 1]])
        assert derive_rankings(inst).rankings[0] == (2, 0, 1)

    def test_weakly_decreasing_on_random_instances(self):
        rng = random.Random(7)
        for _ in range(100):
            inst = random_instance(rng, rng.randint(1, 4), rng.randint(1, 6), 5)
            for agent, ranking in enumerate(derive_rankings(inst).rankings):
                assert sorted(ranking) == list(range(inst.n_items))
                values = [inst.utilities[agent][j] for j in ranking]
                assert values == sorted(values, reverse=True)


class TestPadToMultiple:
    def test_already_multiple(self, remark1):
        assert pad_to_multiple(remark1) is remark1

    def test_three_items_two_agents(self):
        inst = make_instance(2, [[1, 2, 3], [3, 2, 1]])
        padded = pad_to_multiple(inst)
        assert padded.n_items == 4
        assert padded.dummy_flags == (False, False, False, True)
        assert all(row[3] == 0 for row in padded.utilities)

    def test_five_items_three_agents(self):
        inst = make_instance(3, [[1] * 5] * 3)
        assert pad_to_multiple(inst).n_items == 6

    def test_rankings_preserved_on_real_items(self):
        rng = random.Random(11)
        for _ in range(50):
            inst = random_instance(rng, rng.randint(2, 4), rng.randint(1, 7), 4)
            padded = pad_to_multiple(inst)
            before = derive_rankings(inst).rankings
            after = derive_rankings(padded).rankings
            real = set(range(inst.n_items))
            for a in range(inst.n_agents):
                assert tuple(j for j in after[a] if j in real) == before[a]
                # dummies come last
                assert all(padded.dummy_flags[j] for j in after[a][inst.n_items:])


class TestWelfare:
    def test_remark1_sincere_outcome(self, remark1):
        report = welfare(remark1, Allocation(owner=(0, 1, 1, 0)))
        assert report.per_agent == (5, 3)
        assert report.utilitarian == 8
        assert report.egalitarian == 3

    def test_remark1_swapped(self, remark1):
        report = welfare(remark1, Allocation(owner=(1, 0, 0, 1)))
        assert report.per_agent == (6, 8)

    def test_empty_bundle_contributes_zero(self, remark1):
        report = welfare(remark1, Allocation(owner=(0, 0, 0, 0)))
        assert report.egalitarian == 0

    def test_sums_on_random_instances(self):
        rng = random.Random(3)
        for _ in range(100):
            inst = random_instance(rng, rng.randint(1, 3), rng.randint(1, 6), 6)
            owner = tuple(rng.randrange(inst.n_agents) for _ in range(inst.n_items))
            report = welfare(inst, Allocation(owner=owner))
            assert report.utilitarian == sum(report.per_agent)
            assert report.egalitarian == min(report.per_agent)
            assert report.egalitarian >= 0


class TestClassifyPolicy:
    def test_balanced_alternating(self, remark1):
        classes = classify_policy(parse_policy("1,2,2,1", 2), remark1)
        assert classes == {
            PolicyClass.ALL,
            PolicyClass.BALANCED,
            PolicyClass.RECURSIVELY_BALANCED,
            PolicyClass.BALANCED_ALTERNATING,
        }

    def test_balanced_only(self):
        inst = make_instance(2, [[0] * 8] * 2)
        classes = classify_policy(parse_policy("11112222", 2), inst)
        assert classes == {PolicyClass.ALL, PolicyClass.BALANCED}

    def test_recursively_balanced_not_alternating(self):
        inst = make_instance(2, [[0] * 6] * 2)
        classes = classify_policy(parse_policy("1,2,2,1,2,1", 2), inst)
        assert classes == {
            PolicyClass.ALL,
            PolicyClass.BALANCED,
            PolicyClass.RECURSIVELY_BALANCED,
        }

    def test_thue_morse_prefix_is_recursively_balanced(self):
        inst = make_instance(2, [[0] * 8] * 2)
        classes = classify_policy(parse_policy("12212112", 2), inst)
        assert PolicyClass.RECURSIVELY_BALANCED in classes

    def test_non_divisible_item_count(self):
        inst = make_instance(2, [[0] * 3] * 2)
        assert classify_policy(parse_policy("1,2,1", 2), inst) == {PolicyClass.ALL}

    def test_downward_closed_chain(self):
        rng = random.Random(5)
        chain = [
            PolicyClass.BALANCED_ALTERNATING,
            PolicyClass.RECURSIVELY_BALANCED,
            PolicyClass.BALANCED,
            PolicyClass.ALL,
        ]
        for _ in range(200):
            n, k = rng.randint(1, 3), rng.randint(1, 3)
            inst = make_instance(n, [[0] * (n * k)] * n)
            policy = tuple(rng.randrange(n) for _ in range(n * k))
            classes = classify_policy(policy, inst)
            for lower, upper in zip(chain, chain[1:]):
                assert lower not in classes or upper in classes


class TestPolicyText:
    def test_compact_digits(self):
        assert parse_policy("1221", 2) == (0, 1, 1, 0)

    def test_roundtrip(self):
        assert format_policy(parse_policy("3,1,2", 3)) == "3,1,2"

    def test_out_of_range(self):
        with pytest.raises(InstanceError):
            parse_policy("1,4", 3)
