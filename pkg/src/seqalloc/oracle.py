"""Exhaustive ground truth over policy classes, plus the lottery analysis.

Everything here is exponential by design and guarded by a policy-count
cap; the hardness landscape makes unguarded enumeration a footgun.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterator, Optional

from .mechanism import SizeGuardExceeded, simulate
from .model import (
    DecisionProblem,
    Instance,
    InstanceError,
    Mode,
    Objective,
    Policy,
    PolicyClass,
    welfare,
)

DEFAULT_GUARD = 10**7


def class_size(policy_class: PolicyClass, n: int, m: int) -> int:
    """Closed-form number of policies in the class."""
    if policy_class is PolicyClass.ALL:
        return n**m
    if m % n != 0:
        raise InstanceError(f"{m} items not divisible by {n} agents")
    k = m // n
    if policy_class is PolicyClass.BALANCED:
        return math.factorial(m) // math.factorial(k) ** n
    if policy_class is PolicyClass.RECURSIVELY_BALANCED:
        return math.factorial(n) ** k
    return math.factorial(n)  # balanced alternating


def _multiset_permutations(elements: list[int]) -> Iterator[tuple[int, ...]]:
    """Distinct permutations of a multiset in lexicographic order."""
    current = sorted(elements)
    m = len(current)
    while True:
        yield tuple(current)
        # next lexicographic permutation
        i = m - 2
        while i >= 0 and current[i] >= current[i + 1]:
            i -= 1
        if i < 0:
            return
        j = m - 1
        while current[j] <= current[i]:
            j -= 1
        current[i], current[j] = current[j], current[i]
        current[i + 1:] = reversed(current[i + 1:])


def ba_policy(first_round: tuple[int, ...], k: int) -> Policy:
    """Balanced alternating policy from its first round: rounds alternate reversed."""
    rev = tuple(reversed(first_round))
    policy: tuple[int, ...] = ()
    for r in range(k):
        policy += first_round if r % 2 == 0 else rev
    return policy


def enumerate_policies(
    policy_class: PolicyClass, n: int, m: int, guard: int = DEFAULT_GUARD
) -> Iterator[Policy]:
    """Yield every policy of the class exactly once, in lexicographic order."""
    size = class_size(policy_class, n, m)
    if size > guard:
        raise SizeGuardExceeded(
            f"{policy_class.value} policy space has {size} policies, cap {guard}"
        )
    if policy_class is PolicyClass.ALL:
        yield from itertools.product(range(n), repeat=m)
        return
    k = m // n
    if policy_class is PolicyClass.BALANCED:
        yield from _multiset_permutations([a for a in range(n) for _ in range(k)])
    elif policy_class is PolicyClass.RECURSIVELY_BALANCED:
        rounds = list(itertools.permutations(range(n)))
        for combo in itertools.product(rounds, repeat=k):
            yield tuple(a for rnd in combo for a in rnd)
    else:
        for first in itertools.permutations(range(n)):
            yield ba_policy(first, k)


@dataclass(frozen=True)
class BruteForceResult:
    value: int
    policy: Policy


def brute_force_optimum(
    inst: Instance,
    policy_class: PolicyClass,
    objective: Objective,
    direction: str = "max",
    guard: int = DEFAULT_GUARD,
) -> BruteForceResult:
    """Simulate every policy in the class; ties go to the lex-smallest policy."""
    if direction not in ("max", "min"):
        raise InstanceError(f"direction: expected 'max' or 'min', got {direction!r}")
    sign = 1 if direction == "max" else -1
    best: Optional[tuple[int, Policy]] = None
    for policy in enumerate_policies(policy_class, inst.n_agents, inst.n_items, guard):
        value = welfare(inst, simulate(inst, policy)).value(objective)
        if best is None or sign * value > sign * best[0]:
            best = (value, policy)
    assert best is not None
    return BruteForceResult(value=best[0], policy=best[1])


@dataclass(frozen=True)
class BruteForceDecision:
    answer: bool
    witness: Optional[Policy]  # yes-witness (possible) or counterexample (necessary)


def brute_force_decide(
    inst: Instance, query: DecisionProblem, guard: int = DEFAULT_GUARD
) -> BruteForceDecision:
    """Short-circuiting decision: first witness / first counterexample wins."""
    for policy in enumerate_policies(
        query.policy_class, inst.n_agents, inst.n_items, guard
    ):
        value = welfare(inst, simulate(inst, policy)).value(query.objective)
        if query.mode is Mode.POSSIBLE and value >= query.threshold:
            return BruteForceDecision(answer=True, witness=policy)
        if query.mode is Mode.NECESSARY and value < query.threshold:
            return BruteForceDecision(answer=False, witness=policy)
    return BruteForceDecision(answer=query.mode is Mode.NECESSARY, witness=None)


@dataclass(frozen=True)
class WelfareDistribution:
    """Exact welfare distribution over the balanced alternating lottery."""

    entries: dict[int, int]  # welfare value -> policy count
    total: int
    objective: Objective

    @property
    def mean(self) -> float:
        return sum(v * c for v, c in self.entries.items()) / self.total

    @property
    def min_value(self) -> int:
        return min(self.entries)

    @property
    def max_value(self) -> int:
        return max(self.entries)

    def prob_at_least(self, threshold: int) -> float:
        hits = sum(c for v, c in self.entries.items() if v >= threshold)
        return hits / self.total

    def to_document(self) -> dict:
        return {
            "entries": {str(v): c for v, c in sorted(self.entries.items())},
            "total": self.total,
            "objective": self.objective.value,
            "mean": self.mean,
            "min": self.min_value,
            "max": self.max_value,
        }


def ba_welfare_distribution(
    inst: Instance, objective: Objective, guard: int = DEFAULT_GUARD
) -> WelfareDistribution:
    """Exact distribution of welfare over all n! balanced alternating policies."""
    entries: dict[int, int] = {}
    total = 0
    for policy in enumerate_policies(
        PolicyClass.BALANCED_ALTERNATING, inst.n_agents, inst.n_items, guard
    ):
        value = welfare(inst, simulate(inst, policy)).value(objective)
        entries[value] = entries.get(value, 0) + 1
        total += 1
    return WelfareDistribution(entries=entries, total=total, objective=objective)


@dataclass(frozen=True)
class LotteryEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    samples: int
    seed: int

    def to_document(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "successes": self.successes,
            "samples": self.samples,
            "seed": self.seed,
        }


def _wilson_interval(successes: int, samples: int, z: float = 1.959964) -> tuple[float, float]:
    p = successes / samples
    denom = 1 + z * z / samples
    center = (p + z * z / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def monte_carlo_ba(
    inst: Instance,
    objective: Objective,
    threshold: int,
    samples: int,
    seed: int,
) -> LotteryEstimate:
    """Estimate P(welfare >= threshold) under the uniform balanced alternating lottery.

    First-round permutations are drawn with a seeded Fisher-Yates shuffle,
    so runs with the same seed are bit-identical.
    """
    if samples < 1:
        raise InstanceError("samples must be >= 1")
    n, m = inst.n_agents, inst.n_items
    if m % n != 0:
        raise InstanceError(f"{m} items not divisible by {n} agents")
    k = m // n
    rng = random.Random(seed)
    successes = 0
    first = list(range(n))
    for _ in range(samples):
        rng.shuffle(first)
        policy = ba_policy(tuple(first), k)
        value = welfare(inst, simulate(inst, policy)).value(objective)
        if value >= threshold:
            successes += 1
    low, high = _wilson_interval(successes, samples)
    return LotteryEstimate(
        estimate=successes / samples,
        ci_low=low,
        ci_high=high,
        successes=successes,
        samples=samples,
        seed=seed,
    )
