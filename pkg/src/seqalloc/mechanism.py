"""Sequential allocation with sincere picking, and allocation reachability.

Reachability follows the greedy policy-synthesis construction: an
allocation is produced by some policy under sincere picking iff the
greedy loop below completes.  Unreachable allocations can be repaired
with trading-cycle rotations that weakly improve every agent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    Allocation,
    Instance,
    InstanceError,
    Policy,
    derive_rankings,
    welfare,
)


class SizeGuardExceeded(RuntimeError):
    """An exhaustive search would exceed its configured size cap."""


def simulate(inst: Instance, policy: Policy) -> Allocation:
    """Run sequential allocation: each turn's agent takes their best remaining item."""
    m = inst.n_items
    if len(policy) != m:
        raise InstanceError(f"policy: length {len(policy)} != {m} items")
    rankings = derive_rankings(inst).rankings
    cursor = [0] * inst.n_agents  # next position to inspect in each agent's ranking
    taken = [False] * m
    owner = [-1] * m
    for agent in policy:
        if not 0 <= agent < inst.n_agents:
            raise InstanceError(f"policy: invalid agent index {agent}")
        rank = rankings[agent]
        pos = cursor[agent]
        while taken[rank[pos]]:
            pos += 1
        cursor[agent] = pos + 1
        item = rank[pos]
        taken[item] = True
        owner[item] = agent
    return Allocation(owner=tuple(owner))


@dataclass(frozen=True)
class SynthesisResult:
    policy: Optional[Policy]  # None iff the target is unreachable
    # On failure, the stuck state: items not yet placed and the per-agent
    # remaining target bundles.
    stuck_items: Optional[frozenset[int]] = None
    stuck_bundles: Optional[tuple[frozenset[int], ...]] = None

    @property
    def reached(self) -> bool:
        return self.policy is not None


def synthesize_policy(inst: Instance, target: Allocation) -> SynthesisResult:
    """Greedy construction of a policy whose sincere simulation yields `target`.

    Repeatedly appends the lowest-indexed agent whose top-ranked remaining
    item lies in their own remaining bundle; reports the stuck state if no
    agent qualifies.
    """
    if len(target.owner) != inst.n_items:
        raise InstanceError("target allocation is not total")
    rankings = derive_rankings(inst).rankings
    remaining = set(range(inst.n_items))
    bundles = [set(b) for b in target.bundles(inst.n_agents)]
    cursor = [0] * inst.n_agents
    policy: list[int] = []
    while remaining:
        picked = None
        for agent in range(inst.n_agents):
            if not bundles[agent]:
                continue
            rank = rankings[agent]
            pos = cursor[agent]
            while rank[pos] not in remaining:
                pos += 1
            cursor[agent] = pos
            if rank[pos] in bundles[agent]:
                picked = agent
                break
        if picked is None:
            return SynthesisResult(
                policy=None,
                stuck_items=frozenset(remaining),
                stuck_bundles=tuple(frozenset(b) for b in bundles),
            )
        item = rankings[picked][cursor[picked]]
        policy.append(picked)
        remaining.discard(item)
        bundles[picked].discard(item)
    return SynthesisResult(policy=tuple(policy))


def is_reachable(inst: Instance, target: Allocation) -> bool:
    return synthesize_policy(inst, target).reached


def improve_allocation(inst: Instance, alloc: Allocation) -> tuple[Allocation, Policy]:
    """Repair `alloc` into a reachable allocation via trading-cycle rotations.

    Whenever synthesis gets stuck, every agent with a remaining bundle
    demands their top remaining item from its current holder; following
    the demand map yields a cycle, and rotating the demanded items along
    it hands each cycle member an item they rank strictly higher than the
    one they give up.  Each agent's utility weakly increases and bundle
    sizes are preserved.
    """
    rankings = derive_rankings(inst).rankings
    rank_pos = [
        {item: pos for pos, item in enumerate(rank)} for rank in rankings
    ]
    owner = list(alloc.owner)
    max_rotations = inst.n_items * inst.n_items + 1
    for _ in range(max_rotations):
        result = synthesize_policy(inst, Allocation(owner=tuple(owner)))
        if result.reached:
            return Allocation(owner=tuple(owner)), result.policy
        remaining = result.stuck_items
        # Demand map over agents with nonempty remaining bundles; in a stuck
        # state no agent's top remaining item is their own.
        def demand(agent: int) -> int:
            return min(remaining, key=lambda j: rank_pos[agent][j])

        start = owner[next(iter(remaining))]
        seen: dict[int, int] = {}
        chain = []
        agent = start
        while agent not in seen:
            seen[agent] = len(chain)
            chain.append(agent)
            agent = owner[demand(agent)]
        cycle = chain[seen[agent]:]
        # Rotate: each cycle member receives their demanded item.
        for member in cycle:
            owner[demand(member)] = member
    raise AssertionError("trading-cycle improvement did not terminate")


def pareto_check_bruteforce(
    inst: Instance, alloc: Allocation, cap: int = 10**7
) -> Optional[Allocation]:
    """Exhaustively search for a Pareto improvement; None means efficient.

    Candidate space is all n^m allocations, guarded by `cap`.
    """
    n, m = inst.n_agents, inst.n_items
    if n**m > cap:
        raise SizeGuardExceeded(f"{n}^{m} allocations exceed cap {cap}")
    base = welfare(inst, alloc).per_agent
    owner = [0] * m
    while True:
        candidate = Allocation(owner=tuple(owner))
        per_agent = welfare(inst, candidate).per_agent
        if all(p >= b for p, b in zip(per_agent, base)) and per_agent != base:
            return candidate
        # next assignment in lexicographic order
        for j in range(m - 1, -1, -1):
            if owner[j] + 1 < n:
                owner[j] += 1
                break
            owner[j] = 0
        else:
            return None
