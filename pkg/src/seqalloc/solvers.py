"""Exact solvers for welfare optimization and the decision dispatcher.

Polynomial routes exist only for some (class, objective, direction)
cells; everything else falls back to the guarded exhaustive oracle and
is tagged accordingly.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Optional

from . import oracle
from .mechanism import SizeGuardExceeded, improve_allocation, simulate
from .model import (
    Allocation,
    DecisionProblem,
    Instance,
    InstanceError,
    Mode,
    Objective,
    Policy,
    PolicyClass,
    derive_rankings,
    pad_to_multiple,
    welfare,
)

METHOD_POLYNOMIAL = "PolynomialExact"
METHOD_BRUTE_FORCE = "BruteForce"


class ExactOnlyUnavailable(SizeGuardExceeded):
    """Raised when --exact-only forbids the brute-force fallback."""


@dataclass(frozen=True)
class OptimumResult:
    value: int
    policy: Policy
    allocation: Allocation
    method: str

    def to_document(self, inst: Instance) -> dict:
        from .model import format_policy

        return {
            "value": self.value,
            "policy": format_policy(self.policy),
            "allocation": self.allocation.to_document(inst),
            "method": self.method,
        }


@dataclass(frozen=True)
class DecisionAnswer:
    answer: bool
    witness: Optional[Policy]
    method: str

    def to_document(self) -> dict:
        from .model import format_policy

        return {
            "answer": self.answer,
            "witness": None if self.witness is None else format_policy(self.witness),
            "method": self.method,
        }


def _verified(
    inst: Instance, value: int, policy: Policy, objective: Objective, method: str
) -> OptimumResult:
    """Every solver self-verifies: the witness must reproduce the value."""
    alloc = simulate(inst, policy)
    achieved = welfare(inst, alloc).value(objective)
    if achieved != value:
        raise AssertionError(
            f"solver witness achieves {achieved}, claimed {value} ({objective.value})"
        )
    return OptimumResult(value=value, policy=policy, allocation=alloc, method=method)


# ---------------------------------------------------------------------------
# Maximum utilitarian welfare, all policies: give each item to who values it most.


def max_utilitarian_all(inst: Instance) -> OptimumResult:
    value = sum(max(row[j] for row in inst.utilities) for j in range(inst.n_items))
    owner = []
    for j in range(inst.n_items):
        best = max(range(inst.n_agents), key=lambda a: (inst.utilities[a][j], -a))
        owner.append(best)
    _, policy = improve_allocation(inst, Allocation(owner=tuple(owner)))
    return _verified(inst, value, policy, Objective.UTILITARIAN, METHOD_POLYNOMIAL)


def min_egalitarian_all(inst: Instance) -> OptimumResult:
    """Minimum egalitarian welfare over all policies: zero unless there is one agent."""
    policy = (0,) * inst.n_items
    if inst.n_agents == 1:
        value = sum(inst.utilities[0])
    else:
        value = 0
    return _verified(inst, value, policy, Objective.EGALITARIAN, METHOD_POLYNOMIAL)


# ---------------------------------------------------------------------------
# Min-cost max-flow (successive shortest paths with node potentials).


class _MinCostFlow:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.graph: list[list[list[int]]] = [[] for _ in range(n_nodes)]
        # edge: [to, capacity, cost, index of reverse edge]

    def add_edge(self, u: int, v: int, cap: int, cost: int) -> None:
        self.graph[u].append([v, cap, cost, len(self.graph[v])])
        self.graph[v].append([u, 0, -cost, len(self.graph[u]) - 1])

    def min_cost_max_flow(self, s: int, t: int) -> tuple[int, int]:
        n = self.n
        INF = float("inf")
        # Bellman-Ford once for initial potentials (costs may be negative).
        potential = [INF] * n
        potential[s] = 0
        for _ in range(n - 1):
            changed = False
            for u in range(n):
                if potential[u] == INF:
                    continue
                for edge in self.graph[u]:
                    v, cap, cost, _ = edge
                    if cap > 0 and potential[u] + cost < potential[v]:
                        potential[v] = potential[u] + cost
                        changed = True
            if not changed:
                break
        flow = total_cost = 0
        while True:
            dist = [INF] * n
            dist[s] = 0
            parent: list[Optional[tuple[int, int]]] = [None] * n
            heap = [(0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for idx, edge in enumerate(self.graph[u]):
                    v, cap, cost, _ = edge
                    if cap <= 0 or potential[v] == INF:
                        continue
                    nd = d + cost + potential[u] - potential[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = (u, idx)
                        heapq.heappush(heap, (nd, v))
            if dist[t] == INF:
                return flow, total_cost
            for u in range(n):
                if dist[u] < INF:
                    potential[u] += dist[u]
            # bottleneck along the augmenting path
            push = INF
            v = t
            while v != s:
                u, idx = parent[v]
                push = min(push, self.graph[u][idx][1])
                v = u
            v = t
            while v != s:
                u, idx = parent[v]
                edge = self.graph[u][idx]
                edge[1] -= push
                self.graph[edge[0]][edge[3]][1] += push
                total_cost += push * edge[2]
                v = u
            flow += push


def max_utilitarian_balanced(inst: Instance) -> OptimumResult:
    """Flow formulation: k units per agent, unit edges agent->item at cost -utility."""
    n, m = inst.n_agents, inst.n_items
    if m % n != 0:
        raise InstanceError(f"{m} items not divisible by {n} agents (pad first)")
    k = m // n
    source, sink = n + m, n + m + 1
    net = _MinCostFlow(n + m + 2)
    for a in range(n):
        net.add_edge(source, a, k, 0)
        for j in range(m):
            net.add_edge(a, n + j, 1, -inst.utilities[a][j])
    for j in range(m):
        net.add_edge(n + j, sink, 1, 0)
    flow, cost = net.min_cost_max_flow(source, sink)
    assert flow == m, "flow must saturate every item"
    owner = [-1] * m
    for a in range(n):
        for edge in net.graph[a]:
            to, cap, _, _ = edge
            if n <= to < n + m and cap == 0:  # saturated agent->item edge
                owner[to - n] = a
    assert -1 not in owner
    _, policy = improve_allocation(inst, Allocation(owner=tuple(owner)))
    return _verified(inst, -cost, policy, Objective.UTILITARIAN, METHOD_POLYNOMIAL)


# ---------------------------------------------------------------------------
# Two-agent dynamic programs.


def two_agent_balanced_max(inst: Instance, objective: Objective) -> OptimumResult:
    """Best balanced allocation between two agents, realized as a policy.

    Item-by-item DP; states carry agent 1's item count plus either both
    utility sums (egalitarian) or the combined chosen sum (utilitarian).
    """
    n, m = inst.n_agents, inst.n_items
    if n != 2:
        raise InstanceError("two-agent solver requires exactly 2 agents")
    if m % 2 != 0:
        raise InstanceError(f"{m} items not divisible by 2 agents (pad first)")
    k = m // 2
    if objective is Objective.EGALITARIAN:
        # state (count1, u1, u2) -> choice that reached it
        states: dict[tuple[int, int, int], Optional[int]] = {(0, 0, 0): None}
        layers = [states]
        for j in range(m):
            u1j, u2j = inst.utilities[0][j], inst.utilities[1][j]
            nxt: dict[tuple[int, int, int], Optional[int]] = {}
            for (c1, u1, u2) in layers[-1]:
                if c1 < k:
                    nxt.setdefault((c1 + 1, u1 + u1j, u2), 0)
                if (j - c1) < k:
                    nxt.setdefault((c1, u1, u2 + u2j), 1)
            layers.append(nxt)
        finals = [s for s in layers[-1] if s[0] == k]
        best = max(finals, key=lambda s: (min(s[1], s[2]), s[1] + s[2]))
        value = min(best[1], best[2])
        # backtrack
        owner = []
        state = best
        for j in range(m - 1, -1, -1):
            choice = layers[j + 1][state]
            owner.append(choice)
            c1, u1, u2 = state
            if choice == 0:
                state = (c1 - 1, u1 - inst.utilities[0][j], u2)
            else:
                state = (c1, u1, u2 - inst.utilities[1][j])
        owner.reverse()
    else:
        # state (count1,) -> best combined sum, with parent choices
        NEG = -1
        dp = [[NEG] * (k + 1) for _ in range(m + 1)]
        choice = [[-1] * (k + 1) for _ in range(m + 1)]
        dp[0][0] = 0
        for j in range(m):
            u1j, u2j = inst.utilities[0][j], inst.utilities[1][j]
            for c1 in range(k + 1):
                if dp[j][c1] == NEG:
                    continue
                if c1 < k and dp[j][c1] + u1j > dp[j + 1][c1 + 1]:
                    dp[j + 1][c1 + 1] = dp[j][c1] + u1j
                    choice[j + 1][c1 + 1] = 0
                if (j - c1) < k and dp[j][c1] + u2j > dp[j + 1][c1]:
                    dp[j + 1][c1] = dp[j][c1] + u2j
                    choice[j + 1][c1] = 1
        value = dp[m][k]
        owner = []
        c1 = k
        for j in range(m, 0, -1):
            ch = choice[j][c1]
            owner.append(ch)
            if ch == 0:
                c1 -= 1
        owner.reverse()
    _, policy = improve_allocation(inst, Allocation(owner=tuple(owner)))
    return _verified(inst, value, policy, objective, METHOD_POLYNOMIAL)


def two_agent_rb_identical_max(inst: Instance, objective: Objective) -> OptimumResult:
    """Recursively balanced optimum for two agents sharing one ranking.

    Each round hands out the two best remaining items; the only choice is
    who picks first.  Utilitarian rounds are independent; egalitarian uses
    a DP over the pair of utility sums.
    """
    n, m = inst.n_agents, inst.n_items
    if n != 2:
        raise InstanceError("two-agent solver requires exactly 2 agents")
    if m % 2 != 0:
        raise InstanceError(f"{m} items not divisible by 2 agents (pad first)")
    rankings = derive_rankings(inst).rankings
    if rankings[0] != rankings[1]:
        raise InstanceError("agents must share the same derived ranking")
    order = rankings[0]
    k = m // 2
    rounds = [(order[2 * r], order[2 * r + 1]) for r in range(k)]
    u = inst.utilities
    if objective is Objective.UTILITARIAN:
        policy: list[int] = []
        value = 0
        for a, b in rounds:
            first_1 = u[0][a] + u[1][b]
            first_2 = u[1][a] + u[0][b]
            if first_1 >= first_2:
                policy.extend([0, 1])
                value += first_1
            else:
                policy.extend([1, 0])
                value += first_2
        return _verified(inst, value, tuple(policy), objective, METHOD_POLYNOMIAL)
    # egalitarian: state (u1, u2) -> first picker chosen this round
    layers: list[dict[tuple[int, int], Optional[int]]] = [{(0, 0): None}]
    for a, b in rounds:
        nxt: dict[tuple[int, int], Optional[int]] = {}
        for (u1, u2) in layers[-1]:
            nxt.setdefault((u1 + u[0][a], u2 + u[1][b]), 0)  # agent 1 first
            nxt.setdefault((u1 + u[0][b], u2 + u[1][a]), 1)  # agent 2 first
        layers.append(nxt)
    best = max(layers[-1], key=lambda s: (min(s), sum(s)))
    value = min(best)
    policy = []
    state = best
    for r in range(k - 1, -1, -1):
        a, b = rounds[r]
        first = layers[r + 1][state]
        if first == 0:
            policy.extend([1, 0])  # reversed; un-reversed at the end
            state = (state[0] - u[0][a], state[1] - u[1][b])
        else:
            policy.extend([0, 1])
            state = (state[0] - u[0][b], state[1] - u[1][a])
    policy.reverse()
    return _verified(inst, value, tuple(policy), objective, METHOD_POLYNOMIAL)


# ---------------------------------------------------------------------------
# House allocation (m = n): perfect matching above a welfare threshold.


def _perfect_matching(adj: list[list[int]], n: int) -> Optional[list[int]]:
    """Kuhn's augmenting-path matching; returns item->agent or None."""
    match_item = [-1] * n  # item -> agent

    def try_augment(agent: int, seen: list[bool]) -> bool:
        for item in adj[agent]:
            if seen[item]:
                continue
            seen[item] = True
            if match_item[item] == -1 or try_augment(match_item[item], seen):
                match_item[item] = agent
                return True
        return False

    for agent in range(n):
        if not try_augment(agent, [False] * n):
            return None
    return match_item


def house_allocation_egalitarian(inst: Instance, threshold: int) -> DecisionAnswer:
    """Possible egalitarian welfare >= threshold when there is one item per agent."""
    n, m = inst.n_agents, inst.n_items
    if m != n:
        raise InstanceError(f"house allocation requires m = n (got {m} items, {n} agents)")
    adj = [
        [j for j in range(m) if inst.utilities[a][j] >= threshold] for a in range(n)
    ]
    match_item = _perfect_matching(adj, n)
    if match_item is None:
        return DecisionAnswer(answer=False, witness=None, method=METHOD_POLYNOMIAL)
    owner = tuple(match_item)
    _, policy = improve_allocation(inst, Allocation(owner=owner))
    achieved = welfare(inst, simulate(inst, policy)).egalitarian
    assert achieved >= threshold
    return DecisionAnswer(answer=True, witness=policy, method=METHOD_POLYNOMIAL)


def house_allocation_max_egalitarian(inst: Instance) -> OptimumResult:
    """Binary search over distinct utility values for the best feasible threshold."""
    values = sorted({u for row in inst.utilities for u in row})
    lo, hi = 0, len(values) - 1
    # values[0] (the global minimum) is always feasible: the graph is complete.
    best = values[0]
    while lo <= hi:
        mid = (lo + hi) // 2
        if house_allocation_egalitarian(inst, values[mid]).answer:
            best = values[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    answer = house_allocation_egalitarian(inst, best)
    assert answer.answer and answer.witness is not None
    achieved = welfare(inst, simulate(inst, answer.witness)).egalitarian
    return _verified(inst, achieved, answer.witness, Objective.EGALITARIAN, METHOD_POLYNOMIAL)


# ---------------------------------------------------------------------------
# Dispatch: optimization and the Possible/Necessary decision problems.


def _polynomial_route(
    inst: Instance, policy_class: PolicyClass, objective: Objective, direction: str
) -> Optional[Callable[[Instance], OptimumResult]]:
    n, m = inst.n_agents, inst.n_items
    if n == 1:
        # One agent: every policy hands them everything.
        def solo(i: Instance) -> OptimumResult:
            return _verified(
                i, sum(i.utilities[0]), (0,) * i.n_items, objective, METHOD_POLYNOMIAL
            )

        return solo
    if direction == "max":
        if objective is Objective.UTILITARIAN:
            if policy_class is PolicyClass.ALL:
                return max_utilitarian_all
            if policy_class is PolicyClass.BALANCED:
                return max_utilitarian_balanced
        else:
            if policy_class is PolicyClass.ALL and m == n:
                return house_allocation_max_egalitarian
            if policy_class is PolicyClass.BALANCED and n == 2:
                return lambda i: two_agent_balanced_max(i, objective)
        if policy_class is PolicyClass.RECURSIVELY_BALANCED and n == 2:
            rankings = derive_rankings(inst).rankings
            if rankings[0] == rankings[1]:
                return lambda i: two_agent_rb_identical_max(i, objective)
    else:
        if policy_class is PolicyClass.ALL and objective is Objective.EGALITARIAN:
            return min_egalitarian_all
    return None


def _prepare(inst: Instance, policy_class: PolicyClass) -> Instance:
    """Auto-pad with dummy items for the classes that need divisibility."""
    if policy_class is PolicyClass.ALL:
        return inst
    return pad_to_multiple(inst)


def optimize(
    inst: Instance,
    policy_class: PolicyClass,
    objective: Objective,
    direction: str = "max",
    exact_only: bool = False,
    guard: int = oracle.DEFAULT_GUARD,
) -> tuple[OptimumResult, Instance]:
    """Best welfare over a policy class; returns the (possibly padded) instance too."""
    if direction not in ("max", "min"):
        raise InstanceError(f"direction: expected 'max' or 'min', got {direction!r}")
    work = _prepare(inst, policy_class)
    route = _polynomial_route(work, policy_class, objective, direction)
    if route is not None:
        return route(work), work
    if exact_only:
        raise ExactOnlyUnavailable(
            f"no polynomial algorithm for ({policy_class.value}, {objective.value}, "
            f"{direction}); rerun without --exact-only to use the guarded oracle"
        )
    result = oracle.brute_force_optimum(work, policy_class, objective, direction, guard)
    return (
        _verified(work, result.value, result.policy, objective, METHOD_BRUTE_FORCE),
        work,
    )


def decide(
    inst: Instance,
    query: DecisionProblem,
    exact_only: bool = False,
    guard: int = oracle.DEFAULT_GUARD,
) -> DecisionAnswer:
    """Possible <=> class maximum >= t; Necessary <=> class minimum >= t.

    A yes to Possible carries a witness policy; a no to Necessary carries
    a counterexample policy.
    """
    direction = "max" if query.mode is Mode.POSSIBLE else "min"
    work = _prepare(inst, query.policy_class)
    route = _polynomial_route(work, query.policy_class, query.objective, direction)
    if route is not None:
        result = route(work)
        meets = result.value >= query.threshold
        if query.mode is Mode.POSSIBLE:
            witness = result.policy if meets else None
        else:
            witness = None if meets else result.policy
        return DecisionAnswer(answer=meets, witness=witness, method=METHOD_POLYNOMIAL)
    if exact_only:
        raise ExactOnlyUnavailable(
            f"no polynomial algorithm for ({query.policy_class.value}, "
            f"{query.objective.value}, {query.mode.value}); rerun without "
            "--exact-only to use the guarded oracle"
        )
    decision = oracle.brute_force_decide(work, query, guard)
    return DecisionAnswer(
        answer=decision.answer, witness=decision.witness, method=METHOD_BRUTE_FORCE
    )
