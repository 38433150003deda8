"""Core data model: instances, rankings, policies, allocations, welfare.

Agents and items are 0-based internally; all external text formats
(policy strings, allocation maps) are 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence


class InstanceError(ValueError):
    """Raised for malformed instance documents or inconsistent model values."""


class PolicyClass(str, Enum):
    ALL = "all"
    BALANCED = "balanced"
    RECURSIVELY_BALANCED = "recursively_balanced"
    BALANCED_ALTERNATING = "balanced_alternating"

    @property
    def chain_index(self) -> int:
        """Position in the containment chain, most restrictive first."""
        return _CHAIN.index(self)


# balanced_alternating ⊂ recursively_balanced ⊂ balanced ⊂ all
_CHAIN = [
    PolicyClass.BALANCED_ALTERNATING,
    PolicyClass.RECURSIVELY_BALANCED,
    PolicyClass.BALANCED,
    PolicyClass.ALL,
]


class Objective(str, Enum):
    UTILITARIAN = "utilitarian"
    EGALITARIAN = "egalitarian"


class Mode(str, Enum):
    POSSIBLE = "possible"
    NECESSARY = "necessary"


@dataclass(frozen=True)
class Instance:
    """An allocation instance: agents with additive integer utilities over items.

    tie_break[i] is a permutation of item indices; among equal-utility items
    agent i prefers the one appearing earlier in tie_break[i].  Dummy
    (padding) items carry zero utility for everyone and rank last.
    """

    n_agents: int
    items: tuple[str, ...]
    utilities: tuple[tuple[int, ...], ...]
    tie_break: tuple[tuple[int, ...], ...]
    dummy_flags: tuple[bool, ...]

    def __post_init__(self):
        n, m = self.n_agents, len(self.items)
        if n < 1:
            raise InstanceError("agents: must be a positive integer")
        if len(self.utilities) != n:
            raise InstanceError(
                f"utilities: expected {n} rows, got {len(self.utilities)}"
            )
        for i, row in enumerate(self.utilities):
            if len(row) != m:
                raise InstanceError(
                    f"utilities[{i}]: ragged matrix (expected {m} entries, got {len(row)})"
                )
            for j, u in enumerate(row):
                if not isinstance(u, int) or isinstance(u, bool):
                    raise InstanceError(f"utilities[{i}][{j}]: not an integer")
                if u < 0:
                    raise InstanceError(f"utilities[{i}][{j}]: negative utility {u}")
        if len(self.tie_break) != n:
            raise InstanceError(f"tie_break: expected {n} rows, got {len(self.tie_break)}")
        for i, perm in enumerate(self.tie_break):
            if sorted(perm) != list(range(m)):
                raise InstanceError(f"tie_break[{i}]: not a permutation of 0..{m - 1}")
        if len(self.dummy_flags) != m:
            raise InstanceError("dummy_flags: length mismatch")
        for j, dummy in enumerate(self.dummy_flags):
            if dummy and any(row[j] != 0 for row in self.utilities):
                raise InstanceError(f"item {j}: dummy item with nonzero utility")

    @property
    def n_items(self) -> int:
        return len(self.items)

    def utility(self, agent: int, item: int) -> int:
        return self.utilities[agent][item]

    def bundle_utility(self, agent: int, bundle: Iterable[int]) -> int:
        row = self.utilities[agent]
        return sum(row[j] for j in bundle)

    def real_items(self) -> list[int]:
        return [j for j in range(self.n_items) if not self.dummy_flags[j]]

    def to_document(self) -> dict:
        return {
            "agents": self.n_agents,
            "items": list(self.items),
            "utilities": [list(row) for row in self.utilities],
            "tie_break": [list(p) for p in self.tie_break],
            "dummy_flags": list(self.dummy_flags),
        }


def make_instance(
    n_agents: int,
    utilities: Sequence[Sequence[int]],
    items: Optional[Sequence[str]] = None,
    tie_break: Optional[Sequence[Sequence[int]]] = None,
    dummy_flags: Optional[Sequence[bool]] = None,
) -> Instance:
    """Build a validated Instance, filling in defaults.

    Default item labels are 1-based index strings; default tie-breaking is
    ascending item index for every agent.
    """
    if not utilities:
        raise InstanceError("utilities: empty matrix")
    m = len(utilities[0])
    if items is None:
        items = [str(j + 1) for j in range(m)]
    if len(set(items)) != len(items):
        raise InstanceError("items: duplicate labels")
    if tie_break is None:
        tie_break = [list(range(m))] * n_agents
    if dummy_flags is None:
        dummy_flags = [False] * m
    return Instance(
        n_agents=n_agents,
        items=tuple(items),
        utilities=tuple(tuple(row) for row in utilities),
        tie_break=tuple(tuple(p) for p in tie_break),
        dummy_flags=tuple(dummy_flags),
    )


def load_instance(document: str | dict) -> Instance:
    """Parse an instance from its JSON text form (or an already-parsed dict)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"malformed JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise InstanceError("instance document must be a JSON object")
    try:
        n_agents = document["agents"]
        utilities = document["utilities"]
    except KeyError as exc:
        raise InstanceError(f"missing field {exc.args[0]!r}") from exc
    if not isinstance(n_agents, int) or n_agents < 1:
        raise InstanceError("agents: must be a positive integer")
    if not isinstance(utilities, list) or not all(isinstance(r, list) for r in utilities):
        raise InstanceError("utilities: must be a matrix")
    return make_instance(
        n_agents=n_agents,
        utilities=utilities,
        items=document.get("items"),
        tie_break=document.get("tie_break"),
        dummy_flags=document.get("dummy_flags"),
    )


@dataclass(frozen=True)
class PreferenceProfile:
    """Per-agent strict rankings over item indices, most preferred first."""

    rankings: tuple[tuple[int, ...], ...]


def derive_rankings(inst: Instance) -> PreferenceProfile:
    """Strict rankings: utility descending, ties by tie_break, dummies last.

    Dummy items sort after every real item (real zero-utility items
    included) and among themselves by item index.
    """
    rankings = []
    for agent in range(inst.n_agents):
        row = inst.utilities[agent]
        tb_pos = {item: pos for pos, item in enumerate(inst.tie_break[agent])}

        def key(j, row=row, tb_pos=tb_pos):
            if inst.dummy_flags[j]:
                return (-row[j], 1, j)
            return (-row[j], 0, tb_pos[j])

        rankings.append(tuple(sorted(range(inst.n_items), key=key)))
    return PreferenceProfile(rankings=tuple(rankings))


def pad_to_multiple(inst: Instance) -> Instance:
    """Append zero-utility dummy items until |items| is a multiple of n_agents."""
    m, n = inst.n_items, inst.n_agents
    missing = (-m) % n
    if missing == 0:
        return inst
    labels = list(inst.items)
    for d in range(missing):
        label = f"dummy{d + 1}"
        while label in labels:
            label = "_" + label
        labels.append(label)
    new_indices = list(range(m, m + missing))
    return Instance(
        n_agents=n,
        items=tuple(labels),
        utilities=tuple(tuple(row) + (0,) * missing for row in inst.utilities),
        tie_break=tuple(tuple(p) + tuple(new_indices) for p in inst.tie_break),
        dummy_flags=inst.dummy_flags + (True,) * missing,
    )


@dataclass(frozen=True)
class Allocation:
    """A total assignment of items to agents."""

    owner: tuple[int, ...]  # item index -> agent index

    def bundles(self, n_agents: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(n_agents)]
        for item, agent in enumerate(self.owner):
            out[agent].append(item)
        return out

    def to_document(self, inst: Instance) -> dict:
        """JSON map from item label to 1-based agent index."""
        return {inst.items[j]: agent + 1 for j, agent in enumerate(self.owner)}


def allocation_from_document(inst: Instance, document: dict) -> Allocation:
    label_index = {label: j for j, label in enumerate(inst.items)}
    owner = [-1] * inst.n_items
    for label, agent in document.items():
        if label not in label_index:
            raise InstanceError(f"allocation: unknown item label {label!r}")
        if not isinstance(agent, int) or not 1 <= agent <= inst.n_agents:
            raise InstanceError(f"allocation[{label!r}]: invalid agent index {agent!r}")
        owner[label_index[label]] = agent - 1
    if -1 in owner:
        missing = inst.items[owner.index(-1)]
        raise InstanceError(f"allocation: item {missing!r} not assigned")
    return Allocation(owner=tuple(owner))


@dataclass(frozen=True)
class WelfareReport:
    per_agent: tuple[int, ...]
    utilitarian: int
    egalitarian: int

    def value(self, objective: Objective) -> int:
        return self.utilitarian if objective is Objective.UTILITARIAN else self.egalitarian

    def to_document(self) -> dict:
        return {
            "per_agent": list(self.per_agent),
            "utilitarian": self.utilitarian,
            "egalitarian": self.egalitarian,
        }


def welfare(inst: Instance, alloc: Allocation) -> WelfareReport:
    """Per-agent utility sums; an agent with an empty bundle contributes 0."""
    per_agent = [0] * inst.n_agents
    for item, agent in enumerate(alloc.owner):
        per_agent[agent] += inst.utilities[agent][item]
    return WelfareReport(
        per_agent=tuple(per_agent),
        utilitarian=sum(per_agent),
        egalitarian=min(per_agent),
    )


@dataclass(frozen=True)
class DecisionProblem:
    objective: Objective
    mode: Mode
    threshold: int
    policy_class: PolicyClass

    def to_document(self) -> dict:
        return {
            "objective": self.objective.value,
            "mode": self.mode.value,
            "threshold": self.threshold,
            "policy_class": self.policy_class.value,
        }


def decision_problem_from_document(document: dict) -> DecisionProblem:
    return DecisionProblem(
        objective=Objective(document["objective"]),
        mode=Mode(document["mode"]),
        threshold=int(document["threshold"]),
        policy_class=PolicyClass(document["policy_class"]),
    )


Policy = tuple[int, ...]


def parse_policy(text: str, n_agents: int) -> Policy:
    """Parse "1,2,2,1" or, for n ≤ 9, the compact digit form "1221"."""
    text = text.strip()
    if "," in text:
        parts = text.split(",")
    elif n_agents <= 9:
        parts = list(text)
    else:
        parts = [text]
    try:
        turns = tuple(int(p) - 1 for p in parts)
    except ValueError:
        raise InstanceError(f"policy: cannot parse {text!r}")
    for a in turns:
        if not 0 <= a < n_agents:
            raise InstanceError(f"policy: agent index {a + 1} out of range 1..{n_agents}")
    return turns


def format_policy(policy: Policy) -> str:
    return ",".join(str(a + 1) for a in policy)


def _rounds(policy: Policy, n_agents: int) -> list[tuple[int, ...]]:
    n = n_agents
    return [policy[r : r + n] for r in range(0, len(policy), n)]


def classify_policy(policy: Policy, inst: Instance) -> set[PolicyClass]:
    """All classes the policy belongs to, respecting the containment chain."""
    n, m = inst.n_agents, inst.n_items
    if len(policy) != m:
        raise InstanceError(f"policy: length {len(policy)} != {m} items")
    for a in policy:
        if not 0 <= a < n:
            raise InstanceError(f"policy: invalid agent index {a}")
    classes = {PolicyClass.ALL}
    if m % n != 0:
        return classes
    k = m // n
    counts = [0] * n
    for a in policy:
        counts[a] += 1
    if any(c != k for c in counts):
        return classes
    classes.add(PolicyClass.BALANCED)
    rounds = _rounds(policy, n)
    if any(sorted(r) != list(range(n)) for r in rounds):
        return classes
    classes.add(PolicyClass.RECURSIVELY_BALANCED)
    if all(rounds[i] == tuple(reversed(rounds[i - 1])) for i in range(1, k)):
        classes.add(PolicyClass.BALANCED_ALTERNATING)
    return classes
