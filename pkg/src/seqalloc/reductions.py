"""Hardness-gadget instance generators with auditable certificates.

Each generator emits a full welfare instance together with the decision
query it encodes, so the exhaustive oracle can confirm that the gadget
answers yes exactly when the source combinatorial problem is solvable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .mechanism import simulate
from .model import (
    DecisionProblem,
    Instance,
    InstanceError,
    Mode,
    Objective,
    Policy,
    PolicyClass,
    classify_policy,
    decision_problem_from_document,
    load_instance,
    make_instance,
    welfare,
)


@dataclass(frozen=True)
class GadgetInstance:
    kind: str  # "3dm" | "partition" | "equipartition" | "topk"
    instance: Instance
    query: DecisionProblem
    params: dict
    certificate: Optional[dict] = None

    def to_document(self) -> dict:
        return {
            "kind": self.kind,
            "instance": self.instance.to_document(),
            "query": self.query.to_document(),
            "params": self.params,
            "certificate": self.certificate,
        }


def gadget_from_document(document: dict) -> GadgetInstance:
    return GadgetInstance(
        kind=document["kind"],
        instance=load_instance(document["instance"]),
        query=decision_problem_from_document(document["query"]),
        params=document["params"],
        certificate=document.get("certificate"),
    )


def gen_numerical_3dm(
    x: Sequence[int], y: Sequence[int], z: Sequence[int], t: int, m: Optional[int] = None
) -> GadgetInstance:
    """Numerical 3-dimensional matching gadget.

    n agents; n big items (utility u + x_i + y_j for agent i on big item j,
    with u = 1 + sum(z)), n small items worth z_j to everyone, and m - 2n
    zero items.  Egalitarian welfare u + t is possible iff permutations
    sigma, pi make every x_i + y_sigma(i) + z_pi(i) equal t.
    """
    n = len(x)
    if not (len(y) == n and len(z) == n):
        raise InstanceError("x, y, z must have equal length")
    if sum(x) + sum(y) + sum(z) != n * t:
        raise InstanceError(f"sum(x)+sum(y)+sum(z) must equal n*t = {n * t}")
    if m is None:
        m = 2 * n
    if m < 2 * n:
        raise InstanceError(f"m must be at least 2n = {2 * n}")
    u = 1 + sum(z)
    labels = (
        [f"big{j + 1}" for j in range(n)]
        + [f"small{j + 1}" for j in range(n)]
        + [f"zero{j + 1}" for j in range(m - 2 * n)]
    )
    utilities = [
        [u + x[i] + y[j] for j in range(n)] + list(z) + [0] * (m - 2 * n)
        for i in range(n)
    ]
    inst = make_instance(n_agents=n, utilities=utilities, items=labels)
    certificate = None
    found = _search_3dm_certificate(x, y, z, t)
    if found is not None:
        certificate = {"sigma": found[0], "pi": found[1]}
    return GadgetInstance(
        kind="3dm",
        instance=inst,
        query=DecisionProblem(
            objective=Objective.EGALITARIAN,
            mode=Mode.POSSIBLE,
            threshold=u + t,
            policy_class=PolicyClass.ALL,
        ),
        params={"x": list(x), "y": list(y), "z": list(z), "t": t, "u": u, "m": m},
        certificate=certificate,
    )


def _search_3dm_certificate(
    x: Sequence[int], y: Sequence[int], z: Sequence[int], t: int
) -> Optional[tuple[list[int], list[int]]]:
    """Exhaustive (sigma, pi) search; permutations are 1-based in the output."""
    n = len(x)
    for sigma in itertools.permutations(range(n)):
        if any(x[i] + y[sigma[i]] > t for i in range(n)):
            continue
        for pi in itertools.permutations(range(n)):
            if all(x[i] + y[sigma[i]] + z[pi[i]] == t for i in range(n)):
                return [s + 1 for s in sigma], [p + 1 for p in pi]
    return None


def gen_partition_rb(a: Sequence[int]) -> GadgetInstance:
    """Partition gadget over recursively balanced policies for two agents.

    Identical utilities c with c_1 = 2B, paired decrements c_{2k} =
    c_{2k+1} = c_{2k-1} - a_k, and c_{2n} = 0; an egalitarian welfare of
    C/2 is reachable iff some round-start set I has sum(a_I) = B.
    """
    n = len(a)
    if n < 1 or any(v < 1 for v in a):
        raise InstanceError("a must be a nonempty sequence of positive integers")
    total = sum(a)
    if total % 2 != 0:
        raise InstanceError(f"sum(a) = {total} is odd; Partition needs an even sum")
    b = total // 2
    c = [0] * (2 * n)
    c[0] = total
    for k in range(1, n):
        c[2 * k - 1] = c[2 * k] = c[2 * k - 2] - a[k - 1]
    c[2 * n - 1] = 0
    # the recurrence must close: c_{2n-1} - a_n = 0
    assert c[2 * n - 2] - a[n - 1] == 0, "partition gadget recurrence violated"
    big_c = sum(c)
    assert big_c % 2 == 0
    inst = make_instance(n_agents=2, utilities=[c, c])
    certificate = None
    subset = _search_partition_certificate(a, b)
    if subset is not None:
        certificate = {"index_set": subset}
    return GadgetInstance(
        kind="partition",
        instance=inst,
        query=DecisionProblem(
            objective=Objective.EGALITARIAN,
            mode=Mode.POSSIBLE,
            threshold=big_c // 2,
            policy_class=PolicyClass.RECURSIVELY_BALANCED,
        ),
        params={"a": list(a), "B": b, "c": c, "C": big_c},
        certificate=certificate,
    )


def _search_partition_certificate(a: Sequence[int], b: int) -> Optional[list[int]]:
    """Smallest (lexicographic, 1-based) nonempty index set summing to b."""
    n = len(a)
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            if sum(a[i] for i in combo) == b:
                return [i + 1 for i in combo]
    return None


def gen_equipartition_balanced(a: Sequence[int]) -> GadgetInstance:
    """Equi-Partition gadget: two identical agents, equal-size equal-sum split."""
    n = len(a)
    if n % 2 != 0:
        raise InstanceError(f"need an even number of values, got {n}")
    if any(v < 0 for v in a):
        raise InstanceError("values must be nonnegative")
    total = sum(a)
    if total % 2 != 0:
        raise InstanceError(f"sum(a) = {total} is odd")
    inst = make_instance(n_agents=2, utilities=[list(a), list(a)])
    certificate = None
    half = n // 2
    for combo in itertools.combinations(range(n), half):
        if sum(a[i] for i in combo) == total // 2:
            certificate = {"index_set": [i + 1 for i in combo]}
            break
    return GadgetInstance(
        kind="equipartition",
        instance=inst,
        query=DecisionProblem(
            objective=Objective.EGALITARIAN,
            mode=Mode.POSSIBLE,
            threshold=total // 2,
            policy_class=PolicyClass.BALANCED,
        ),
        params={"a": list(a), "half_sum": total // 2},
        certificate=certificate,
    )


_TOPK_MODES = ("possible_egal", "possible_util", "necessary_egal", "necessary_util")


def topk_welfare_transform(
    prefs: Sequence[Sequence[int]],
    k: int,
    mode: str,
    policy_class: PolicyClass = PolicyClass.RECURSIVELY_BALANCED,
) -> GadgetInstance:
    """Turn a top-k set question about agent 1 into a welfare question.

    prefs holds each agent's strict ranking (0-based item indices, best
    first).  Agent 1's top-k items carry the only distinguishing utility;
    the remaining agents are uniform, so the welfare threshold is met
    exactly when agent 1 receives the whole top-k set.
    """
    if mode not in _TOPK_MODES:
        raise InstanceError(f"mode must be one of {_TOPK_MODES}")
    if policy_class not in (
        PolicyClass.RECURSIVELY_BALANCED,
        PolicyClass.BALANCED_ALTERNATING,
    ):
        raise InstanceError("transform targets recursively balanced or balanced alternating")
    n = len(prefs)
    if n < 2:
        raise InstanceError("need at least two agents")
    m = len(prefs[0])
    for i, ranking in enumerate(prefs):
        if sorted(ranking) != list(range(m)):
            raise InstanceError(f"prefs[{i}]: not a permutation of 0..{m - 1}")
    if not 1 <= k <= m:
        raise InstanceError(f"k must be in 1..{m}")
    top_k = set(prefs[0][:k])
    if mode == "possible_egal":
        special, uniform = k * k, k**3
        objective, dec_mode, threshold = Objective.EGALITARIAN, Mode.POSSIBLE, k**3
    elif mode == "necessary_egal":
        # total of k^2 spread over the top-k items: k per item
        special, uniform = k, k**3
        objective, dec_mode, threshold = Objective.EGALITARIAN, Mode.NECESSARY, k * k
    else:
        special, uniform = m * k * k, k
        objective = Objective.UTILITARIAN
        dec_mode = Mode.POSSIBLE if mode == "possible_util" else Mode.NECESSARY
        threshold = m * k**3
    utilities = [[special if j in top_k else 0 for j in range(m)]]
    for _ in range(1, n):
        utilities.append([uniform] * m)
    # tie-break along each agent's stated ranking so derived rankings match prefs
    inst = make_instance(
        n_agents=n, utilities=utilities, tie_break=[list(r) for r in prefs]
    )
    return GadgetInstance(
        kind="topk",
        instance=inst,
        query=DecisionProblem(
            objective=objective,
            mode=dec_mode,
            threshold=threshold,
            policy_class=policy_class,
        ),
        params={
            "prefs": [list(r) for r in prefs],
            "k": k,
            "mode": mode,
            "top_k": sorted(top_k),
        },
    )


def verify_witness(gadget: GadgetInstance, witness: dict | Policy) -> bool:
    """Check a structured certificate or a witness policy against the gadget."""
    if isinstance(witness, dict):
        return _verify_certificate(gadget, witness)
    return _verify_policy(gadget, tuple(witness))


def _verify_certificate(gadget: GadgetInstance, certificate: dict) -> bool:
    if gadget.kind == "3dm":
        if set(certificate) != {"sigma", "pi"}:
            raise InstanceError("3dm certificate needs 'sigma' and 'pi'")
        x, y, z, t = (
            gadget.params["x"],
            gadget.params["y"],
            gadget.params["z"],
            gadget.params["t"],
        )
        n = len(x)
        sigma = [s - 1 for s in certificate["sigma"]]
        pi = [p - 1 for p in certificate["pi"]]
        if sorted(sigma) != list(range(n)) or sorted(pi) != list(range(n)):
            return False
        return all(x[i] + y[sigma[i]] + z[pi[i]] == t for i in range(n))
    if gadget.kind in ("partition", "equipartition"):
        if "index_set" not in certificate:
            raise InstanceError(f"{gadget.kind} certificate needs 'index_set'")
        a = gadget.params["a"]
        indices = [i - 1 for i in certificate["index_set"]]
        if len(set(indices)) != len(indices) or any(
            not 0 <= i < len(a) for i in indices
        ):
            return False
        target = sum(a) // 2
        if gadget.kind == "partition":
            return bool(indices) and sum(a[i] for i in indices) == gadget.params["B"]
        return (
            len(indices) == len(a) // 2 and sum(a[i] for i in indices) == target
        )
    raise InstanceError(f"no structured certificate form for kind {gadget.kind!r}")


def _verify_policy(gadget: GadgetInstance, policy: Policy) -> bool:
    inst = gadget.instance
    if len(policy) != inst.n_items:
        raise InstanceError("witness policy length mismatch")
    alloc = simulate(inst, policy)
    if gadget.kind == "3dm":
        n = inst.n_agents
        t, u = gadget.params["t"], gadget.params["u"]
        bundles = alloc.bundles(n)
        for agent, bundle in enumerate(bundles):
            bigs = [j for j in bundle if inst.items[j].startswith("big")]
            smalls = [j for j in bundle if inst.items[j].startswith("small")]
            if len(bigs) != 1 or len(smalls) != 1:
                return False
            if inst.utilities[agent][bigs[0]] + inst.utilities[agent][smalls[0]] != u + t:
                return False
        return True
    if gadget.kind == "partition":
        if PolicyClass.RECURSIVELY_BALANCED not in classify_policy(policy, inst):
            return False
        a, b = gadget.params["a"], gadget.params["B"]
        starts = [policy[2 * r] for r in range(len(a))]
        index_set = [r for r, s in enumerate(starts) if s == 0]
        return sum(a[r] for r in index_set) == b
    # generic: the simulated welfare must meet the encoded threshold
    value = welfare(inst, alloc).value(gadget.query.objective)
    return value >= gadget.query.threshold
