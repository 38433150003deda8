"""FastAPI service wrapping the core library.

Error contract: domain input errors map to HTTP 400 with
{"detail": {"code": "input", ...}}; exceeded size guards map to 400 with
code "guard" so the CLI can translate them into its exit codes.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import oracle, reductions, solvers
from ..mechanism import SizeGuardExceeded, simulate
from ..model import (
    DecisionProblem,
    InstanceError,
    Mode,
    Objective,
    PolicyClass,
    classify_policy,
    format_policy,
    load_instance,
    parse_policy,
    welfare,
)
from . import schemas

app = FastAPI(title="seqalloc", version="0.1.0")


def _fail(code: str, message: str) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": code, "error": message})


def _instance(model: schemas.InstanceModel):
    try:
        return load_instance(model.model_dump())
    except InstanceError as exc:
        raise _fail("input", str(exc))


def _enum(kind, value: str):
    try:
        return kind(value)
    except ValueError:
        valid = ", ".join(e.value for e in kind)
        raise _fail("input", f"invalid value {value!r}; expected one of: {valid}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate_endpoint(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    inst = _instance(req.instance)
    try:
        policy = parse_policy(req.policy, inst.n_agents)
        alloc = simulate(inst, policy)
        classes = classify_policy(policy, inst)
    except InstanceError as exc:
        raise _fail("input", str(exc))
    report = welfare(inst, alloc)
    return schemas.SimulateResponse(
        allocation=alloc.to_document(inst),
        welfare=schemas.WelfareModel(**report.to_document()),
        classes=sorted(c.value for c in classes),
    )


@app.post("/solve", response_model=schemas.SolveResponse)
def solve_endpoint(req: schemas.SolveRequest) -> schemas.SolveResponse:
    inst = _instance(req.instance)
    policy_class = _enum(PolicyClass, req.policy_class)
    objective = _enum(Objective, req.objective)
    try:
        result, work = solvers.optimize(
            inst,
            policy_class,
            objective,
            direction=req.direction,
            exact_only=req.exact_only,
            guard=req.guard,
        )
    except SizeGuardExceeded as exc:
        raise _fail("guard", str(exc))
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return schemas.SolveResponse(
        value=result.value,
        policy=format_policy(result.policy),
        allocation=result.allocation.to_document(work),
        method=result.method,
        padded=work.n_items != inst.n_items,
    )


@app.post("/decide", response_model=schemas.DecideResponse)
def decide_endpoint(req: schemas.DecideRequest) -> schemas.DecideResponse:
    inst = _instance(req.instance)
    query = DecisionProblem(
        objective=_enum(Objective, req.objective),
        mode=_enum(Mode, req.mode),
        threshold=req.threshold,
        policy_class=_enum(PolicyClass, req.policy_class),
    )
    try:
        answer = solvers.decide(inst, query, exact_only=req.exact_only, guard=req.guard)
    except SizeGuardExceeded as exc:
        raise _fail("guard", str(exc))
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return schemas.DecideResponse(**answer.to_document())


@app.post("/enumerate", response_model=schemas.EnumerateResponse)
def enumerate_endpoint(req: schemas.EnumerateRequest) -> schemas.EnumerateResponse:
    inst = _instance(req.instance)
    policy_class = _enum(PolicyClass, req.policy_class)
    work = solvers._prepare(inst, policy_class)
    try:
        total = oracle.class_size(policy_class, work.n_agents, work.n_items)
        policies = []
        for policy in oracle.enumerate_policies(
            policy_class, work.n_agents, work.n_items, guard=req.guard
        ):
            if req.limit is not None and len(policies) >= req.limit:
                break
            policies.append(format_policy(policy))
    except SizeGuardExceeded as exc:
        raise _fail("guard", str(exc))
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return schemas.EnumerateResponse(
        policies=policies, total=total, truncated=len(policies) < total
    )


@app.post("/distribution", response_model=schemas.DistributionResponse)
def distribution_endpoint(req: schemas.DistributionRequest) -> schemas.DistributionResponse:
    inst = _instance(req.instance)
    objective = _enum(Objective, req.objective)
    try:
        work = solvers._prepare(inst, PolicyClass.BALANCED_ALTERNATING)
        dist = oracle.ba_welfare_distribution(work, objective, guard=req.guard)
    except SizeGuardExceeded as exc:
        raise _fail("guard", str(exc))
    except InstanceError as exc:
        raise _fail("input", str(exc))
    doc = dist.to_document()
    if req.threshold is not None:
        doc["prob_at_least"] = dist.prob_at_least(req.threshold)
    return schemas.DistributionResponse(**doc)


@app.post("/sample", response_model=schemas.SampleResponse)
def sample_endpoint(req: schemas.SampleRequest) -> schemas.SampleResponse:
    inst = _instance(req.instance)
    objective = _enum(Objective, req.objective)
    try:
        work = solvers._prepare(inst, PolicyClass.BALANCED_ALTERNATING)
        estimate = oracle.monte_carlo_ba(
            work, objective, req.threshold, req.samples, req.seed
        )
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return schemas.SampleResponse(**estimate.to_document())


@app.post("/generate/3dm", response_model=schemas.GadgetModel)
def generate_3dm(req: schemas.Generate3dmRequest) -> dict:
    try:
        gadget = reductions.gen_numerical_3dm(req.x, req.y, req.z, req.t, req.m)
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return gadget.to_document()


@app.post("/generate/partition", response_model=schemas.GadgetModel)
def generate_partition(req: schemas.GeneratePartitionRequest) -> dict:
    try:
        gadget = reductions.gen_partition_rb(req.a)
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return gadget.to_document()


@app.post("/generate/equipartition", response_model=schemas.GadgetModel)
def generate_equipartition(req: schemas.GeneratePartitionRequest) -> dict:
    try:
        gadget = reductions.gen_equipartition_balanced(req.a)
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return gadget.to_document()


@app.post("/generate/topk", response_model=schemas.GadgetModel)
def generate_topk(req: schemas.GenerateTopkRequest) -> dict:
    try:
        gadget = reductions.topk_welfare_transform(
            req.prefs, req.k, req.mode, PolicyClass(req.policy_class)
        )
    except (InstanceError, ValueError) as exc:
        raise _fail("input", str(exc))
    return gadget.to_document()


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify_endpoint(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    if (req.policy is None) == (req.certificate is None):
        raise _fail("input", "provide exactly one of 'policy' or 'certificate'")
    try:
        gadget = reductions.gadget_from_document(req.gadget.model_dump())
        if req.certificate is not None:
            valid = reductions.verify_witness(gadget, req.certificate)
        else:
            policy = parse_policy(req.policy, gadget.instance.n_agents)
            valid = reductions.verify_witness(gadget, policy)
    except InstanceError as exc:
        raise _fail("input", str(exc))
    return schemas.VerifyResponse(valid=valid)
