"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class InstanceModel(BaseModel):
    agents: int
    utilities: list[list[int]]
    items: Optional[list[str]] = None
    tie_break: Optional[list[list[int]]] = None
    dummy_flags: Optional[list[bool]] = None


class WelfareModel(BaseModel):
    per_agent: list[int]
    utilitarian: int
    egalitarian: int


class SimulateRequest(BaseModel):
    instance: InstanceModel
    policy: str


class SimulateResponse(BaseModel):
    allocation: dict[str, int]
    welfare: WelfareModel
    classes: list[str]


class SolveRequest(BaseModel):
    instance: InstanceModel
    policy_class: str = "all"
    objective: str = "utilitarian"
    direction: str = "max"
    exact_only: bool = False
    guard: int = 10**7


class SolveResponse(BaseModel):
    value: int
    policy: str
    allocation: dict[str, int]
    method: str
    padded: bool


class DecideRequest(BaseModel):
    instance: InstanceModel
    policy_class: str = "all"
    objective: str = "utilitarian"
    mode: str = "possible"
    threshold: int
    exact_only: bool = False
    guard: int = 10**7


class DecideResponse(BaseModel):
    answer: bool
    witness: Optional[str]
    method: str


class EnumerateRequest(BaseModel):
    instance: InstanceModel
    policy_class: str = "all"
    limit: Optional[int] = None
    guard: int = 10**7


class EnumerateResponse(BaseModel):
    policies: list[str]
    total: int
    truncated: bool


class DistributionRequest(BaseModel):
    instance: InstanceModel
    objective: str = "egalitarian"
    threshold: Optional[int] = None
    guard: int = 10**7


class DistributionResponse(BaseModel):
    entries: dict[str, int]
    total: int
    objective: str
    mean: float
    min: int
    max: int
    prob_at_least: Optional[float] = None


class SampleRequest(BaseModel):
    instance: InstanceModel
    objective: str = "egalitarian"
    threshold: int
    samples: int = Field(default=10000, ge=1)
    seed: int = 0


class SampleResponse(BaseModel):
    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    samples: int
    seed: int


class Generate3dmRequest(BaseModel):
    x: list[int]
    y: list[int]
    z: list[int]
    t: int
    m: Optional[int] = None


class GeneratePartitionRequest(BaseModel):
    a: list[int]


class GenerateTopkRequest(BaseModel):
    prefs: list[list[int]]
    k: int
    mode: str = "possible_egal"
    policy_class: str = "recursively_balanced"


class QueryModel(BaseModel):
    objective: str
    mode: str
    threshold: int
    policy_class: str


class GadgetModel(BaseModel):
    kind: str
    instance: InstanceModel
    query: QueryModel
    params: dict
    certificate: Optional[dict] = None


class VerifyRequest(BaseModel):
    gadget: GadgetModel
    # exactly one of the two witness forms
    policy: Optional[str] = None
    certificate: Optional[dict] = None


class VerifyResponse(BaseModel):
    valid: bool
