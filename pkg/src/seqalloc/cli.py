"""Command-line client for the seqalloc service.

By default the CLI talks to an in-process instance of the FastAPI app,
so no server needs to be running; point --url at a deployed service to
use it remotely.  Exit codes: 0 success / decision yes, 1 decision no,
2 usage or input error, 3 size guard exceeded.
"""
from __future__ import annotations

import json
import sys
from typing import Optional

import click

from .mechanism import simulate
from .model import (
    InstanceError,
    load_instance,
    pad_to_multiple,
    parse_policy,
    welfare,
)

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_GUARD = 3


class Client:
    def __init__(self, url: Optional[str]):
        if url:
            import httpx

            self._client = httpx.Client(base_url=url)
        else:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code == 200:
            return response.json()
        detail = response.json().get("detail")
        if isinstance(detail, dict) and detail.get("code") == "guard":
            _die(detail.get("error", "size guard exceeded"), EXIT_GUARD)
        if isinstance(detail, dict):
            _die(detail.get("error", str(detail)), EXIT_INPUT)
        _die(str(detail), EXIT_INPUT)


def _die(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _emit(document: dict) -> None:
    click.echo(json.dumps(document, sort_keys=True, indent=2))


def _read_instance(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        return load_instance(text).to_document()
    except OSError as exc:
        _die(f"cannot read {path}: {exc}", EXIT_INPUT)
    except InstanceError as exc:
        _die(str(exc), EXIT_INPUT)


def _reverify_policy(instance_doc: dict, policy_text: str, padded: bool, value=None, objective=None):
    """Re-simulate a reported policy locally before trusting the output."""
    inst = load_instance(instance_doc)
    if padded:
        inst = pad_to_multiple(inst)
    policy = parse_policy(policy_text, inst.n_agents)
    report = welfare(inst, simulate(inst, policy))
    if value is not None and report.value(objective_enum(objective)) != value:
        _die(
            f"service reported value {value} but policy re-simulates to "
            f"{report.value(objective_enum(objective))}",
            EXIT_INPUT,
        )


def objective_enum(name: str):
    from .model import Objective

    return Objective(name)


@click.group()
@click.option("--url", default=None, help="Base URL of a running service; default is in-process.")
@click.pass_context
def main(ctx: click.Context, url: Optional[str]):
    """Sequential allocation toolkit: simulate, solve, decide, enumerate, sample."""
    ctx.obj = Client(url)


@main.command("simulate")
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("-p", "--policy", required=True, help='Policy, e.g. "1,2,2,1" or "1221".')
@click.pass_obj
def simulate_cmd(client: Client, instance_path: str, policy: str):
    """Run sequential allocation under a policy."""
    doc = _read_instance(instance_path)
    result = client.post("/simulate", {"instance": doc, "policy": policy})
    _emit(result)


@main.command()
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("--class", "policy_class", default="all", show_default=True)
@click.option("--objective", default="utilitarian", show_default=True)
@click.option("--direction", default="max", type=click.Choice(["max", "min"]), show_default=True)
@click.option("--exact-only", is_flag=True, help="Fail instead of falling back to brute force.")
@click.option("--guard", default=10**7, show_default=True)
@click.pass_obj
def solve(client: Client, instance_path, policy_class, objective, direction, exact_only, guard):
    """Optimize welfare over a policy class."""
    doc = _read_instance(instance_path)
    result = client.post(
        "/solve",
        {
            "instance": doc,
            "policy_class": policy_class,
            "objective": objective,
            "direction": direction,
            "exact_only": exact_only,
            "guard": guard,
        },
    )
    _reverify_policy(doc, result["policy"], result["padded"], result["value"], objective)
    _emit(result)


@main.command()
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("--class", "policy_class", default="all", show_default=True)
@click.option("--objective", default="utilitarian", show_default=True)
@click.option("--mode", default="possible", type=click.Choice(["possible", "necessary"]))
@click.option("-t", "--threshold", required=True, type=int)
@click.option("--exact-only", is_flag=True)
@click.option("--guard", default=10**7, show_default=True)
@click.pass_obj
def decide(client: Client, instance_path, policy_class, objective, mode, threshold, exact_only, guard):
    """Answer a possible/necessary welfare question. Exit 0 = yes, 1 = no."""
    doc = _read_instance(instance_path)
    result = client.post(
        "/decide",
        {
            "instance": doc,
            "policy_class": policy_class,
            "objective": objective,
            "mode": mode,
            "threshold": threshold,
            "exact_only": exact_only,
            "guard": guard,
        },
    )
    if result["witness"] is not None:
        padded = policy_class != "all"
        _reverify_policy(doc, result["witness"], padded)
    _emit(result)
    sys.exit(EXIT_OK if result["answer"] else EXIT_NO)


@main.command()
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("--class", "policy_class", default="all", show_default=True)
@click.option("--limit", default=None, type=int, help="Emit at most this many policies.")
@click.option("--guard", default=10**7, show_default=True)
@click.pass_obj
def enumerate(client: Client, instance_path, policy_class, limit, guard):
    """List every policy of a class for this instance's dimensions."""
    doc = _read_instance(instance_path)
    result = client.post(
        "/enumerate",
        {"instance": doc, "policy_class": policy_class, "limit": limit, "guard": guard},
    )
    _emit(result)


@main.command()
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("--objective", default="egalitarian", show_default=True)
@click.option("-t", "--threshold", default=None, type=int)
@click.option("--guard", default=10**7, show_default=True)
@click.pass_obj
def distribution(client: Client, instance_path, objective, threshold, guard):
    """Exact welfare distribution of the balanced alternating lottery."""
    doc = _read_instance(instance_path)
    result = client.post(
        "/distribution",
        {"instance": doc, "objective": objective, "threshold": threshold, "guard": guard},
    )
    _emit(result)


@main.command()
@click.option("-i", "--instance", "instance_path", required=True, type=click.Path())
@click.option("--objective", default="egalitarian", show_default=True)
@click.option("-t", "--threshold", required=True, type=int)
@click.option("--samples", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def sample(client: Client, instance_path, objective, threshold, samples, seed):
    """Monte-Carlo estimate of the balanced alternating lottery."""
    doc = _read_instance(instance_path)
    result = client.post(
        "/sample",
        {
            "instance": doc,
            "objective": objective,
            "threshold": threshold,
            "samples": samples,
            "seed": seed,
        },
    )
    _emit(result)


@main.group()
def generate():
    """Generate hardness-gadget instances with queries and certificates."""


def _emit_gadget(gadget: dict, output: Optional[str]):
    text = json.dumps(gadget, sort_keys=True, indent=2)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        click.echo(f"wrote {output}", err=True)
    else:
        click.echo(text)


@generate.command("3dm")
@click.option("--x", required=True, help="Comma-separated integers.")
@click.option("--y", required=True)
@click.option("--z", required=True)
@click.option("-t", "--target", required=True, type=int)
@click.option("-m", "--items", "m", default=None, type=int)
@click.option("-o", "--output", default=None, type=click.Path())
@click.pass_obj
def generate_3dm(client: Client, x, y, z, target, m, output):
    """Numerical 3-dimensional matching gadget."""
    def ints(text):
        try:
            return [int(v) for v in text.split(",")]
        except ValueError:
            _die(f"cannot parse integer list {text!r}", EXIT_INPUT)

    result = client.post(
        "/generate/3dm", {"x": ints(x), "y": ints(y), "z": ints(z), "t": target, "m": m}
    )
    _emit_gadget(result, output)


@generate.command("partition")
@click.option("--values", "-a", required=True, help="Comma-separated positive integers.")
@click.option("-o", "--output", default=None, type=click.Path())
@click.pass_obj
def generate_partition(client: Client, values, output):
    """Partition gadget over recursively balanced policies."""
    try:
        a = [int(v) for v in values.split(",")]
    except ValueError:
        _die(f"cannot parse integer list {values!r}", EXIT_INPUT)
    result = client.post("/generate/partition", {"a": a})
    _emit_gadget(result, output)


@generate.command("equipartition")
@click.option("--values", "-a", required=True, help="Comma-separated integers.")
@click.option("-o", "--output", default=None, type=click.Path())
@click.pass_obj
def generate_equipartition(client: Client, values, output):
    """Equi-Partition gadget over balanced policies."""
    try:
        a = [int(v) for v in values.split(",")]
    except ValueError:
        _die(f"cannot parse integer list {values!r}", EXIT_INPUT)
    result = client.post("/generate/equipartition", {"a": a})
    _emit_gadget(result, output)


@generate.command("topk")
@click.option("--prefs", required=True, help='Rankings like "1,2,3;2,1,3" (1-based).')
@click.option("-k", required=True, type=int)
@click.option(
    "--mode",
    default="possible_egal",
    type=click.Choice(["possible_egal", "possible_util", "necessary_egal", "necessary_util"]),
)
@click.option("--class", "policy_class", default="recursively_balanced", show_default=True)
@click.option("-o", "--output", default=None, type=click.Path())
@click.pass_obj
def generate_topk(client: Client, prefs, k, mode, policy_class, output):
    """Top-k set question turned into a welfare gadget."""
    try:
        parsed = [[int(v) - 1 for v in row.split(",")] for row in prefs.split(";")]
    except ValueError:
        _die(f"cannot parse preference profile {prefs!r}", EXIT_INPUT)
    result = client.post(
        "/generate/topk",
        {"prefs": parsed, "k": k, "mode": mode, "policy_class": policy_class},
    )
    _emit_gadget(result, output)


@main.command()
@click.option("-g", "--gadget", "gadget_path", required=True, type=click.Path())
@click.option(
    "-w",
    "--witness",
    required=True,
    help="A policy string, or a JSON certificate (inline or @file). ",
)
@click.pass_obj
def verify(client: Client, gadget_path, witness):
    """Check a witness against a gadget file. Exit 0 = valid, 1 = invalid."""
    try:
        with open(gadget_path, "r", encoding="utf-8") as handle:
            gadget = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        _die(f"cannot read gadget {gadget_path}: {exc}", EXIT_INPUT)
    payload = {"gadget": gadget}
    text = witness
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            _die(f"cannot read witness file: {exc}", EXIT_INPUT)
    text = text.strip()
    if text.startswith("{"):
        try:
            payload["certificate"] = json.loads(text)
        except json.JSONDecodeError as exc:
            _die(f"malformed certificate JSON: {exc}", EXIT_INPUT)
    else:
        payload["policy"] = text
    result = client.post("/verify", payload)
    _emit(result)
    sys.exit(EXIT_OK if result["valid"] else EXIT_NO)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
