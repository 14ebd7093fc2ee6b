#!/usr/bin/env python3
"""Generate frozen reference cases for the bindings differential suite.

Calls the primary library directly (in-process, no kernel subprocess) and
freezes its answers to JSONL. The TypeScript tests replay each request
through the kernel wire and compare against these records, so the two
routes to the same numbers are fully independent above the library itself.

Regenerate with:  python3 scripts/gen_reference.py [--seed N] [--out PATH]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from outlinekit import (
    EditCostModel,
    GroupRollout,
    GrpoConfig,
    OutlineSchema,
    RewardConfig,
    distance_report,
    group_advantages,
    grpo_objective,
    parse_outline,
    serialize_outline,
    sft_nll,
    total_reward,
    tree_edit_distance,
    validate_schema,
)

LETTERS = "abcdefghijklmnopqrstuvwxyz"
POOL = [f"p{i:02d}" for i in range(16)]

COUNTS = {
    "parse": 150,
    "validate": 100,
    "ted": 125,
    "distance": 125,
    "reward": 200,
    "advantages": 100,
    "grpo": 100,
    "nll": 100,
}


def rand_word(rng: random.Random, lo: int = 3, hi: int = 9) -> str:
    return "".join(rng.choice(LETTERS) for _ in range(rng.randint(lo, hi)))


def rand_title(rng: random.Random) -> str:
    return " ".join(rand_word(rng) for _ in range(rng.randint(1, 4)))


def rand_outline(
    rng: random.Random,
    max_nodes: int = 14,
    max_level: int = 4,
    allow_jumps: bool = False,
) -> str:
    """Random outline text mixing heading syntaxes.

    With allow_jumps, heading levels may skip ahead of parent+1; the parser
    clamps those, which is exactly what the parse cases should exercise.
    """
    n = rng.randint(1, max_nodes)
    levels = [1]
    for _ in range(n - 1):
        if allow_jumps and rng.random() < 0.3:
            levels.append(rng.randint(1, max_level + 2))
        else:
            levels.append(rng.randint(1, min(levels[-1] + 1, max_level)))
    style = rng.choice(["atx", "dotted", "mixed"])
    counters = [0] * (max_level + 4)
    lines: list[str] = []
    for lvl in levels:
        title = rand_title(rng)
        cites = ""
        if rng.random() < 0.35:
            cites = " [" + "; ".join(rng.sample(POOL, rng.randint(1, 3))) + "]"
        use_atx = style == "atx" or (style == "mixed" and rng.random() < 0.5)
        if use_atx:
            lines.append("#" * lvl + " " + title + cites)
        else:
            for i in range(1, lvl):
                if counters[i] == 0:
                    counters[i] = 1
            counters[lvl] += 1
            for i in range(lvl + 1, len(counters)):
                counters[i] = 0
            number = ".".join(str(counters[i]) for i in range(1, lvl + 1))
            lines.append(number + ". " + title + cites)
        if rng.random() < 0.1:
            lines.append("")
    return "\n".join(lines)


def rand_schema(rng: random.Random) -> dict:
    schema: dict = {}
    if rng.random() < 0.6:
        schema["max_depth"] = rng.choice([2, 3, 4, 5])
    if rng.random() < 0.5:
        schema["min_top_sections"] = rng.choice([1, 2, 3])
    if rng.random() < 0.5:
        schema["max_top_sections"] = rng.choice([4, 8, 20])
    if rng.random() < 0.4:
        schema["max_heading_chars"] = rng.choice([20, 60, 200])
    if rng.random() < 0.4:
        schema["require_citations_subset"] = rng.random() < 0.7
    return schema


def rand_costs(rng: random.Random) -> dict:
    costs: dict = {}
    if rng.random() < 0.7:
        costs["insert_cost"] = rng.choice([0.5, 1.0, 1.5, 2.0])
    if rng.random() < 0.7:
        costs["delete_cost"] = rng.choice([0.5, 1.0, 1.5, 2.0])
    if rng.random() < 0.5:
        costs["relabel_cost_mode"] = rng.choice(["shape_only", "label_aware"])
    return costs


def rand_pool(rng: random.Random) -> list[str]:
    k = rng.randint(4, len(POOL))
    return sorted(rng.sample(POOL, k))


def rand_rewards(rng: random.Random) -> list[float]:
    size = rng.randint(2, 16)
    kind = rng.random()
    if kind < 0.1:
        return [rng.choice([0.0, 0.5, 1.0])] * size
    if kind < 0.2:
        base = rng.uniform(-1, 1)
        return [base + rng.randint(-3, 3) * 1e-13 for _ in range(size)]
    return [rng.uniform(-2, 2) for _ in range(size)]


def rand_candidates(rng: random.Random) -> list[dict]:
    group = []
    rewards = rand_rewards(rng)[: rng.randint(2, 6)]
    while len(rewards) < 2:
        rewards.append(rng.uniform(0, 1))
    for reward in rewards:
        n_tok = rng.randint(1, 24)
        policy = [rng.uniform(-3.0, 0.0) for _ in range(n_tok)]
        spread = rng.choice([0.05, 0.5, 2.0])
        old = [p + rng.uniform(-spread, spread) for p in policy]
        ref = [p + rng.uniform(-spread, spread) for p in policy]
        old = [min(x, 0.0) for x in old]
        ref = [min(x, 0.0) for x in ref]
        group.append(
            {
                "policy_logprobs": policy,
                "old_logprobs": old,
                "ref_logprobs": ref,
                "reward": reward,
            }
        )
    return group


def rand_logprobs(rng: random.Random) -> list[float]:
    n = rng.randint(1, 50)
    if rng.random() < 0.1:
        return [0.0] * n
    return [rng.uniform(-5.0, 0.0) for _ in range(n)]


def build_request(rng: random.Random, op: str) -> dict:
    if op == "parse":
        return {"text": rand_outline(rng, allow_jumps=True)}
    if op == "validate":
        req: dict = {"text": rand_outline(rng, max_level=5)}
        schema = rand_schema(rng)
        if schema:
            req["schema"] = schema
        if rng.random() < 0.6:
            req["pool"] = rand_pool(rng)
        return req
    if op == "ted":
        req = {"a": rand_outline(rng), "b": rand_outline(rng)}
        if rng.random() < 0.15:
            req["b"] = req["a"]
        costs = rand_costs(rng)
        if costs:
            req["costs"] = costs
        return req
    if op == "distance":
        req = {"gen": rand_outline(rng), "ref": rand_outline(rng)}
        if rng.random() < 0.15:
            req["ref"] = req["gen"]
        costs = rand_costs(rng)
        if costs:
            req["costs"] = costs
        return req
    if op == "reward":
        req = {"gen": rand_outline(rng), "ref": rand_outline(rng)}
        if rng.random() < 0.8:
            req["lambda"] = rng.uniform(0.0, 1.0)
        schema = rand_schema(rng)
        if schema:
            req["schema"] = schema
        costs = rand_costs(rng)
        if costs:
            req["costs"] = costs
        if rng.random() < 0.5:
            req["pool"] = rand_pool(rng)
        return req
    if op == "advantages":
        req = {"rewards": rand_rewards(rng)}
        if rng.random() < 0.3:
            req["std_floor"] = rng.choice([1e-8, 1e-6, 1e-4])
        return req
    if op == "grpo":
        req = {"candidates": rand_candidates(rng)}
        if rng.random() < 0.7:
            req["epsilon"] = rng.choice([0.1, 0.2, 0.3])
        if rng.random() < 0.7:
            req["beta"] = rng.choice([0.0, 0.04, 0.1])
        return req
    if op == "nll":
        req = {"logprobs": rand_logprobs(rng)}
        if rng.random() < 0.5:
            req["reduction"] = rng.choice(["sum", "token_mean"])
        return req
    raise ValueError(f"unknown op {op!r}")


def expected_result(req: dict, op: str) -> dict:
    """Compute the answer with direct library calls, mirroring the kernel."""
    schema = OutlineSchema(**req["schema"]) if req.get("schema") else OutlineSchema()
    costs = EditCostModel(**req["costs"]) if req.get("costs") else EditCostModel()
    if op == "parse":
        tree = parse_outline(req["text"])
        return {
            "canonical": serialize_outline(tree),
            "node_count": tree.node_count,
            "section_count": tree.section_count,
            "depth": tree.depth,
        }
    if op == "validate":
        result = validate_schema(parse_outline(req["text"]), schema, req.get("pool"))
        return {"passed": result.passed, "violations": result.violations}
    if op == "ted":
        return {"ted": tree_edit_distance(parse_outline(req["a"]), parse_outline(req["b"]), costs)}
    if op == "distance":
        return distance_report(parse_outline(req["gen"]), parse_outline(req["ref"]), costs).to_dict()
    if op == "reward":
        cfg = RewardConfig(lam=req.get("lambda", 0.9), schema=schema, costs=costs)
        return total_reward(
            parse_outline(req["gen"]), parse_outline(req["ref"]), cfg, req.get("pool")
        ).to_dict()
    if op == "advantages":
        return {"advantages": group_advantages(req["rewards"], req.get("std_floor", 1e-8))}
    if op == "grpo":
        group = GroupRollout.from_dict({"candidates": req["candidates"]})
        cfg = GrpoConfig(
            epsilon=req.get("epsilon", 0.2),
            beta=req.get("beta", 0.04),
            std_floor=req.get("std_floor", 1e-8),
        )
        return grpo_objective(group, cfg).to_dict()
    if op == "nll":
        return {"nll": sft_nll(req["logprobs"], req.get("reduction", "sum"))}
    raise ValueError(f"unknown op {op!r}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20240817)
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "tests" / "data" / "reference_cases.jsonl",
    )
    args = parser.parse_args()

    rng = random.Random(args.seed)
    cases = []
    for op, count in COUNTS.items():
        for i in range(count):
            req = build_request(rng, op)
            cases.append(
                {
                    "id": f"{op}-{i:04d}",
                    "op": op,
                    "request": req,
                    "expect": expected_result(req, op),
                }
            )

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case) + "\n")
    print(f"wrote {len(cases)} cases to {args.out}")


if __name__ == "__main__":
    main()
