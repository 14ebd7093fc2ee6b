"""Command-line front end for batch curation, rewards, and evaluation.

All bulk I/O is JSONL. The `kernel` subcommand speaks a one-request-per-
line JSON protocol on stdin/stdout so external training loops (and the
bindings package) can call the reward and loss kernels without importing
this library.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import CliConfig, load_config
from .curation import (
    CotValidation,
    HashingEmbedder,
    SurveyRecord,
    TitleIndex,
    build_cot_prompt,
    run_curation,
    split_dataset,
    validate_cot_response,
)
from .errors import JudgeUnavailable, OutlineKitError
from .jsonl import read_jsonl_lenient, write_jsonl
from .judging import (
    EvalPair,
    HttpJudgeClient,
    MockJudgeClient,
    evaluate_corpus,
    render_corpus_table,
)
from .model import OutlineSchema, parse_outline, serialize_outline, validate_schema
from .rewards import (
    GroupRollout,
    GrpoConfig,
    grpo_objective,
    group_advantages,
    sft_nll,
    total_reward,
)
from .treedist import EditCostModel, distance_report, tree_edit_distance

logger = logging.getLogger("outlinekit")


def _read_pool(path: str | None) -> list[str] | None:
    if path is None:
        return None
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip()]


def _load_records(path: str) -> tuple[list[SurveyRecord], int]:
    raw, skipped = read_jsonl_lenient(path)
    records: list[SurveyRecord] = []
    for obj in raw:
        try:
            records.append(SurveyRecord.from_dict(obj))
        except (OutlineKitError, ValueError, KeyError) as exc:
            logger.warning("skipping record %r: %s", obj.get("id"), exc)
            skipped += 1
    return records, skipped


def cmd_curate(args: argparse.Namespace, cfg: CliConfig) -> int:
    raw_records: list[dict] = []
    skipped = 0
    for snap in args.snapshots:
        objs, bad = read_jsonl_lenient(snap)
        raw_records.extend(objs)
        skipped += bad

    corpus = []
    for obj in raw_records:
        try:
            from .model import PaperMeta

            corpus.append(
                PaperMeta.from_dict(
                    {k: obj.get(k) for k in ("id", "title", "abstract", "update_date", "source")}
                )
            )
        except ValueError:
            continue
    index = TitleIndex(corpus)
    embedder = HashingEmbedder() if args.embedder == "hashing" else None

    records, rejections, stats = run_curation(
        raw_records, cfg.curation, corpus_index=index, embedder=embedder
    )
    write_jsonl(args.out, (r.to_dict() for r in records))
    rejections_path = args.rejections or str(Path(args.out).with_suffix(".rejections.jsonl"))
    write_jsonl(rejections_path, (r.to_dict() for r in rejections))

    for line in stats.lines():
        print(line)
    if skipped:
        print(f"malformed input lines skipped: {skipped}")
    print(f"wrote {len(records)} records to {args.out}")
    print(f"wrote {len(rejections)} rejections to {rejections_path}")
    return 0


def cmd_complete(args: argparse.Namespace, cfg: CliConfig) -> int:
    from .curation import complete_references
    from .model import PaperMeta

    records, _ = _load_records(args.records)
    corpus: list[PaperMeta] = []
    for snap in args.snapshots:
        objs, _ = read_jsonl_lenient(snap)
        for obj in objs:
            try:
                corpus.append(PaperMeta.from_dict(obj))
            except ValueError:
                continue
    index = TitleIndex(corpus)
    embedder = HashingEmbedder() if args.embedder == "hashing" else None

    completed = 0
    out_dicts = []
    for rec in records:
        before = sum(1 for p in rec.bibliography if p.abstract)
        enriched = complete_references(rec.bibliography, index, embedder, cfg.curation)
        completed += sum(1 for p in enriched if p.abstract) - before
        rec.bibliography = enriched
        rec.task.papers = enriched
        out_dicts.append(rec.to_dict())
    write_jsonl(args.out, out_dicts)
    print(f"completed {completed} abstracts across {len(records)} records")
    return 0


def cmd_split(args: argparse.Namespace, cfg: CliConfig) -> int:
    records, _ = _load_records(args.records)
    curation_cfg = cfg.curation
    if args.cutoff:
        from dataclasses import replace
        from datetime import date

        curation_cfg = replace(curation_cfg, test_cutoff_date=date.fromisoformat(args.cutoff))
    split = split_dataset(records, curation_cfg, args.rl_fraction, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("sft", split.sft), ("rl", split.rl), ("test", split.test)):
        path = out_dir / f"{name}.ids"
        path.write_text(
            "".join(f"{r.provenance.record_id}\n" for r in part), encoding="utf-8"
        )
        print(f"{name}: {len(part)} records -> {path}")
    return 0


def cmd_reward(args: argparse.Namespace, cfg: CliConfig) -> int:
    gen = parse_outline(Path(args.gen).read_text(encoding="utf-8"))
    ref = parse_outline(Path(args.ref).read_text(encoding="utf-8"))
    pool = _read_pool(args.pool)
    breakdown = total_reward(gen, ref, cfg.reward_config(args.lam), pool)
    print(json.dumps(breakdown.to_dict()))
    return 0


def cmd_distance(args: argparse.Namespace, cfg: CliConfig) -> int:
    gen = parse_outline(Path(args.gen).read_text(encoding="utf-8"))
    ref = parse_outline(Path(args.ref).read_text(encoding="utf-8"))
    print(json.dumps(distance_report(gen, ref, cfg.costs).to_dict()))
    return 0


def cmd_judge(args: argparse.Namespace, cfg: CliConfig) -> int:
    raw, _ = read_jsonl_lenient(args.pairs)
    pairs: list[EvalPair] = []
    labels: list[str] = []
    for obj in raw:
        try:
            pairs.append(
                EvalPair(
                    topic=str(obj["topic"]),
                    generated=parse_outline(obj["generated"]),
                    reference=parse_outline(obj["reference"]) if obj.get("reference") else None,
                )
            )
            labels.append(str(obj.get("id", obj["topic"]))[:40])
        except (OutlineKitError, KeyError) as exc:
            logger.warning("skipping pair %r: %s", obj.get("topic"), exc)
    if not pairs:
        print("no valid pairs to judge", file=sys.stderr)
        return 1

    if args.mock is not None:
        client = MockJudgeClient(score=args.mock)
    else:
        if not cfg.judge.base_url or not cfg.judge.model:
            print(
                "judge endpoint not configured (set judge.base_url/judge.model "
                "or pass --mock)",
                file=sys.stderr,
            )
            return 1
        client = HttpJudgeClient(
            base_url=cfg.judge.base_url,
            model=cfg.judge.model,
            api_key=cfg.judge.api_key,
            timeout=cfg.judge.timeout,
            retries=cfg.judge.retries,
            min_interval=cfg.judge.min_interval,
        )
    try:
        report = evaluate_corpus(
            pairs,
            client,
            concurrency_limit=cfg.judge.concurrency,
            samples_per_criterion=cfg.judge.samples_per_criterion,
            costs=cfg.costs,
        )
    except JudgeUnavailable as exc:
        print(f"judging failed: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_jsonl(out_dir / "items.jsonl", (r.to_dict() for r in report.items))
    (out_dir / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2), encoding="utf-8"
    )
    table = render_corpus_table(report, labels=labels)
    (out_dir / "table.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    if report.excluded_count:
        print(f"excluded {report.excluded_count} failed item(s)")
    return 0


def cmd_distill_prompts(args: argparse.Namespace, cfg: CliConfig) -> int:
    records, _ = _load_records(args.records)
    rows = []
    for rec in records:
        if not rec.task.papers:
            logger.warning("skipping %s: no papers", rec.provenance.record_id)
            continue
        rows.append({"id": rec.provenance.record_id, "prompt": build_cot_prompt(rec)})
    write_jsonl(args.out, rows)
    print(f"wrote {len(rows)} prompts to {args.out}")
    return 0


def cmd_validate_cot(args: argparse.Namespace, cfg: CliConfig) -> int:
    records, _ = _load_records(args.records)
    by_id = {r.provenance.record_id: r for r in records}
    responses, _ = read_jsonl_lenient(args.responses)

    results = []
    accepted_records = []
    for obj in responses:
        rid = str(obj.get("id", ""))
        record = by_id.get(rid)
        if record is None:
            results.append({"id": rid, "accepted": False, "reason": "unknown record id"})
            continue
        verdict: CotValidation = validate_cot_response(
            str(obj.get("response", "")), record, cfg.schema
        )
        results.append({"id": rid, "accepted": verdict.accepted, "reason": verdict.reason})
        if verdict.accepted:
            record.cot = verdict.reasoning
            accepted_records.append(record)
    write_jsonl(args.out, results)
    n_ok = sum(1 for r in results if r["accepted"])
    print(f"validated {len(results)} responses: {n_ok} accepted")
    if args.accepted_out:
        write_jsonl(args.accepted_out, (r.to_dict() for r in accepted_records))
        print(f"wrote {len(accepted_records)} records with reasoning to {args.accepted_out}")
    return 0


def _kernel_schema(data: dict | None) -> OutlineSchema:
    return OutlineSchema(**data) if data else OutlineSchema()


def _kernel_costs(data: dict | None) -> EditCostModel:
    return EditCostModel(**data) if data else EditCostModel()


def _handle_kernel_request(req: dict) -> dict:
    op = req.get("op")
    if op == "version":
        return {"version": __version__}
    if op == "parse":
        tree = parse_outline(req["text"])
        return {
            "canonical": serialize_outline(tree),
            "node_count": tree.node_count,
            "section_count": tree.section_count,
            "depth": tree.depth,
        }
    if op == "validate":
        tree = parse_outline(req["text"])
        result = validate_schema(tree, _kernel_schema(req.get("schema")), req.get("pool"))
        return {"passed": result.passed, "violations": result.violations}
    if op == "ted":
        a = parse_outline(req["a"])
        b = parse_outline(req["b"])
        return {"ted": tree_edit_distance(a, b, _kernel_costs(req.get("costs")))}
    if op == "distance":
        gen = parse_outline(req["gen"])
        ref = parse_outline(req["ref"])
        return distance_report(gen, ref, _kernel_costs(req.get("costs"))).to_dict()
    if op == "reward":
        gen = parse_outline(req["gen"])
        ref = parse_outline(req["ref"])
        from .rewards import RewardConfig

        reward_cfg = RewardConfig(
            lam=float(req.get("lambda", 0.9)),
            schema=_kernel_schema(req.get("schema")),
            costs=_kernel_costs(req.get("costs")),
        )
        return total_reward(gen, ref, reward_cfg, req.get("pool")).to_dict()
    if op == "advantages":
        return {
            "advantages": group_advantages(
                [float(x) for x in req["rewards"]], float(req.get("std_floor", 1e-8))
            )
        }
    if op == "grpo":
        group = GroupRollout.from_dict({"candidates": req["candidates"]})
        grpo_cfg = GrpoConfig(
            epsilon=float(req.get("epsilon", 0.2)),
            beta=float(req.get("beta", 0.04)),
            std_floor=float(req.get("std_floor", 1e-8)),
        )
        return grpo_objective(group, grpo_cfg).to_dict()
    if op == "nll":
        return {
            "nll": sft_nll([float(x) for x in req["logprobs"]], req.get("reduction", "sum"))
        }
    raise ValueError(f"unknown kernel op {op!r}")


def cmd_kernel(args: argparse.Namespace, cfg: CliConfig) -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            result = _handle_kernel_request(req)
            response = {"ok": True, "result": result}
        except Exception as exc:  # every error must come back on the wire
            response = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
        sys.stdout.write(json.dumps(response))
        sys.stdout.write("\n")
        sys.stdout.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outlinekit",
        description="Rewards, curation, and evaluation for survey outline generation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="path to YAML config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="filter a metadata snapshot into survey records")
    p.add_argument("snapshots", nargs="+", help="snapshot JSONL files")
    p.add_argument("--out", required=True, help="output records JSONL")
    p.add_argument("--rejections", help="rejection log JSONL (default: <out>.rejections.jsonl)")
    p.add_argument("--embedder", choices=["hashing", "none"], default="hashing")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("complete", help="fill missing abstracts from a snapshot corpus")
    p.add_argument("--records", required=True)
    p.add_argument("--snapshots", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embedder", choices=["hashing", "none"], default="hashing")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("split", help="split records into sft/rl/test manifests")
    p.add_argument("--records", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cutoff", help="test cutoff date YYYY-MM-DD (default from config)")
    p.add_argument("--rl-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("reward", help="total reward for a generated/reference pair")
    p.add_argument("--gen", required=True, help="generated outline file")
    p.add_argument("--ref", required=True, help="reference outline file")
    p.add_argument("--pool", help="file with one valid paper id per line")
    p.add_argument("--lam", type=float, help="override reward.lambda")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("distance", help="tree edit distance report for a pair")
    p.add_argument("--gen", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("judge", help="run the five-criterion judge over pairs")
    p.add_argument("--pairs", required=True, help="JSONL with topic/generated/reference")
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--mock",
        nargs="?",
        const=8.0,
        type=float,
        default=None,
        help="use the deterministic mock judge (optionally with a constant score)",
    )
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("distill-prompts", help="emit one reasoning prompt per record")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distill_prompts)

    p = sub.add_parser("validate-cot", help="validate distillation responses")
    p.add_argument("--records", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--accepted-out", help="also write accepted records with reasoning")
    p.set_defaults(func=cmd_validate_cot)

    p = sub.add_parser("kernel", help="JSONL request/response kernel interface on stdio")
    p.set_defaults(func=cmd_kernel)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
    except (OutlineKitError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, cfg)
    except OutlineKitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
