"""Survey-corpus curation: filtering, cleanup, completion, and splitting.

Takes raw paper-metadata snapshot records (local JSONL dumps; nothing is
fetched) and produces survey records with a clean outline, a complete
bibliography, and a reasoning prompt for distillation.
"""

from __future__ import annotations

import binascii
import logging
import random
import re
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import EmbedderUnavailable, EmptyOutline, MalformedHeading
from .model import (
    OutlineNode,
    OutlineSchema,
    OutlineTree,
    PaperMeta,
    SurveyTask,
    ValidationResult,
    _norm_title,
    normalize_heading,
    parse_outline,
    serialize_outline,
    validate_schema,
)

logger = logging.getLogger(__name__)

COT_BEGIN = "<think>"
COT_END = "</think>"

STAGE_METADATA = "metadata"
STAGE_KEYWORD = "survey-keyword"
STAGE_PARSE = "outline-parse"
STAGE_STRUCTURE = "structural"
STAGE_REFCOUNT = "reference-count"
STAGE_INTEGRITY = "reference-integrity"


@dataclass
class CurationConfig:
    survey_keywords: list[str] = field(
        default_factory=lambda: ["survey", "review", "overview", "meta-analysis"]
    )
    min_top_sections: int = 3
    max_top_sections: int = 30
    max_depth: int = 4
    min_references: int = 10
    strip_sections: list[str] = field(
        default_factory=lambda: [
            "acknowledgment",
            "acknowledgements",
            "appendix",
            "funding",
            "conflict of interest",
            "author contributions",
        ]
    )
    similarity_threshold: float = 0.90
    test_cutoff_date: date = date(2025, 1, 1)

    def __post_init__(self) -> None:
        if not self.survey_keywords:
            raise ValueError("survey_keywords must be non-empty")
        if not (0.0 <= self.similarity_threshold <= 1.0):
            raise ValueError("similarity_threshold must be in [0, 1]")
        if self.min_top_sections > self.max_top_sections:
            raise ValueError("min_top_sections must be <= max_top_sections")


@dataclass
class Provenance:
    """Where a survey record came from: source corpus, id, and date."""

    source: str
    record_id: str
    update_date: date | None = None


@dataclass
class SurveyRecord:
    """One curated survey: task, cleaned outline, bibliography, provenance."""

    task: SurveyTask
    outline: OutlineTree
    bibliography: list[PaperMeta]
    provenance: Provenance
    cot: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.provenance.record_id,
            "source": self.provenance.source,
            "update_date": (
                self.provenance.update_date.isoformat()
                if self.provenance.update_date
                else None
            ),
            "topic": self.task.topic,
            "papers": [p.to_dict() for p in self.bibliography],
            "outline": serialize_outline(self.outline),
            "cot": self.cot,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurveyRecord":
        papers = [PaperMeta.from_dict(p) for p in d.get("papers", [])]
        outline = parse_outline(d["outline"])
        raw_date = d.get("update_date")
        return cls(
            task=SurveyTask(
                topic=str(d.get("topic", "")),
                papers=papers,
                reference_outline=outline,
            ),
            outline=outline,
            bibliography=papers,
            provenance=Provenance(
                source=d.get("source") or "other",
                record_id=str(d.get("id", "")),
                update_date=date.fromisoformat(str(raw_date)[:10]) if raw_date else None,
            ),
            cot=d.get("cot"),
        )


class EmbeddingProvider(Protocol):
    """Maps texts to fixed-dimension unit-norm vectors."""

    def embed(self, texts: list[str]) -> np.ndarray: ...


class HashingEmbedder:
    """Deterministic character n-gram hashing embedder.

    A stand-in for a sentence encoder that needs no model files: texts are
    lowercased, split into character n-grams, hashed into a fixed number of
    buckets, and L2-normalized. Identical strings embed identically.
    """

    def __init__(self, dim: int = 256, ngram: int = 3) -> None:
        if dim < 8:
            raise ValueError("dim must be >= 8")
        self.dim = dim
        self.ngram = ngram

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            s = _norm_title(text).lower()
            padded = f" {s} "
            if len(padded) < self.ngram:
                padded = padded.ljust(self.ngram)
            for i in range(len(padded) - self.ngram + 1):
                gram = padded[i : i + self.ngram]
                bucket = binascii.crc32(gram.encode("utf-8")) % self.dim
                out[row, bucket] += 1.0
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out


class TitleIndex:
    """Exact and nearest-neighbor lookup over a paper-metadata pool."""

    def __init__(self, papers: Sequence[PaperMeta]) -> None:
        self.papers = list(papers)
        self._by_title: dict[str, PaperMeta] = {}
        for p in self.papers:
            key = _norm_title(p.title).lower()
            existing = self._by_title.get(key)
            # among duplicate titles, prefer an entry that has an abstract
            if existing is None or (existing.abstract is None and p.abstract):
                self._by_title[key] = p
        self._matrix: np.ndarray | None = None
        self._matrix_embedder: object | None = None

    def __len__(self) -> int:
        return len(self.papers)

    def exact(self, title: str) -> PaperMeta | None:
        return self._by_title.get(_norm_title(title).lower())

    def nearest(
        self, title: str, embedder: EmbeddingProvider
    ) -> tuple[PaperMeta, float] | None:
        if not self.papers:
            return None
        if self._matrix is None or self._matrix_embedder is not embedder:
            self._matrix = embedder.embed([p.title for p in self.papers])
            self._matrix_embedder = embedder
        query = embedder.embed([title])[0]
        sims = self._matrix @ query
        best = int(np.argmax(sims))
        return self.papers[best], float(sims[best])


def is_survey_candidate(meta: PaperMeta, cfg: CurationConfig | None = None) -> bool:
    """True iff any survey keyword occurs as a whole word in the title.

    Matching is case-insensitive and hyphens count as word boundaries, so
    "Peer-review dynamics" is a candidate.
    """
    cfg = cfg or CurationConfig()
    title = meta.title.lower()
    for kw in cfg.survey_keywords:
        if re.search(rf"\b{re.escape(kw.lower())}\b", title):
            return True
    return False


@dataclass
class FilterDecision:
    accepted: bool
    reason: str | None = None


def structural_filter(
    outline: OutlineTree, cfg: CurationConfig | None = None
) -> FilterDecision:
    """Accept outlines with a sane section count, depth, and level fill."""
    cfg = cfg or CurationConfig()
    top = outline.section_count
    if top < cfg.min_top_sections:
        return FilterDecision(False, f"too few top-level sections: {top}")
    if top > cfg.max_top_sections:
        return FilterDecision(False, f"too many top-level sections: {top}")
    depth = outline.depth
    if depth > cfg.max_depth:
        return FilterDecision(False, f"exceeds max depth: {depth} > {cfg.max_depth}")
    populated = {n.level for n in outline.walk()}
    if populated:
        for level in range(1, max(populated) + 1):
            if level not in populated:
                return FilterDecision(False, f"empty level {level} above a populated level")
    return FilterDecision(True)


@dataclass
class IntegrityResult:
    ok: bool
    missing: list[str] = field(default_factory=list)


def check_reference_integrity(
    outline: OutlineTree, bibliography: Sequence[PaperMeta]
) -> IntegrityResult:
    """Every citation id in the outline must resolve to a bibliography entry."""
    known = {p.id for p in bibliography}
    missing = sorted({cid for cid in outline.all_citations() if cid not in known})
    return IntegrityResult(ok=not missing, missing=missing)


def strip_nonessential(
    outline: OutlineTree, cfg: CurationConfig | None = None
) -> OutlineTree:
    """Drop subtrees whose normalized heading starts with a strip pattern."""
    cfg = cfg or CurationConfig()
    patterns = [normalize_heading(p) for p in cfg.strip_sections]

    def keep(node: OutlineNode) -> bool:
        normalized = normalize_heading(node.heading)
        return not any(normalized.startswith(p) for p in patterns if p)

    def copy(node: OutlineNode) -> OutlineNode:
        return OutlineNode(
            heading=node.heading,
            level=node.level,
            children=[copy(c) for c in node.children if keep(c)],
            citations=list(node.citations),
        )

    return OutlineTree(root=copy(outline.root))


def complete_references(
    bibliography: Sequence[PaperMeta],
    corpus_index: TitleIndex,
    embedder: EmbeddingProvider | None,
    cfg: CurationConfig | None = None,
) -> list[PaperMeta]:
    """Fill in missing abstracts from the corpus by title match.

    Exact normalized-title match wins; otherwise the nearest corpus title
    by cosine similarity supplies the abstract iff the similarity clears
    the configured threshold. Existing abstracts are never overwritten.
    Without an embedder the pipeline runs in exact-match-only mode.
    """
    cfg = cfg or CurationConfig()
    out: list[PaperMeta] = []
    for ref in bibliography:
        if ref.abstract:
            out.append(ref)
            continue
        hit = corpus_index.exact(ref.title)
        if hit is not None:
            out.append(replace(ref, abstract=hit.abstract) if hit.abstract else ref)
            continue
        if embedder is None:
            out.append(ref)
            continue
        found = corpus_index.nearest(ref.title, embedder)
        if found is None:
            out.append(ref)
            continue
        candidate, sim = found
        if sim >= cfg.similarity_threshold and candidate.abstract:
            out.append(replace(ref, abstract=candidate.abstract))
        else:
            out.append(ref)
    return out


@dataclass
class DatasetSplit:
    sft: list[SurveyRecord]
    rl: list[SurveyRecord]
    test: list[SurveyRecord]


def split_dataset(
    records: Sequence[SurveyRecord],
    cfg: CurationConfig | None = None,
    rl_fraction: float = 0.5,
    seed: int = 0,
) -> DatasetSplit:
    """Partition records into SFT, RL, and test sets.

    Records dated on or after the cutoff go to test; the rest are shuffled
    with the seed and split at rl_fraction. The three sets are pairwise
    disjoint and cover the input for every seed.
    """
    cfg = cfg or CurationConfig()
    if not (0.0 < rl_fraction < 1.0):
        raise ValueError("rl_fraction must be in (0, 1)")
    test: list[SurveyRecord] = []
    rest: list[SurveyRecord] = []
    for rec in records:
        d = rec.provenance.update_date
        if d is not None and d >= cfg.test_cutoff_date:
            test.append(rec)
        else:
            rest.append(rec)
    order = list(range(len(rest)))
    random.Random(seed).shuffle(order)
    n_rl = int(round(rl_fraction * len(rest)))
    rl = [rest[i] for i in order[:n_rl]]
    sft = [rest[i] for i in order[n_rl:]]
    return DatasetSplit(sft=sft, rl=rl, test=test)


def build_cot_prompt(record: SurveyRecord) -> str:
    """Deterministic distillation prompt: topic, references, and instructions."""
    if not record.task.papers:
        raise ValueError("record has no papers")
    lines = [
        "You are an expert survey author. Build a hierarchical outline for a",
        "literature survey on the topic below, grounded in the given references.",
        "",
        f"Topic: {record.task.topic}",
        "",
        "References:",
    ]
    for i, p in enumerate(record.task.papers, 1):
        lines.append(f"{i}. [{p.id}] {p.title}")
        lines.append(f"   Abstract: {p.abstract if p.abstract else '(no abstract)'}")
    lines += [
        "",
        "Work step by step:",
        "1. Cluster the references into coherent themes.",
        "2. Derive a taxonomy of the field from those themes.",
        "3. Write the final outline as markdown headings ('# Section',",
        "   '## Subsection', ...), citing supporting references by appending",
        "   '[id1; id2]' to a heading.",
        "",
        f"Put your reasoning between {COT_BEGIN} and {COT_END}, then output only",
        "the outline.",
    ]
    return "\n".join(lines)


@dataclass
class CotValidation:
    accepted: bool
    outline: OutlineTree | None = None
    reasoning: str | None = None
    reason: str | None = None


def validate_cot_response(
    response: str,
    record: SurveyRecord,
    schema: OutlineSchema | None = None,
) -> CotValidation:
    """Split a distillation response into reasoning and a validated outline."""
    start = response.find(COT_BEGIN)
    end = response.find(COT_END)
    if start < 0 or end < 0 or end < start:
        return CotValidation(False, reason="no reasoning segment")
    reasoning = response[start + len(COT_BEGIN) : end].strip()
    tail = response[end + len(COT_END) :]
    try:
        outline = parse_outline(tail)
    except EmptyOutline:
        return CotValidation(False, reason="no outline found")
    except MalformedHeading as exc:
        return CotValidation(False, reason=f"malformed outline: {exc}")
    result: ValidationResult = validate_schema(outline, schema, record.task.paper_ids)
    if not result.passed:
        return CotValidation(False, reason="; ".join(result.violations))
    return CotValidation(True, outline=outline, reasoning=reasoning)


@dataclass
class Rejection:
    record_id: str
    stage: str
    reason: str

    def to_dict(self) -> dict:
        return {"id": self.record_id, "stage": self.stage, "reason": self.reason}


@dataclass
class CurationStats:
    seen: int = 0
    candidates: int = 0
    accepted: int = 0
    rejected_by_stage: dict[str, int] = field(default_factory=dict)
    completed_abstracts: int = 0

    def bump(self, stage: str) -> None:
        self.rejected_by_stage[stage] = self.rejected_by_stage.get(stage, 0) + 1

    def lines(self) -> list[str]:
        out = [
            f"records seen:          {self.seen}",
            f"survey candidates:     {self.candidates}",
            f"accepted:              {self.accepted}",
            f"completed abstracts:   {self.completed_abstracts}",
        ]
        for stage in sorted(self.rejected_by_stage):
            out.append(f"rejected [{stage}]: {self.rejected_by_stage[stage]}")
        return out


def _survey_meta(raw: dict) -> PaperMeta:
    return PaperMeta.from_dict(
        {
            "id": raw.get("id"),
            "title": raw.get("title"),
            "abstract": raw.get("abstract"),
            "update_date": raw.get("update_date"),
            "source": raw.get("source"),
        }
    )


def _bibliography(raw: dict) -> list[PaperMeta]:
    out: list[PaperMeta] = []
    for entry in raw.get("references") or []:
        if not isinstance(entry, dict):
            logger.debug("dropping non-object reference entry in %r", raw.get("id"))
            continue
        try:
            out.append(PaperMeta.from_dict(entry))
        except (ValueError, TypeError):
            logger.debug("dropping malformed reference entry in %r", raw.get("id"))
    return out


def run_curation(
    raw_records: Iterable[dict],
    cfg: CurationConfig | None = None,
    corpus_index: TitleIndex | None = None,
    embedder: EmbeddingProvider | None = None,
) -> tuple[list[SurveyRecord], list[Rejection], CurationStats]:
    """Run the full multi-stage pipeline over raw snapshot records.

    Stages, in order: metadata sanity, survey keyword filter, outline
    parsing, non-essential section stripping, structural filter, minimum
    reference count, reference integrity, abstract completion. Rejections
    carry the stage that fired.
    """
    cfg = cfg or CurationConfig()
    records: list[SurveyRecord] = []
    rejections: list[Rejection] = []
    stats = CurationStats()

    for raw in raw_records:
        stats.seen += 1
        rid = str(raw.get("id") or f"<record {stats.seen}>")
        try:
            meta = _survey_meta(raw)
        except ValueError as exc:
            rejections.append(Rejection(rid, STAGE_METADATA, str(exc)))
            stats.bump(STAGE_METADATA)
            continue

        if not is_survey_candidate(meta, cfg):
            rejections.append(
                Rejection(meta.id, STAGE_KEYWORD, "no survey keyword in title")
            )
            stats.bump(STAGE_KEYWORD)
            continue
        stats.candidates += 1

        outline_text = raw.get("outline")
        if not outline_text:
            rejections.append(Rejection(meta.id, STAGE_PARSE, "no outline text"))
            stats.bump(STAGE_PARSE)
            continue
        try:
            outline = parse_outline(str(outline_text))
        except (EmptyOutline, MalformedHeading) as exc:
            rejections.append(Rejection(meta.id, STAGE_PARSE, str(exc)))
            stats.bump(STAGE_PARSE)
            continue

        outline = strip_nonessential(outline, cfg)

        decision = structural_filter(outline, cfg)
        if not decision.accepted:
            rejections.append(Rejection(meta.id, STAGE_STRUCTURE, decision.reason or ""))
            stats.bump(STAGE_STRUCTURE)
            continue

        bibliography = _bibliography(raw)
        if len(bibliography) < cfg.min_references:
            rejections.append(
                Rejection(
                    meta.id,
                    STAGE_REFCOUNT,
                    f"only {len(bibliography)} references, need {cfg.min_references}",
                )
            )
            stats.bump(STAGE_REFCOUNT)
            continue

        integrity = check_reference_integrity(outline, bibliography)
        if not integrity.ok:
            rejections.append(
                Rejection(
                    meta.id,
                    STAGE_INTEGRITY,
                    f"dangling citations: {', '.join(integrity.missing)}",
                )
            )
            stats.bump(STAGE_INTEGRITY)
            continue

        if corpus_index is not None:
            before = sum(1 for p in bibliography if p.abstract)
            bibliography = complete_references(bibliography, corpus_index, embedder, cfg)
            stats.completed_abstracts += sum(1 for p in bibliography if p.abstract) - before

        records.append(
            SurveyRecord(
                task=SurveyTask(
                    topic=meta.title, papers=bibliography, reference_outline=outline
                ),
                outline=outline,
                bibliography=bibliography,
                provenance=Provenance(
                    source=meta.source, record_id=meta.id, update_date=meta.update_date
                ),
            )
        )
        stats.accepted += 1

    return records, rejections, stats
