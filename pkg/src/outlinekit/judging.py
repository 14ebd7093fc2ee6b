"""LLM-as-a-judge evaluation over five rubric criteria.

Each criterion gets its own prompt and its own 0-10 score; an outline's
total is the sum of the five criterion means. When a reference outline is
available, the report also carries the normalized tree edit distance.
"""

from __future__ import annotations

import math
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Protocol, Sequence

import requests

from .errors import JudgeUnavailable, NoScoreFound
from .model import OutlineTree, serialize_outline
from .treedist import EditCostModel, structural_distance


class Criterion(Enum):
    STRUCTURE_LOCATE = "StructureLocate"
    STRUCTURE_DETAIL = "StructureDetail"
    CONTENT_EXCLUSION = "ContentExclusion"
    CONTENT_DEPTH = "ContentDepth"
    PRAGMATICS_CONCISE = "PragmaticsConcise"

    @property
    def rubric(self) -> str:
        return _RUBRICS[self]


_RUBRICS: dict[Criterion, str] = {
    Criterion.STRUCTURE_LOCATE: (
        "Adherence to conventional organizational frameworks (e.g., IMRaD) "
        "for efficient information retrieval."
    ),
    Criterion.STRUCTURE_DETAIL: (
        "Appropriate space allocation based on topic importance and "
        "complexity, emphasizing core content over secondary details."
    ),
    Criterion.CONTENT_EXCLUSION: (
        "Clear boundaries between same-level sections to avoid redundant overlap."
    ),
    Criterion.CONTENT_DEPTH: (
        "Integration of diverse reasoning structures (e.g., causal links, "
        "theory-to-application) and progressive logical chains across sections."
    ),
    Criterion.PRAGMATICS_CONCISE: (
        "Concise yet descriptive section titles without overly broad expressions."
    ),
}

ANSWER_MARKER = "ANSWER:"
_SCORE_RE = re.compile(r"ANSWER:\s*(-?\d+(?:\.\d+)?)", re.IGNORECASE)


class JudgeClient(Protocol):
    """Anything that can answer a scoring prompt with text."""

    model_id: str

    def complete(self, prompt: str) -> str: ...


class MockJudgeClient:
    """Deterministic offline judge for tests and dry runs.

    Responds with a constant score, or with whatever a supplied responder
    callable returns for the prompt. Keeps every prompt it saw.
    """

    def __init__(
        self,
        score: float = 8.0,
        responder: Callable[[str], str] | None = None,
    ) -> None:
        self.score = score
        self.responder = responder
        self.model_id = "mock"
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self.responder is not None:
            return self.responder(prompt)
        return f"{ANSWER_MARKER} {self.score}"


class HttpJudgeClient:
    """Chat-completion-style HTTP judge with retries and rate limiting."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        retries: int = 3,
        min_interval: float = 0.0,
        temperature: float = 0.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model_id = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.min_interval = min_interval
        self.temperature = temperature
        self._lock = threading.Lock()
        self._last_call = 0.0

    def _throttle(self) -> None:
        if self.min_interval <= 0:
            return
        with self._lock:
            wait = self._last_call + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.retries):
            self._throttle()
            try:
                resp = requests.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(min(2.0**attempt, 8.0))
        raise JudgeUnavailable(f"judge call failed after {self.retries} attempts: {last_error}")


def build_judge_prompt(criterion: Criterion, topic: str, outline: OutlineTree) -> str:
    """Deterministic scoring prompt for one criterion."""
    return "\n".join(
        [
            "You are grading the outline of a literature survey on a single",
            "criterion. Judge only this criterion and nothing else.",
            "",
            f"Criterion ({criterion.value}): {criterion.rubric}",
            "",
            f"Survey topic: {topic}",
            "",
            "Outline:",
            serialize_outline(outline),
            "",
            "Score the outline on this criterion from 0 to 10 (one decimal",
            f'place allowed). Reply with exactly one line: "{ANSWER_MARKER} <score>".',
        ]
    )


def parse_judge_score(response: str) -> float:
    """Extract the first number after the answer marker, clamped to [0, 10]."""
    m = _SCORE_RE.search(response)
    if not m:
        raise NoScoreFound(f"no score in response: {response[:80]!r}")
    return min(10.0, max(0.0, float(m.group(1))))


def criterion_total(scores: Mapping[Criterion, float]) -> float:
    """The 0-50 total: sum of the five criterion scores, in enum order."""
    return math.fsum(scores[c] for c in Criterion)


@dataclass
class JudgeReport:
    scores: dict[Criterion, float]
    total: float
    structural_distance: float | None
    judge_model_id: str
    raw_responses: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scores": {c.value: self.scores[c] for c in Criterion},
            "total": self.total,
            "structural_distance": self.structural_distance,
            "judge_model_id": self.judge_model_id,
            "raw_responses": list(self.raw_responses),
        }


def judge_outline(
    topic: str,
    outline: OutlineTree,
    reference: OutlineTree | None,
    client: JudgeClient,
    samples_per_criterion: int = 1,
    costs: EditCostModel | None = None,
) -> JudgeReport:
    """Score one outline on all five criteria.

    Each criterion is queried samples_per_criterion times and averaged.
    Errors propagate; no partial report is produced.
    """
    if samples_per_criterion < 1:
        raise ValueError("samples_per_criterion must be >= 1")
    scores: dict[Criterion, float] = {}
    raws: list[str] = []
    for criterion in Criterion:
        prompt = build_judge_prompt(criterion, topic, outline)
        values = []
        for _ in range(samples_per_criterion):
            response = client.complete(prompt)
            raws.append(response)
            values.append(parse_judge_score(response))
        scores[criterion] = math.fsum(values) / len(values)
    distance = (
        structural_distance(outline, reference, costs) if reference is not None else None
    )
    return JudgeReport(
        scores=scores,
        total=criterion_total(scores),
        structural_distance=distance,
        judge_model_id=client.model_id,
        raw_responses=raws,
    )


@dataclass
class EvalPair:
    topic: str
    generated: OutlineTree
    reference: OutlineTree | None = None


@dataclass
class ItemFailure:
    index: int
    topic: str
    error: str

    def to_dict(self) -> dict:
        return {"index": self.index, "topic": self.topic, "error": self.error}


@dataclass
class CorpusReport:
    items: list[JudgeReport]
    failures: list[ItemFailure]
    mean_scores: dict[Criterion, float]
    mean_total: float
    mean_structural_distance: float | None
    excluded_count: int

    def to_dict(self) -> dict:
        return {
            "items": [r.to_dict() for r in self.items],
            "failures": [f.to_dict() for f in self.failures],
            "mean_scores": {c.value: self.mean_scores[c] for c in Criterion},
            "mean_total": self.mean_total,
            "mean_structural_distance": self.mean_structural_distance,
            "excluded_count": self.excluded_count,
        }


def evaluate_corpus(
    pairs: Sequence[EvalPair],
    client: JudgeClient,
    concurrency_limit: int = 4,
    samples_per_criterion: int = 1,
    costs: EditCostModel | None = None,
) -> CorpusReport:
    """Judge every pair and aggregate column means.

    Items that fail are excluded from the means and listed with their
    error; if every item fails, raises JudgeUnavailable.
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if concurrency_limit < 1:
        raise ValueError("concurrency_limit must be >= 1")

    def run(pair: EvalPair) -> JudgeReport:
        return judge_outline(
            pair.topic, pair.generated, pair.reference, client,
            samples_per_criterion, costs,
        )

    items: list[JudgeReport] = []
    failures: list[ItemFailure] = []
    with ThreadPoolExecutor(max_workers=concurrency_limit) as pool:
        futures = [pool.submit(run, pair) for pair in pairs]
        for i, fut in enumerate(futures):
            try:
                items.append(fut.result())
            except (JudgeUnavailable, NoScoreFound) as exc:
                failures.append(ItemFailure(index=i, topic=pairs[i].topic, error=str(exc)))
    if not items:
        raise JudgeUnavailable(f"all {len(pairs)} items failed")

    n = len(items)
    mean_scores = {
        c: math.fsum(r.scores[c] for r in items) / n for c in Criterion
    }
    mean_total = math.fsum(r.total for r in items) / n
    distances = [r.structural_distance for r in items if r.structural_distance is not None]
    mean_distance = math.fsum(distances) / len(distances) if distances else None
    return CorpusReport(
        items=items,
        failures=failures,
        mean_scores=mean_scores,
        mean_total=mean_total,
        mean_structural_distance=mean_distance,
        excluded_count=len(failures),
    )


def render_corpus_table(report: CorpusReport, labels: Sequence[str] | None = None) -> str:
    """Aligned plain-text table: one row per item plus a mean row."""
    headers = ["Item"] + [c.value for c in Criterion] + ["Total", "StructDist"]
    rows: list[list[str]] = []
    for i, item in enumerate(report.items):
        label = labels[i] if labels is not None and i < len(labels) else f"item-{i}"
        rows.append(
            [label]
            + [f"{item.scores[c]:.2f}" for c in Criterion]
            + [
                f"{item.total:.2f}",
                "-" if item.structural_distance is None else f"{item.structural_distance:.2f}",
            ]
        )
    rows.append(
        ["mean"]
        + [f"{report.mean_scores[c]:.2f}" for c in Criterion]
        + [
            f"{report.mean_total:.2f}",
            "-"
            if report.mean_structural_distance is None
            else f"{report.mean_structural_distance:.2f}",
        ]
    )
    widths = [
        max(len(headers[k]), *(len(r[k]) for r in rows)) for k in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[k]) for k, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(v.ljust(widths[k]) for k, v in enumerate(r)))
    return "\n".join(lines)
