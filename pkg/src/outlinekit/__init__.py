"""Parsing, rewards, and evaluation utilities for survey outline generation.

The package is organized around a plain-text outline format (Markdown-style
headings with optional trailing citation brackets) and exposes:

- `model`: outline trees, parsing/serialization, schema validation
- `treedist`: ordered tree edit distance and the structural reward
- `rewards`: combined rewards, group-relative advantages, the clipped
  policy objective, and supervised NLL
- `curation`: snapshot filtering, reference completion, dataset splits,
  and reasoning-trace validation
- `judging`: the five-criterion scoring harness with mock and HTTP clients
- `cli`: the `outlinekit` command
"""

from __future__ import annotations

__version__ = "0.1.0"

from .config import CliConfig, JudgeSettings, load_config
from .curation import (
    CotValidation,
    CurationConfig,
    CurationStats,
    DatasetSplit,
    EmbeddingProvider,
    FilterDecision,
    HashingEmbedder,
    IntegrityResult,
    Provenance,
    Rejection,
    SurveyRecord,
    TitleIndex,
    build_cot_prompt,
    check_reference_integrity,
    complete_references,
    is_survey_candidate,
    run_curation,
    split_dataset,
    strip_nonessential,
    structural_filter,
    validate_cot_response,
)
from .errors import (
    BothEmpty,
    ConfigError,
    EmbedderUnavailable,
    EmptyOutline,
    EmptySequence,
    GroupTooSmall,
    JudgeUnavailable,
    LengthMismatch,
    MalformedHeading,
    NoScoreFound,
    NonFiniteInput,
    OutlineKitError,
)
from .judging import (
    Criterion,
    CorpusReport,
    EvalPair,
    HttpJudgeClient,
    ItemFailure,
    JudgeClient,
    JudgeReport,
    MockJudgeClient,
    build_judge_prompt,
    criterion_total,
    evaluate_corpus,
    judge_outline,
    parse_judge_score,
    render_corpus_table,
)
from .model import (
    OutlineNode,
    OutlineSchema,
    OutlineTree,
    PaperMeta,
    SurveyTask,
    ValidationResult,
    canonical_equal,
    normalize_heading,
    parse_outline,
    serialize_outline,
    validate_schema,
)
from .rewards import (
    CandidateDiagnostics,
    GroupRollout,
    GrpoConfig,
    GrpoResult,
    RewardBreakdown,
    RewardConfig,
    RolloutCandidate,
    combine_rewards,
    format_reward,
    group_advantages,
    grpo_objective,
    sft_nll,
    total_reward,
)
from .treedist import (
    DistanceReport,
    EditCostModel,
    distance_report,
    structural_distance,
    structural_reward,
    tree_edit_distance,
)

__all__ = [
    "__version__",
    # model
    "OutlineNode",
    "OutlineTree",
    "OutlineSchema",
    "PaperMeta",
    "SurveyTask",
    "ValidationResult",
    "canonical_equal",
    "normalize_heading",
    "parse_outline",
    "serialize_outline",
    "validate_schema",
    # treedist
    "DistanceReport",
    "EditCostModel",
    "distance_report",
    "structural_distance",
    "structural_reward",
    "tree_edit_distance",
    # rewards
    "CandidateDiagnostics",
    "GroupRollout",
    "GrpoConfig",
    "GrpoResult",
    "RewardBreakdown",
    "RewardConfig",
    "RolloutCandidate",
    "combine_rewards",
    "format_reward",
    "group_advantages",
    "grpo_objective",
    "sft_nll",
    "total_reward",
    # curation
    "CotValidation",
    "CurationConfig",
    "CurationStats",
    "DatasetSplit",
    "EmbeddingProvider",
    "FilterDecision",
    "HashingEmbedder",
    "IntegrityResult",
    "Provenance",
    "Rejection",
    "SurveyRecord",
    "TitleIndex",
    "build_cot_prompt",
    "check_reference_integrity",
    "complete_references",
    "is_survey_candidate",
    "run_curation",
    "split_dataset",
    "strip_nonessential",
    "structural_filter",
    "validate_cot_response",
    # judging
    "Criterion",
    "CorpusReport",
    "EvalPair",
    "HttpJudgeClient",
    "ItemFailure",
    "JudgeClient",
    "JudgeReport",
    "MockJudgeClient",
    "build_judge_prompt",
    "criterion_total",
    "evaluate_corpus",
    "judge_outline",
    "parse_judge_score",
    "render_corpus_table",
    # config
    "CliConfig",
    "JudgeSettings",
    "load_config",
    # errors
    "OutlineKitError",
    "EmptyOutline",
    "MalformedHeading",
    "BothEmpty",
    "GroupTooSmall",
    "LengthMismatch",
    "NonFiniteInput",
    "EmptySequence",
    "EmbedderUnavailable",
    "NoScoreFound",
    "JudgeUnavailable",
    "ConfigError",
]
