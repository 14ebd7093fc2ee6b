"""Reward and loss calculators for outline-generation training loops.

Everything here is a pure reference calculator over supplied values:
format and total rewards over parsed outlines, group-normalized
advantages, the clipped-surrogate objective with KL regularization, and
the supervised NLL. No sampling, tokenization, or gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    EmptySequence,
    GroupTooSmall,
    LengthMismatch,
    NonFiniteInput,
)
from .model import OutlineSchema, OutlineTree, validate_schema
from .treedist import EditCostModel, structural_reward

# exp() overflows past ~709.78; keep log-space ratios clear of it
_EXP_ARG_MAX = 700.0


@dataclass
class RewardConfig:
    """Weighting and validation settings for the total reward."""

    lam: float = 0.9
    schema: OutlineSchema = field(default_factory=OutlineSchema)
    costs: EditCostModel = field(default_factory=EditCostModel)

    def __post_init__(self) -> None:
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lambda must be in [0, 1], got {self.lam!r}")


@dataclass
class RewardBreakdown:
    r_struct: float
    r_format: int
    r_total: float
    lambda_used: float

    def to_dict(self) -> dict:
        return {
            "r_struct": self.r_struct,
            "r_format": self.r_format,
            "r_total": self.r_total,
            "lambda_used": self.lambda_used,
        }


@dataclass
class GrpoConfig:
    """Clip range, KL weight, and the zero-variance guard."""

    epsilon: float = 0.2
    beta: float = 0.04
    std_floor: float = 1e-8

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not self.std_floor > 0:
            raise ValueError("std_floor must be > 0")


@dataclass
class RolloutCandidate:
    """Per-token logprobs under three policies, plus the candidate's reward."""

    policy_logprobs: list[float]
    old_logprobs: list[float]
    ref_logprobs: list[float]
    reward: float

    def to_dict(self) -> dict:
        return {
            "policy_logprobs": list(self.policy_logprobs),
            "old_logprobs": list(self.old_logprobs),
            "ref_logprobs": list(self.ref_logprobs),
            "reward": self.reward,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RolloutCandidate":
        return cls(
            policy_logprobs=[float(x) for x in d["policy_logprobs"]],
            old_logprobs=[float(x) for x in d["old_logprobs"]],
            ref_logprobs=[float(x) for x in d["ref_logprobs"]],
            reward=float(d["reward"]),
        )


@dataclass
class GroupRollout:
    """A group of sampled candidates for one query."""

    candidates: list[RolloutCandidate]

    def to_dict(self) -> dict:
        return {"candidates": [c.to_dict() for c in self.candidates]}

    @classmethod
    def from_dict(cls, d: dict) -> "GroupRollout":
        return cls(candidates=[RolloutCandidate.from_dict(c) for c in d["candidates"]])


@dataclass
class CandidateDiagnostics:
    ratio: float
    clipped: bool
    kl: float

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "clipped": self.clipped, "kl": self.kl}


@dataclass
class GrpoResult:
    objective: float
    loss: float
    diagnostics: list[CandidateDiagnostics]

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "loss": self.loss,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def format_reward(
    tree: OutlineTree,
    schema: OutlineSchema | None = None,
    pool: list[str] | None = None,
) -> int:
    """Binary schema-compliance reward: 1 iff validation passes.

    Unparseable model output never reaches this function; callers report
    parse failures as reward 0 themselves.
    """
    return 1 if validate_schema(tree, schema, pool).passed else 0


def combine_rewards(r_struct: float, r_format: float, lam: float) -> float:
    """Weighted total: lam * r_struct + (1 - lam) * r_format."""
    return lam * r_struct + (1.0 - lam) * r_format


def total_reward(
    gen: OutlineTree,
    ref: OutlineTree,
    cfg: RewardConfig | None = None,
    pool: list[str] | None = None,
) -> RewardBreakdown:
    """Structural and format rewards combined with weight lambda."""
    cfg = cfg or RewardConfig()
    r_struct = structural_reward(gen, ref, cfg.costs)
    r_format = format_reward(gen, cfg.schema, pool)
    return RewardBreakdown(
        r_struct=r_struct,
        r_format=r_format,
        r_total=combine_rewards(r_struct, float(r_format), cfg.lam),
        lambda_used=cfg.lam,
    )


def group_advantages(rewards: Sequence[float], std_floor: float = 1e-8) -> list[float]:
    """Standardize rewards against the group mean and population std.

    A group whose rewards are all identical maps to exact zeros; otherwise
    the divisor is max(std, std_floor). Raises GroupTooSmall for fewer
    than two rewards.
    """
    rs = [float(r) for r in rewards]
    if len(rs) < 2:
        raise GroupTooSmall(f"need at least 2 rewards, got {len(rs)}")
    for r in rs:
        if not math.isfinite(r):
            raise NonFiniteInput(f"non-finite reward {r!r}")
    if all(r == rs[0] for r in rs):
        return [0.0] * len(rs)
    mean = math.fsum(rs) / len(rs)
    centered = [r - mean for r in rs]
    # second centering pass keeps the output mean at rounding noise
    residual = math.fsum(centered) / len(centered)
    centered = [c - residual for c in centered]
    std = math.sqrt(math.fsum(c * c for c in centered) / len(centered))
    denom = max(std, std_floor)
    return [c / denom for c in centered]


def _check_candidate(index: int, cand: RolloutCandidate) -> int:
    n = len(cand.policy_logprobs)
    if len(cand.old_logprobs) != n or len(cand.ref_logprobs) != n:
        raise LengthMismatch(
            f"candidate {index}: sequence lengths differ "
            f"(policy={n}, old={len(cand.old_logprobs)}, ref={len(cand.ref_logprobs)})"
        )
    if n == 0:
        raise EmptySequence(f"candidate {index} has no tokens")
    for name, seq in (
        ("policy", cand.policy_logprobs),
        ("old", cand.old_logprobs),
        ("ref", cand.ref_logprobs),
    ):
        for x in seq:
            if not math.isfinite(x):
                raise NonFiniteInput(f"candidate {index}: non-finite {name} logprob {x!r}")
            if x > 0:
                raise ValueError(f"candidate {index}: {name} logprob must be <= 0, got {x!r}")
    if not math.isfinite(cand.reward):
        raise NonFiniteInput(f"candidate {index}: non-finite reward {cand.reward!r}")
    return n


def grpo_objective(group: GroupRollout, cfg: GrpoConfig | None = None) -> GrpoResult:
    """Clipped-surrogate objective with KL regularization for one group.

    Per candidate i, the sequence-level importance ratio is
    exp(sum_t(policy - old)), the surrogate term is
    min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv), and the KL
    penalty uses the per-token estimator exp(d) - d - 1 with
    d = ref - policy, averaged over tokens then over candidates. Returns
    both the objective and its negation as the loss.
    """
    cfg = cfg or GrpoConfig()
    cands = group.candidates
    if len(cands) < 2:
        raise GroupTooSmall(f"need at least 2 candidates, got {len(cands)}")
    lengths = [_check_candidate(i, c) for i, c in enumerate(cands)]
    advs = group_advantages([c.reward for c in cands], cfg.std_floor)
    lo, hi = 1.0 - cfg.epsilon, 1.0 + cfg.epsilon

    surrogates: list[float] = []
    kls: list[float] = []
    diags: list[CandidateDiagnostics] = []
    for cand, adv, n in zip(cands, advs, lengths):
        log_ratio = math.fsum(
            p - o for p, o in zip(cand.policy_logprobs, cand.old_logprobs)
        )
        log_ratio = max(-_EXP_ARG_MAX, min(_EXP_ARG_MAX, log_ratio))
        ratio = math.exp(log_ratio)
        raw = ratio * adv
        clipped_term = max(lo, min(hi, ratio)) * adv
        surrogates.append(min(raw, clipped_term))
        # exp(d) - d - 1 >= 0 mathematically; the max() keeps rounding
        # noise from pushing a per-token term a few ulp below zero
        kl = (
            math.fsum(
                max(0.0, math.exp(min(_EXP_ARG_MAX, d)) - d - 1.0)
                for d in (
                    r - p
                    for p, r in zip(cand.policy_logprobs, cand.ref_logprobs)
                )
            )
            / n
        )
        kls.append(kl)
        diags.append(
            CandidateDiagnostics(ratio=ratio, clipped=clipped_term < raw, kl=kl)
        )

    g = len(cands)
    objective = math.fsum(surrogates) / g - cfg.beta * (math.fsum(kls) / g)
    return GrpoResult(objective=objective, loss=-objective, diagnostics=diags)


def sft_nll(token_logprobs: Sequence[float], reduction: str = "sum") -> float:
    """Negative log-likelihood of a token sequence.

    "sum" returns -sum(logprobs); "token_mean" divides by the token count.
    """
    lps = [float(x) for x in token_logprobs]
    if not lps:
        raise EmptySequence("token_logprobs is empty")
    for x in lps:
        if not math.isfinite(x):
            raise NonFiniteInput(f"non-finite logprob {x!r}")
        if x > 0:
            raise ValueError(f"logprob must be <= 0, got {x!r}")
    if reduction not in ("sum", "token_mean"):
        raise ValueError(f"unknown reduction {reduction!r}")
    total = -math.fsum(lps)
    if total == 0.0:
        total = 0.0  # avoid -0.0 for all-certain sequences
    return total if reduction == "sum" else total / len(lps)
