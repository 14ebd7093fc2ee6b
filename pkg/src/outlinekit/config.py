"""Merged CLI configuration: one YAML file plus environment overrides.

Sections map one-to-one onto the library config types. Unknown keys are
rejected so typos fail loudly instead of silently using a default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path

import yaml

from .curation import CurationConfig
from .errors import ConfigError
from .model import OutlineSchema
from .rewards import GrpoConfig, RewardConfig
from .treedist import EditCostModel

ENV_API_KEY = "OUTLINEKIT_JUDGE_API_KEY"
ENV_BASE_URL = "OUTLINEKIT_JUDGE_BASE_URL"
ENV_MODEL = "OUTLINEKIT_JUDGE_MODEL"


@dataclass
class JudgeSettings:
    base_url: str | None = None
    model: str | None = None
    api_key: str | None = None
    timeout: float = 60.0
    retries: int = 3
    min_interval: float = 0.0
    concurrency: int = 4
    samples_per_criterion: int = 1


@dataclass
class CliConfig:
    schema: OutlineSchema = field(default_factory=OutlineSchema)
    costs: EditCostModel = field(default_factory=EditCostModel)
    grpo: GrpoConfig = field(default_factory=GrpoConfig)
    curation: CurationConfig = field(default_factory=CurationConfig)
    judge: JudgeSettings = field(default_factory=JudgeSettings)
    lam: float = 0.9

    def reward_config(self, lam: float | None = None) -> RewardConfig:
        return RewardConfig(
            lam=self.lam if lam is None else lam,
            schema=self.schema,
            costs=self.costs,
        )


# config-file key -> dataclass field, where they differ
_KEY_ALIASES = {"lambda": "lam"}


def _build_section(cls, section: str, data: dict, converters: dict | None = None):
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for raw_key, value in data.items():
        key = _KEY_ALIASES.get(raw_key, raw_key)
        if key not in known:
            raise ConfigError(f"unknown config key: {section}.{raw_key}")
        if converters and key in converters:
            value = converters[key](value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {section} config: {exc}") from exc


def _to_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def load_config(path: str | Path | None = None) -> CliConfig:
    """Load configuration from YAML, falling back to defaults.

    Judge credentials can always be overridden from the environment
    (OUTLINEKIT_JUDGE_API_KEY / _BASE_URL / _MODEL).
    """
    data: dict = {}
    if path is not None:
        raw = Path(path).read_text(encoding="utf-8")
        loaded = yaml.safe_load(raw)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config root must be a mapping, got {type(loaded).__name__}")
        data = loaded

    known_sections = {"schema", "costs", "reward", "grpo", "curation", "judge"}
    unknown = set(data) - known_sections
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    cfg = CliConfig()
    if "schema" in data:
        cfg.schema = _build_section(OutlineSchema, "schema", data["schema"] or {})
    if "costs" in data:
        cfg.costs = _build_section(EditCostModel, "costs", data["costs"] or {})
    if "grpo" in data:
        cfg.grpo = _build_section(GrpoConfig, "grpo", data["grpo"] or {})
    if "curation" in data:
        cfg.curation = _build_section(
            CurationConfig,
            "curation",
            data["curation"] or {},
            converters={"test_cutoff_date": _to_date},
        )
    if "judge" in data:
        cfg.judge = _build_section(JudgeSettings, "judge", data["judge"] or {})
    if "reward" in data:
        reward_data = dict(data["reward"] or {})
        for raw_key in reward_data:
            if _KEY_ALIASES.get(raw_key, raw_key) != "lam":
                raise ConfigError(f"unknown config key: reward.{raw_key}")
        if reward_data:
            lam = float(next(iter(reward_data.values())))
            if not (0.0 <= lam <= 1.0):
                raise ConfigError(f"reward.lambda must be in [0, 1], got {lam}")
            cfg.lam = lam

    if os.environ.get(ENV_API_KEY):
        cfg.judge.api_key = os.environ[ENV_API_KEY]
    if os.environ.get(ENV_BASE_URL):
        cfg.judge.base_url = os.environ[ENV_BASE_URL]
    if os.environ.get(ENV_MODEL):
        cfg.judge.model = os.environ[ENV_MODEL]
    return cfg
