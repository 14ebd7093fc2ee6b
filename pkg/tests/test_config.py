"""YAML config loading, aliases, validation, and env overrides."""

from datetime import date

import pytest

from outlinekit.config import (
    ENV_API_KEY,
    ENV_BASE_URL,
    ENV_MODEL,
    CliConfig,
    JudgeSettings,
    load_config,
)
from outlinekit.errors import ConfigError


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for var in (ENV_API_KEY, ENV_BASE_URL, ENV_MODEL):
        monkeypatch.delenv(var, raising=False)


FULL = """
schema:
  max_depth: 3
  min_top_sections: 2
costs:
  insert_cost: 2.0
  delete_cost: 0.5
  relabel_cost_mode: label_aware
reward:
  lambda: 0.7
grpo:
  epsilon: 0.1
  beta: 0.0
curation:
  min_references: 5
  test_cutoff_date: 2024-06-01
  survey_keywords: [survey, primer]
judge:
  base_url: http://judge.local/v1
  model: grader-9
  retries: 2
  concurrency: 8
"""


class TestDefaults:
    def test_no_file(self):
        cfg = load_config(None)
        assert cfg.lam == 0.9
        assert cfg.schema.max_depth == 4
        assert cfg.costs.insert_cost == 1.0
        assert cfg.grpo.epsilon == 0.2
        assert cfg.curation.min_references == 10
        assert cfg.judge.base_url is None

    def test_empty_file(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("")
        cfg = load_config(p)
        assert cfg.lam == 0.9

    def test_reward_config_helper(self):
        cfg = CliConfig()
        assert cfg.reward_config().lam == 0.9
        assert cfg.reward_config(lam=0.2).lam == 0.2
        assert cfg.reward_config().schema is cfg.schema


class TestLoading:
    def test_full_file(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text(FULL)
        cfg = load_config(p)
        assert cfg.schema.max_depth == 3
        assert cfg.schema.min_top_sections == 2
        assert cfg.schema.max_top_sections == 20  # untouched default
        assert cfg.costs.insert_cost == 2.0
        assert cfg.costs.relabel_cost_mode == "label_aware"
        assert cfg.lam == 0.7
        assert cfg.grpo.epsilon == 0.1
        assert cfg.grpo.beta == 0.0
        assert cfg.curation.min_references == 5
        assert cfg.curation.test_cutoff_date == date(2024, 6, 1)
        assert cfg.curation.survey_keywords == ["survey", "primer"]
        assert cfg.judge.base_url == "http://judge.local/v1"
        assert cfg.judge.model == "grader-9"
        assert cfg.judge.retries == 2
        assert cfg.judge.concurrency == 8

    def test_lam_spelling_accepted_too(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("reward:\n  lam: 0.25\n")
        assert load_config(p).lam == 0.25

    def test_cutoff_as_string(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text('curation:\n  test_cutoff_date: "2023-12-31"\n')
        assert load_config(p).curation.test_cutoff_date == date(2023, 12, 31)

    def test_empty_section_uses_defaults(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("grpo:\n")
        assert load_config(p).grpo.beta == 0.04


class TestRejection:
    def test_unknown_section(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("rewards:\n  lambda: 0.5\n")
        with pytest.raises(ConfigError, match=r"unknown config section\(s\): rewards"):
            load_config(p)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("schema:\n  max_dept: 3\n")
        with pytest.raises(ConfigError, match="unknown config key: schema.max_dept"):
            load_config(p)

    def test_unknown_reward_key(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("reward:\n  gamma: 0.5\n")
        with pytest.raises(ConfigError, match="unknown config key: reward.gamma"):
            load_config(p)

    def test_lambda_out_of_range(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("reward:\n  lambda: 1.5\n")
        with pytest.raises(ConfigError, match=r"reward.lambda must be in \[0, 1\]"):
            load_config(p)

    def test_invalid_section_value(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("grpo:\n  epsilon: 0.0\n")
        with pytest.raises(ConfigError, match="invalid grpo config"):
            load_config(p)

    def test_non_mapping_root(self, tmp_path):
        p = tmp_path / "cfg.yaml"
        p.write_text("- a\n- b\n")
        with pytest.raises(ConfigError, match="root must be a mapping"):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "absent.yaml")


class TestEnvOverrides:
    def test_env_wins_over_file(self, tmp_path, monkeypatch):
        p = tmp_path / "cfg.yaml"
        p.write_text("judge:\n  base_url: http://from-file\n  model: file-model\n")
        monkeypatch.setenv(ENV_BASE_URL, "http://from-env")
        monkeypatch.setenv(ENV_MODEL, "env-model")
        monkeypatch.setenv(ENV_API_KEY, "sk-env")
        cfg = load_config(p)
        assert cfg.judge.base_url == "http://from-env"
        assert cfg.judge.model == "env-model"
        assert cfg.judge.api_key == "sk-env"

    def test_empty_env_ignored(self, tmp_path, monkeypatch):
        p = tmp_path / "cfg.yaml"
        p.write_text("judge:\n  model: file-model\n")
        monkeypatch.setenv(ENV_MODEL, "")
        assert load_config(p).judge.model == "file-model"

    def test_env_applies_without_file(self, monkeypatch):
        monkeypatch.setenv(ENV_API_KEY, "sk-only")
        assert load_config(None).judge.api_key == "sk-only"


class TestJudgeSettings:
    def test_defaults(self):
        js = JudgeSettings()
        assert js.timeout == 60.0
        assert js.retries == 3
        assert js.concurrency == 4
        assert js.samples_per_criterion == 1
