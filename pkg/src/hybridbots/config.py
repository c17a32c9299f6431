"""Run configuration: a versioned YAML/JSON document validated before any run."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Invalid or unreadable run configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LogNormal(_Strict):
    median: float = Field(gt=0)
    sigma: float = Field(0.5, ge=0)


class Normal(_Strict):
    mean: float
    sd: float = Field(ge=0)


class PlatformConfig(_Strict):
    humans: int = Field(10_000, ge=0)
    locales: dict[str, float] = {"de": 0.3, "ww": 0.7}
    stream_coverage: float = Field(0.10, ge=0.01, le=0.40)
    timeline_cap: int = Field(1000, ge=1)
    trending_window_s: int = Field(3600, gt=0)
    hashtag_vocabulary: int = Field(2000, ge=1)
    hashtag_exponent: float = Field(1.0, gt=0)
    start_day: int = Field(3650, ge=0)

    @field_validator("locales")
    @classmethod
    def _weights(cls, v: dict[str, float]) -> dict[str, float]:
        if not v or any(w < 0 for w in v.values()) or sum(v.values()) <= 0:
            raise ValueError("locales needs non-negative weights with a positive sum")
        return v


class HumanConfig(_Strict):
    post_rate: LogNormal = LogNormal(median=1.5, sigma=0.6)
    retweet_rate: LogNormal = LogNormal(median=0.8, sigma=0.7)
    active_start_h: Normal = Normal(mean=8.0, sd=1.2)
    active_length_h: Normal = Normal(mean=15.0, sd=1.5)
    follow_back_prob: float = Field(0.2, ge=0, le=1)
    out_of_band_penalty: float = Field(0.2, ge=0, le=1)
    balanced_ratio_band: tuple[float, float] = (0.1, 4.0)
    latency_median_h: float = Field(6.0, gt=0)
    latency_sigma: float = Field(1.0, ge=0)
    latency_cap_h: float = Field(48.0, gt=0)
    following: LogNormal = LogNormal(median=12, sigma=0.8)
    popularity_sigma: float = Field(1.2, ge=0)
    age_days: LogNormal = LogNormal(median=1000, sigma=0.8)
    min_age_days: float = Field(30, ge=0)
    completeness_beta: tuple[float, float] = (5.0, 2.0)

    @field_validator("balanced_ratio_band")
    @classmethod
    def _band(cls, v):
        if not 0 < v[0] <= v[1]:
            raise ValueError("band lower bound must be > 0 and <= upper bound")
        return v


PRESETS = ("hybrid_network", "naive_bot_army", "reactive")


class BotGroup(_Strict):
    preset: Literal["hybrid_network", "naive_bot_army", "reactive"]
    count: int = Field(ge=0)
    locale: str = "de"
    content_db: str | None = None
    overrides: dict[str, Any] = {}
    per_bot: dict[int, dict[str, Any]] = {}

    @model_validator(mode="after")
    def _check_overrides(self):
        from .presets import validate_overrides

        validate_overrides(self.overrides, "overrides")
        for idx, ov in self.per_bot.items():
            if not 0 <= idx < self.count:
                raise ValueError(f"per_bot index {idx} outside 0..{self.count - 1}")
            validate_overrides(ov, f"per_bot.{idx}")
        return self


class PushConfig(_Strict):
    enabled: bool = True
    day: int | None = None
    start: str = "18:00"
    duration_h: float = Field(2.0, gt=0)
    hashtags: list[str] = ["#Sockenzauber", "#Kaffeeklatschrevolte"]
    posts_per_bot: int = Field(4, ge=0)
    retweets_per_bot: int = Field(4, ge=0)
    observe_days: int = Field(3, ge=1)
    trend_locale: str | None = "de"
    top_k: int = Field(100, ge=1)


class BaselineConfig(_Strict):
    day: int | None = None
    times: list[str] = ["00:00", "06:00", "12:00", "18:00"]
    coverage: float = Field(0.10, ge=0, le=1)
    window_s: int = Field(3600, gt=0)
    locale: str | None = None


class ExperimentPlan(_Strict):
    n_initially_befriended: int = Field(15, ge=0)
    setup_days: int = Field(2, ge=0)
    productive_days: int = Field(8, gt=0)
    push: PushConfig = PushConfig()
    baseline: BaselineConfig = BaselineConfig()

    @property
    def push_day(self) -> int:
        return self.push.day if self.push.day is not None else self.setup_days + self.productive_days

    @property
    def baseline_day(self) -> int:
        return self.baseline.day if self.baseline.day is not None else self.setup_days + self.productive_days - 1

    @property
    def total_days(self) -> int:
        days = self.setup_days + self.productive_days
        if self.push.enabled:
            days = max(days, self.push_day + self.push.observe_days)
        return days


class RunConfig(_Strict):
    version: Literal[1] = SCHEMA_VERSION
    seed: int = 0
    output_dir: str = "out"
    platform: PlatformConfig = PlatformConfig()
    humans: HumanConfig = HumanConfig()
    roster: list[BotGroup] = [BotGroup(preset="hybrid_network", count=30)]
    plan: ExperimentPlan = ExperimentPlan()

    @property
    def n_bots(self) -> int:
        """Size of the hybrid network, the bots the experiment plan is about."""
        return sum(g.count for g in self.roster if g.preset == "hybrid_network")

    @model_validator(mode="after")
    def _plan_fits(self):
        if self.plan.n_initially_befriended > self.n_bots:
            raise ValueError(
                f"plan.n_initially_befriended ({self.plan.n_initially_befriended}) exceeds "
                f"the hybrid network size ({self.n_bots})"
            )
        return self

    def with_updates(self, **updates: Any) -> "RunConfig":
        """Copy with dotted-path overrides, e.g. ``{"humans.follow_back_prob": 0.3}``."""
        data = self.model_dump()
        for path, value in updates.items():
            node = data
            keys = path.split(".")
            for k in keys[:-1]:
                node = node[k]
            node[keys[-1]] = value
        return RunConfig.model_validate(data)


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: Any) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from None
    return parse_config(data)
