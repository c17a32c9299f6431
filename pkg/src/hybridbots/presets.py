"""Archetype presets for bot groups, ordered by automation and orchestration.

``naive_bot_army``: centrally controlled, near-identical, fully automated
accounts (round-the-clock, no jitter, aggressive following, template posts).
``hybrid_network``: centrally controlled but individually human-like
behavior with human-authored content. ``reactive``: the stream-listening
bot that greets posters instantly.
"""

from __future__ import annotations

import dataclasses
import random
from typing import Any

from .bots import BotProfile, CandidateCriteria
from .clock import DAY, HOUR, MINUTE, parse_clock
from .humans import HashtagVocabulary
from .platform import Archetype

ARCHETYPE = {
    "hybrid_network": Archetype.HYBRID_BOT,
    "naive_bot_army": Archetype.NAIVE_BOT,
    "reactive": Archetype.NAIVE_BOT,
}

CONTENT_DB = {
    "hybrid_network": "content_hybrid.jsonl",
    "naive_bot_army": "content_naive.jsonl",
    "reactive": None,
}

_PROFILE_FIELDS = {f.name for f in dataclasses.fields(BotProfile)}
_EXTRA_FIELDS = {"profile_completeness"}
_CRITERIA_FIELDS = {f.name for f in dataclasses.fields(CandidateCriteria)}


def validate_overrides(overrides: dict[str, Any], where: str) -> None:
    for key, value in overrides.items():
        if key not in _PROFILE_FIELDS | _EXTRA_FIELDS:
            raise ValueError(f"{where}.{key}: unknown bot profile field")
        if key == "candidate_criteria":
            if not isinstance(value, dict):
                raise ValueError(f"{where}.{key}: expected a mapping")
            for k in value:
                if k not in _CRITERIA_FIELDS:
                    raise ValueError(f"{where}.{key}.{k}: unknown candidate criteria field")


def _time(v: Any) -> int:
    return parse_clock(v) if isinstance(v, str) else int(v)


def apply_overrides(profile: BotProfile, overrides: dict[str, Any]) -> BotProfile:
    changes: dict[str, Any] = {}
    for key, value in overrides.items():
        if key in _EXTRA_FIELDS:
            continue
        if key in ("active_start", "active_end"):
            value = _time(value)
        elif key == "rest_periods":
            value = [(_time(s), _time(e)) for s, e in value]
        elif key == "candidate_criteria":
            base = dataclasses.asdict(profile.candidate_criteria)
            base.update(value)
            base["ratio_band"] = tuple(base["ratio_band"])
            value = CandidateCriteria(**base)
        elif key in ("topics", "reply_keywords"):
            value = tuple(value)
        changes[key] = value
    return dataclasses.replace(profile, **changes)


def hybrid_profile(rng: random.Random, vocabulary: HashtagVocabulary) -> BotProfile:
    """An individualized human-like profile: own day-night cycle, rates and topics."""
    start = rng.randint(6 * HOUR + 30 * MINUTE, 9 * HOUR)
    end = rng.randint(21 * HOUR + 30 * MINUTE, 23 * HOUR + 45 * MINUTE)
    rests = []
    if rng.random() < 0.7:
        lunch = 12 * HOUR + rng.randint(-30, 30) * MINUTE
        rests.append((lunch, lunch + rng.randint(40, 75) * MINUTE))
    topics = rng.sample(vocabulary.top(40), 6)
    return BotProfile(
        active_start=start,
        active_end=end,
        window_jitter_min=30.0,
        rest_periods=rests,
        posts_per_day=round(rng.uniform(2.0, 4.0), 2),
        media_per_day=round(rng.uniform(0.0, 0.5), 2),
        retweets_per_day=round(rng.uniform(2.0, 4.0), 2),
        follows_per_day=30.0,
        jitter=round(rng.uniform(0.3, 0.5), 2),
        topics=tuple(topics),
        candidate_criteria=CandidateCriteria(),
        reciprocity_window=24 * HOUR,
        max_ratio=3.0,
    )


def naive_profile(rng: random.Random, vocabulary: HashtagVocabulary) -> BotProfile:
    return BotProfile(
        active_start=0,
        active_end=DAY,
        window_jitter_min=0.0,
        posts_per_day=24.0,
        media_per_day=0.0,
        retweets_per_day=0.0,
        follows_per_day=200.0,
        follow_batch=10,
        jitter=0.0,
        topics=tuple(vocabulary.top(10)),
        candidate_criteria=CandidateCriteria(ratio_band=(1e-6, 1e6), min_activity=0, prefer_popular=False),
        reciprocity_window=None,
        max_ratio=None,
    )


def reactive_profile(rng: random.Random, vocabulary: HashtagVocabulary) -> BotProfile:
    tag = vocabulary.tags[min(len(vocabulary.tags) - 1, 149)]
    return BotProfile(
        active_start=0,
        active_end=DAY,
        posts_per_day=0.0,
        retweets_per_day=0.0,
        follows_per_day=0.0,
        jitter=0.0,
        topics=(tag,),
        reciprocity_window=None,
        max_ratio=None,
        reply_delay=0,
        reply_keywords=(tag,),
    )


_FACTORIES = {
    "hybrid_network": hybrid_profile,
    "naive_bot_army": naive_profile,
    "reactive": reactive_profile,
}


def profile_completeness(preset: str, rng: random.Random) -> float:
    if preset == "hybrid_network":
        return round(rng.uniform(0.85, 1.0), 3)
    if preset == "naive_bot_army":
        return 0.15
    return 0.3


def make_bot_profile(
    preset: str,
    rng: random.Random,
    vocabulary: HashtagVocabulary,
    overrides: dict[str, Any] | None = None,
) -> BotProfile:
    profile = _FACTORIES[preset](rng, vocabulary)
    if overrides:
        profile = apply_overrides(profile, overrides)
    return profile
