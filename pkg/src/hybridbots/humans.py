"""Baseline human accounts: organic activity and follow-back reciprocity."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .clock import DAY, HOUR, DailySchedule
from .platform import AccountSnapshot, ContentDescriptor

POST = "post"
RETWEET = "retweet"


@dataclass(frozen=True)
class LocaleContent:
    """Population-level content distributions for one locale."""

    length_mean: float = 105.0
    length_sd: float = 45.0
    person_length_sd: float = 18.0
    chars_per_token: float = 6.0
    entropy_noise: float = 0.25
    hashtag_rate: float = 0.6
    emoticon_rate: float = 0.35
    person_emoticon_sd: float = 0.6
    polarity_mean: float = 0.05
    polarity_sd: float = 0.35
    person_polarity_sd: float = 0.12
    slang_mean: float = 0.08
    slang_concentration: float = 25.0
    person_slang_sd: float = 0.025


LOCALE_CONTENT = {
    "de": LocaleContent(length_mean=118.0, emoticon_rate=0.25, polarity_mean=0.02, slang_mean=0.07),
    "ww": LocaleContent(),
}


class HashtagVocabulary:
    """Zipf-distributed hashtag vocabulary shared by the population."""

    def __init__(self, size: int = 2000, exponent: float = 1.0, prefix: str = "#t"):
        if size < 1:
            raise ValueError("vocabulary size must be >= 1")
        width = len(str(size))
        self.tags = [f"{prefix}{i:0{width}d}" for i in range(1, size + 1)]
        weights = [1.0 / (r ** exponent) for r in range(1, size + 1)]
        total = 0.0
        self.cum_weights = []
        for w in weights:
            total += w
            self.cum_weights.append(total)

    def draw(self, rng: random.Random, n: int) -> tuple:
        if n <= 0:
            return ()
        tags = rng.choices(self.tags, cum_weights=self.cum_weights, k=n)
        return tuple(dict.fromkeys(tags))

    def top(self, n: int) -> list[str]:
        return self.tags[:n]


@dataclass
class ContentSampler:
    """Per-person descriptor generator around locale-level distributions."""

    locale: str
    length_mean: float
    emoticon_rate: float
    polarity_mean: float
    slang_mean: float
    params: LocaleContent
    vocabulary: HashtagVocabulary

    @classmethod
    def for_person(
        cls, locale: str, vocabulary: HashtagVocabulary, rng: random.Random
    ) -> "ContentSampler":
        p = LOCALE_CONTENT.get(locale, LOCALE_CONTENT["ww"])
        return cls(
            locale=locale,
            length_mean=max(20.0, rng.gauss(p.length_mean, p.person_length_sd)),
            emoticon_rate=p.emoticon_rate * math.exp(rng.gauss(0.0, p.person_emoticon_sd)),
            polarity_mean=_clip(rng.gauss(p.polarity_mean, p.person_polarity_sd), -0.9, 0.9),
            slang_mean=_clip(rng.gauss(p.slang_mean, p.person_slang_sd), 0.01, 0.6),
            params=p,
            vocabulary=vocabulary,
        )

    def sample(self, rng: random.Random) -> ContentDescriptor:
        p = self.params
        length = int(_clip(rng.gauss(self.length_mean, p.length_sd), 5, 280))
        tokens = max(1.0, length / p.chars_per_token)
        entropy = max(0.0, math.log2(tokens) + rng.gauss(0.0, p.entropy_noise))
        a = self.slang_mean * p.slang_concentration
        b = (1.0 - self.slang_mean) * p.slang_concentration
        return ContentDescriptor(
            length=length,
            token_entropy=round(entropy, 4),
            hashtags=self.vocabulary.draw(rng, _poisson(rng, p.hashtag_rate)),
            emoticon_count=_poisson(rng, self.emoticon_rate),
            polarity=round(_clip(rng.gauss(self.polarity_mean, p.polarity_sd), -1.0, 1.0), 4),
            slang_fraction=round(rng.betavariate(a, b), 4),
        )


@dataclass
class HumanProfile:
    post_rate: float
    retweet_rate: float
    active_hours: DailySchedule
    follow_back_prob: float = 0.2
    balanced_ratio_band: tuple[float, float] = (0.1, 4.0)
    out_of_band_penalty: float = 0.2
    latency_median_h: float = 6.0
    latency_sigma: float = 1.0
    latency_cap_h: float = 48.0
    content: ContentSampler | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.post_rate < 0 or self.retweet_rate < 0:
            raise ValueError("rates must be >= 0")
        for name in ("follow_back_prob", "out_of_band_penalty"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        lo, hi = self.balanced_ratio_band
        if not 0 < lo <= hi:
            raise ValueError(f"bad ratio band {self.balanced_ratio_band}")

    def rate(self, kind: str) -> float:
        return self.post_rate if kind == POST else self.retweet_rate


@dataclass(frozen=True)
class FollowBackDecision:
    accept: bool
    latency: int | None = None


def next_human_action(
    profile: HumanProfile, kind: str, now: int, rng: random.Random
) -> int | None:
    """Next time of a ``kind`` action: Poisson process in active time.

    The daily rate is spread over the account's active seconds, so nothing
    ever lands outside its active hours.
    """
    rate = profile.rate(kind)
    if rate <= 0:
        return None
    schedule = profile.active_hours
    day = now // DAY
    active = schedule.active_seconds(day) or schedule.active_seconds(day + 1)
    if active <= 0:
        return None
    gap = rng.expovariate(rate / active)
    t = schedule.advance(now + 1, gap)
    return t


def human_tick(profile: HumanProfile, now: int, rng: random.Random) -> list[tuple[int, str]]:
    """Next post and retweet times for one human, as ``(time, kind)`` pairs."""
    out = []
    for kind in (POST, RETWEET):
        t = next_human_action(profile, kind, now, rng)
        if t is not None:
            out.append((t, kind))
    return out


def follow_back_decision(
    responder: HumanProfile, requester_meta: AccountSnapshot, rng: random.Random
) -> FollowBackDecision:
    lo, hi = responder.balanced_ratio_band
    p = responder.follow_back_prob
    if not lo <= requester_meta.ratio <= hi:
        p *= responder.out_of_band_penalty
    # draw both numbers unconditionally so one decision consumes a fixed amount of stream
    u = rng.random()
    z = rng.gauss(0.0, 1.0)
    if u >= p:
        return FollowBackDecision(False)
    hours = min(responder.latency_median_h * math.exp(responder.latency_sigma * z), responder.latency_cap_h)
    return FollowBackDecision(True, max(1, int(hours * HOUR)))


def _clip(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    # inversion; lam stays small here
    L = math.exp(-lam)
    k = 0
    p = rng.random()
    while p > L:
        k += 1
        p *= rng.random()
    return k
