"""Observable account histories and their raw sub-features.

Raw sub-features are plain numbers (lengths, entropies, ratios). Turning them
into bounded class scores needs a human reference population and lives in
:mod:`hybridbots.detection.scoring`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..clock import DAY, HOUR
from ..platform import AccountSnapshot, Platform, Post, PostKind

CLASSES = ("sentiment", "content", "language", "friendship", "network", "temporal", "user")

NIGHT_HOURS = frozenset(range(1, 6))  # 01:00-05:59
YOUTH_SCALE_DAYS = 30.0
MIN_TREND_SPAN_DAYS = 2.0


class EmptyInput(ValueError):
    pass


class EmptyHistory(ValueError):
    pass


@dataclass
class AccountHistory:
    """Everything a detector may look at for one account, as of one instant.

    Built only from public platform data: profile metadata, authored posts and
    the current follow edges. There is deliberately no archetype field.
    """

    snapshot: AccountSnapshot
    posts: list[Post] = field(default_factory=list)
    received_edges: list[tuple[int, int]] = field(default_factory=list)  # (follower, since)
    initiated_edges: list[tuple[int, int]] = field(default_factory=list)  # (followee, since)
    neighbor_snapshots: dict[int, AccountSnapshot] = field(default_factory=dict)
    retweet_sources: list[int] = field(default_factory=list)

    @property
    def account_id(self) -> int:
        return self.snapshot.id

    @property
    def locale(self) -> str:
        return self.snapshot.locale

    def is_empty(self) -> bool:
        return not self.posts and not self.received_edges and not self.initiated_edges


class HistoryBuilder:
    """Builds :class:`AccountHistory` objects from a platform, caching neighbor snapshots."""

    def __init__(self, platform: Platform, as_of: int | None = None):
        self.platform = platform
        self.as_of = platform.clock if as_of is None else as_of
        self._snapshots: dict[int, AccountSnapshot] = {}

    def snapshot(self, aid: int) -> AccountSnapshot:
        snap = self._snapshots.get(aid)
        if snap is None:
            snap = self._snapshots[aid] = self.platform.account_snapshot(aid, self.as_of)
        return snap

    def history(self, aid: int) -> AccountHistory:
        plat = self.platform
        as_of = self.as_of
        posts = [p for p in plat.posts_by(aid) if p.at <= as_of]
        since = plat.edge_since
        received = sorted((f, since[(f, aid)]) for f in plat.followers[aid] if since[(f, aid)] <= as_of)
        initiated = sorted((g, since[(aid, g)]) for g in plat.following[aid] if since[(aid, g)] <= as_of)
        neighbors = {a for a, _ in received} | {b for b, _ in initiated}
        all_posts = plat.posts
        sources = [all_posts[p.ref_post].author for p in posts if p.kind is PostKind.RETWEET]
        return AccountHistory(
            snapshot=self.snapshot(aid),
            posts=posts,
            received_edges=received,
            initiated_edges=initiated,
            neighbor_snapshots={n: self.snapshot(n) for n in sorted(neighbors)},
            retweet_sources=sources,
        )

    def histories(self, ids: Iterable[int]) -> list[AccountHistory]:
        return [self.history(aid) for aid in ids]

    def active_ids(self) -> list[int]:
        """Accounts with at least one post or follow edge."""
        plat = self.platform
        return [
            aid
            for aid in range(len(plat.accounts))
            if plat.posts_by(aid) or plat.followers[aid] or plat.following[aid]
        ]


def circadian_entropy(timestamps: Iterable[int]) -> float:
    """Shannon entropy in bits of events over the 24 hour-of-day bins."""
    counts = Counter((int(t) % DAY) // HOUR for t in timestamps)
    n = sum(counts.values())
    if n == 0:
        raise EmptyInput("circadian_entropy needs at least one timestamp")
    # sorted bins keep the result independent of event order
    return -math.fsum((c / n) * math.log2(c / n) for _, c in sorted(counts.items())) + 0.0


# -- raw sub-features ---------------------------------------------------------

# (name, class, direction). direction: +1 only high values are bot-like,
# -1 only low values, 0 either side, None: already a [0, 1] score.
SUBFEATURES: tuple[tuple[str, str, int | None], ...] = (
    ("polarity_variance", "sentiment", -1),
    ("emoticon_rate", "sentiment", 0),
    ("mean_length", "content", 0),
    ("mean_token_entropy", "content", 0),
    ("slang_fraction", "language", 0),
    ("friend_ratio_dispersion", "friendship", 0),
    ("friend_ratio_mean", "friendship", 0),
    ("degree_ratio", "network", 0),
    ("retweet_concentration", "network", 0),
    ("circadian_entropy", "temporal", 0),
    ("interval_cv", "temporal", -1),
    ("night_fraction", "temporal", 1),
    ("youth", "user", None),
    ("incompleteness", "user", None),
    ("activity_trend", "user", 0),
)
SUBFEATURE_NAMES = tuple(name for name, _, _ in SUBFEATURES)
N_SUBFEATURES = len(SUBFEATURES)
NAN = float("nan")


def _log_ratio(snap: AccountSnapshot) -> float:
    return math.log((snap.following + 1) / (snap.followers + 1))


def raw_features(history: AccountHistory) -> np.ndarray:
    """Vector of raw sub-features; NaN where a feature is undefined for this history."""
    if history.is_empty():
        raise EmptyHistory(f"account {history.account_id} has no posts and no follow edges")
    out = np.full(N_SUBFEATURES, np.nan)
    posts = history.posts
    authored = [p.descriptor for p in posts if p.kind is not PostKind.RETWEET]

    if len(authored) >= 2:
        out[0] = _variance([d.polarity for d in authored])
    if authored:
        out[1] = _mean([d.emoticon_count for d in authored])
        out[2] = _mean([d.length for d in authored])
        out[3] = _mean([d.token_entropy for d in authored])
        out[4] = _mean([d.slang_fraction for d in authored])

    friends = [history.neighbor_snapshots[g] for g, _ in history.initiated_edges]
    if friends:
        lr = np.array([_log_ratio(s) for s in friends])
        out[5] = float(lr.std()) if len(lr) >= 2 else np.nan
        out[6] = float(lr.mean())
    out[7] = _log_ratio(history.snapshot)
    if len(history.retweet_sources) >= 2:
        counts = sorted(Counter(history.retweet_sources).values())
        total = sum(counts)
        out[8] = math.fsum((c / total) ** 2 for c in counts)

    times = sorted(p.at for p in posts)
    if times:
        out[9] = circadian_entropy(times)
        out[11] = sum(1 for t in times if (t % DAY) // HOUR in NIGHT_HOURS) / len(times)
    if len(times) >= 3:
        gaps = np.diff(np.array(times, dtype=float))
        mean = gaps.mean()
        out[10] = float(gaps.std() / mean) if mean > 0 else 0.0

    snap = history.snapshot
    out[12] = math.exp(-(snap.account_age / DAY) / YOUTH_SCALE_DAYS)
    out[13] = 1.0 - snap.profile_completeness
    out[14] = _activity_trend(times + [t for _, t in history.initiated_edges])
    return out


def _mean(xs: Sequence[float]) -> float:
    # fsum is exact, so the result does not depend on the order of xs
    return math.fsum(xs) / len(xs)


def _variance(xs: Sequence[float]) -> float:
    m = _mean(xs)
    return math.fsum((x - m) ** 2 for x in xs) / len(xs)


def _activity_trend(times: Sequence[int]) -> float:
    """Relative slope of daily action counts (per day, divided by the mean)."""
    if not times:
        return NAN
    t0, t1 = min(times), max(times)
    if (t1 - t0) / DAY < MIN_TREND_SPAN_DAYS:
        return NAN
    days = np.array([(t - t0) // DAY for t in times])
    counts = np.bincount(days).astype(float)
    x = np.arange(len(counts), dtype=float)
    slope = np.polyfit(x, counts, 1)[0]
    return float(slope / counts.mean())


def raw_feature_matrix(histories: Sequence[AccountHistory]) -> np.ndarray:
    if not histories:
        return np.empty((0, N_SUBFEATURES))
    return np.vstack([raw_features(h) for h in histories])
