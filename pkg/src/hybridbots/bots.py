"""Bot agents: the reactive reply bot and the profile-driven hybrid bot.

A hybrid bot is a set of actuators sharing one :class:`BotProfile`:
collection (stream listener that stores follow candidates), follow
(follow-for-follow with a reciprocity window and blacklist), and posting
(originals, media and retweets). The profile answers "when is the next
action" for every actuator.
"""

from __future__ import annotations

import json
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .clock import DAY, HOUR, DailySchedule, normalize, subtract
from .engine import SimulationError, derive_stream
from .platform import ContentDescriptor, Platform, Post, PostKind, follow_ratio

logger = logging.getLogger(__name__)

ORIGINAL = "original"
MEDIA = "media"
RETWEET = "retweet"
FOLLOW = "follow"
ACTION_KINDS = (ORIGINAL, MEDIA, RETWEET, FOLLOW)


class ZeroRate(SimulationError):
    pass


class EmptyContentDB(SimulationError):
    pass


@dataclass
class CandidateCriteria:
    ratio_band: tuple[float, float] = (0.5, 2.0)
    min_activity: int = 2
    lookback: int = 3 * DAY
    prefer_popular: bool = True

    def __post_init__(self):
        lo, hi = self.ratio_band
        if not 0 < lo <= hi:
            raise ValueError(f"ratio_band lower bound must be > 0 and <= upper: {self.ratio_band}")
        if self.min_activity < 0:
            raise ValueError("min_activity must be >= 0")


@dataclass
class BotProfile:
    active_start: int = 7 * HOUR
    active_end: int = 23 * HOUR
    window_jitter_min: float = 0.0
    rest_periods: list[tuple[int, int]] = field(default_factory=list)
    posts_per_day: float = 3.0
    media_per_day: float = 0.0
    retweets_per_day: float = 3.0
    follows_per_day: float = 30.0
    follow_batch: int = 1
    jitter: float = 0.3
    topics: tuple = ()
    candidate_criteria: CandidateCriteria = field(default_factory=CandidateCriteria)
    reciprocity_window: int | None = 24 * HOUR
    max_ratio: float | None = 3.0
    reply_delay: int = 0
    reply_keywords: tuple = ()

    def __post_init__(self):
        for name in ("posts_per_day", "media_per_day", "retweets_per_day", "follows_per_day"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.jitter <= 1.0:
            raise ValueError(f"jitter must be in [0, 1], got {self.jitter}")
        if self.reciprocity_window is not None and self.reciprocity_window <= 0:
            raise ValueError("reciprocity_window must be > 0")
        if not 0 <= self.active_start < self.active_end <= DAY:
            raise ValueError("active window must satisfy 0 <= start < end <= 24h")
        for s, e in self.rest_periods:
            if not self.active_start <= s < e <= self.active_end:
                raise ValueError(f"rest period {(s, e)} outside the active window")
        if self.follow_batch < 1:
            raise ValueError("follow_batch must be >= 1")
        if self.reply_delay < 0:
            raise ValueError("reply_delay must be >= 0")
        self.topics = tuple(self.topics)
        self.reply_keywords = tuple(self.reply_keywords)

    def rate(self, kind: str) -> float:
        """Mean actuator invocations per day; follows tick once per batch."""
        return {
            ORIGINAL: self.posts_per_day,
            MEDIA: self.media_per_day,
            RETWEET: self.retweets_per_day,
            FOLLOW: self.follows_per_day / self.follow_batch,
        }[kind]

    @property
    def nominal_intervals(self) -> list[tuple[int, int]]:
        return subtract([(self.active_start, self.active_end)], normalize(self.rest_periods))

    @property
    def active_seconds_per_day(self) -> int:
        return sum(e - s for s, e in self.nominal_intervals)

    def in_rest(self, t: int) -> bool:
        off = t % DAY
        return any(s <= off < e for s, e in self.rest_periods)


def build_schedule(profile: BotProfile, root_seed: int = 0, label: str = "bot") -> DailySchedule:
    """Daily active intervals; window edges move by up to ``window_jitter_min`` per day."""
    if profile.window_jitter_min <= 0:
        return DailySchedule.fixed(profile.nominal_intervals)
    spread = int(profile.window_jitter_min * 60)
    rests = normalize(profile.rest_periods)

    def day_intervals(day: int) -> list[tuple[int, int]]:
        rng = derive_stream(root_seed, f"{label}/window/{day}")
        start = min(max(profile.active_start + rng.randint(-spread, spread), 0), DAY - 1)
        end = min(max(profile.active_end + rng.randint(-spread, spread), start + 1), DAY)
        return subtract([(start, end)], rests)

    return DailySchedule(day_intervals)


def next_action_time(
    profile: BotProfile,
    action_kind: str,
    now: int,
    rng: random.Random,
    schedule: DailySchedule | None = None,
) -> int:
    """Propose the next time for ``action_kind``.

    The base interval spreads the daily rate over the active seconds of a day
    and is scaled by uniform noise in ``[1 - jitter, 1 + jitter]``. A proposal
    that falls into a rest period or outside the active window moves to the
    next active instant plus a jittered offset.
    """
    rate = profile.rate(action_kind)
    if rate <= 0:
        raise ZeroRate(f"{action_kind} rate is zero")
    if schedule is None:
        schedule = DailySchedule.fixed(profile.nominal_intervals)
    base = profile.active_seconds_per_day / rate
    j = profile.jitter
    t = now + max(1, round(base * rng.uniform(1.0 - j, 1.0 + j)))
    if not schedule.is_active(t):
        t = schedule.next_active(t) + round(rng.uniform(0.0, j * min(base, HOUR)))
        if not schedule.is_active(t):
            t = schedule.next_active(t)
    return t


def collect_candidates(
    sampled_posts: Iterable[Post],
    criteria: CandidateCriteria,
    blacklist: set,
    existing: set,
    *,
    platform: Platform,
    self_id: int,
    now: int,
) -> list[int]:
    """Authors of sampled posts that satisfy ``criteria``, best first."""
    lo, hi = criteria.ratio_band
    best: dict[int, int] = {}
    order: list[int] = []
    checked: dict[int, bool] = {}
    for post in sampled_posts:
        author = post.author
        if author == self_id or author in blacklist or author in existing:
            continue
        ok = checked.get(author)
        if ok is None:
            ratio = follow_ratio(len(platform.following[author]), len(platform.followers[author]))
            ok = lo <= ratio <= hi
            if ok and criteria.min_activity:
                ok = (
                    platform.post_count_between(author, now - criteria.lookback, now + 1)
                    >= criteria.min_activity
                )
            checked[author] = ok
        if not ok:
            continue
        if author not in best:
            order.append(author)
            best[author] = post.retweets
        elif post.retweets > best[author]:
            best[author] = post.retweets
    if criteria.prefer_popular:
        return sorted(order, key=lambda a: (-best[a], a))
    return order


class _Union:
    """Membership test over several containers without copying them."""

    __slots__ = ("parts",)

    def __init__(self, *parts):
        self.parts = parts

    def __contains__(self, item) -> bool:
        for p in self.parts:
            if item in p:
                return True
        return False


class FollowState(str, Enum):
    PENDING = "pending"
    FRIEND = "friend"
    BLACKLISTED = "blacklisted"


@dataclass
class FollowRecord:
    target: int
    initiated_at: int
    state: FollowState = FollowState.PENDING
    deadline: int | None = None
    resolved_at: int | None = None


class ContentDB:
    """Human-authored post content for bots to publish."""

    def __init__(self, entries: Sequence[ContentDescriptor]):
        self.entries = list(entries)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ContentDB":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "ContentDB":
        entries = [ContentDescriptor.from_dict(json.loads(ln)) for ln in lines if ln.strip()]
        return cls(entries)

    @classmethod
    def packaged(cls, name: str) -> "ContentDB":
        text = resources.files("hybridbots.data").joinpath(name).read_text(encoding="utf-8")
        return cls.from_lines(text.splitlines())

    def split(self) -> tuple[list[int], list[int]]:
        text = [i for i, e in enumerate(self.entries) if not e.media]
        media = [i for i, e in enumerate(self.entries) if e.media]
        return text, media


REPLY_TEMPLATE = ContentDescriptor(
    length=5, token_entropy=0.0, hashtags=(), emoticon_count=0, polarity=0.3, slang_fraction=0.0, text="Hello"
)


@dataclass(frozen=True)
class ReplyAction:
    ref_post: int
    descriptor: ContentDescriptor
    delay: int = 0


def reactive_reply(
    incoming_post: Post, keyword_rules: Iterable[str], self_id: int, delay: int = 0
) -> ReplyAction | None:
    """Greet the sender of a post that mentions a tracked keyword."""
    if incoming_post.author == self_id:
        return None
    rules = set(keyword_rules)
    desc = incoming_post.descriptor
    hit = any(tag in rules for tag in desc.hashtags)
    if not hit and desc.text:
        text = desc.text.lower()
        hit = any(k.lower() in text for k in rules)
    if not hit:
        return None
    return ReplyAction(incoming_post.id, REPLY_TEMPLATE, delay)


class BotAgent:
    """State of one bot plus its actuators.

    Methods mutate the platform directly and return short action tuples for
    inspection; the caller decides when they run.
    """

    buffer_size = 80

    def __init__(
        self,
        account_id: int,
        profile: BotProfile,
        content_db: ContentDB | None,
        schedule: DailySchedule,
        rng: random.Random,
        roster: set | None = None,
    ):
        self.id = account_id
        self.profile = profile
        self.content_db = content_db if content_db is not None else ContentDB([])
        self.schedule = schedule
        self.rng = rng
        self.roster = roster if roster is not None else set()
        self.records: dict[int, FollowRecord] = {}
        self.blacklist: set[int] = set()
        self.buffer: deque[Post] = deque(maxlen=self.buffer_size)
        self.warnings: list[str] = []
        self._pending: dict[int, FollowRecord] = {}
        self._last_content: dict[str, int] = {}
        self._retweeted: set[int] = set()
        self._follows_today: tuple[int, int] = (-1, 0)
        self._text_idx, self._media_idx = self.content_db.split()

    # collection actuator
    def on_stream_post(self, post: Post) -> None:
        if post.author != self.id:
            self.buffer.append(post)

    def is_active(self, t: int) -> bool:
        return self.schedule.is_active(t)

    def next_time(self, kind: str, now: int) -> int:
        return next_action_time(self.profile, kind, now, self.rng, self.schedule)

    # follow actuator
    def supervise(self, platform: Platform, now: int) -> list[tuple[str, int]]:
        """Promote answered pending follows; unfollow and blacklist expired ones."""
        actions = []
        for target, rec in list(self._pending.items()):
            since = platform.edge_since.get((target, self.id))
            if since is not None and since < rec.deadline:
                rec.state = FollowState.FRIEND
                rec.resolved_at = now
                del self._pending[target]
            elif now >= rec.deadline:
                platform.remove_follow(self.id, target, now)
                rec.state = FollowState.BLACKLISTED
                rec.resolved_at = now
                self.blacklist.add(target)
                del self._pending[target]
                actions.append(("unfollow", target))
        return actions

    def follow_tick(
        self, platform: Platform, now: int, budget: int | None = None
    ) -> list[tuple[str, int]]:
        actions = self.supervise(platform, now)
        if budget is None:
            budget = self.profile.follow_batch
        day = now // DAY
        if self._follows_today[0] != day:
            self._follows_today = (day, 0)
        daily_cap = int(round(self.profile.follows_per_day))
        room = min(budget, daily_cap - self._follows_today[1])
        if room <= 0:
            return actions
        existing = _Union(self.roster, self.records, platform.following[self.id])
        candidates = collect_candidates(
            self.buffer,
            self.profile.candidate_criteria,
            self.blacklist,
            existing,
            platform=platform,
            self_id=self.id,
            now=now,
        )
        window = self.profile.reciprocity_window
        for target in candidates:
            if room <= 0:
                break
            if self.profile.max_ratio is not None:
                following = len(platform.following[self.id])
                followers = len(platform.followers[self.id])
                if follow_ratio(following + 1, followers) > self.profile.max_ratio:
                    break
            if not platform.set_follow(self.id, target, now):
                continue
            rec = FollowRecord(target, now, deadline=None if window is None else now + window)
            self.records[target] = rec
            if window is not None:
                self._pending[target] = rec
            room -= 1
            self._follows_today = (day, self._follows_today[1] + 1)
            actions.append(("follow", target))
        return actions

    def pending_deadlines(self) -> list[int]:
        return sorted(r.deadline for r in self._pending.values() if r.deadline is not None)

    # post actuator (media is the picture actuator)
    def post_tick(self, platform: Platform, kind: str, now: int) -> list[tuple[str, int]]:
        if kind == RETWEET:
            return self._retweet(platform, now)
        pool = self._media_idx if kind == MEDIA else self._text_idx
        if not pool:
            msg = f"bot {self.id}: content database has no {kind} entries; posting disabled"
            if msg not in self.warnings:
                self.warnings.append(msg)
                logger.warning(msg)
            return []
        idx = self._draw_without_repeat(kind, pool)
        desc = self.content_db.entries[idx]
        pid = platform.submit_post(
            self.id, desc, PostKind.MEDIA if kind == MEDIA else PostKind.ORIGINAL, None, now
        )
        return [(kind, pid)]

    def _draw_without_repeat(self, kind: str, pool: list[int]) -> int:
        last = self._last_content.get(kind)
        if len(pool) == 1:
            idx = pool[0]
        else:
            choices = [i for i in pool if i != last]
            idx = choices[self.rng.randrange(len(choices))]
        self._last_content[kind] = idx
        return idx

    def _retweet(self, platform: Platform, now: int) -> list[tuple[str, int]]:
        options = []
        for post in self.buffer:
            original = post.ref_post if post.kind is PostKind.RETWEET else post.id
            if original in self._retweeted or platform.posts[original].author == self.id:
                continue
            options.append(original)
        if not options:
            return []
        options = sorted(set(options))
        original = options[self.rng.randrange(len(options))]
        self._retweeted.add(original)
        src = platform.posts[original]
        pid = platform.submit_post(self.id, src.descriptor, PostKind.RETWEET, original, now)
        return [(RETWEET, pid)]

    def state_counts(self) -> dict[str, int]:
        out = {s.value: 0 for s in FollowState}
        for rec in self.records.values():
            out[rec.state.value] += 1
        return out
