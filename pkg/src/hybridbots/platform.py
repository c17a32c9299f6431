"""The simulated microblogging service.

All mutations go through a handful of methods (``create_account``,
``set_follow``, ``remove_follow``, ``submit_post``). When ``journal`` is a
list, each mutation appends a JSON-ready effect record to it; replaying those
records with :meth:`Platform.apply_effect` rebuilds the same state.
"""

from __future__ import annotations

import json
import random
from bisect import bisect_left, bisect_right
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from .engine import EventRecord, SimulationError

STATE_SCHEMA = "hybridbots-state"
STATE_VERSION = 1


class PostKind(str, Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"
    REPLY = "reply"
    MEDIA = "media"


class Archetype(str, Enum):
    HUMAN = "human"
    NAIVE_BOT = "naive_bot"
    HYBRID_BOT = "hybrid_bot"


class DuplicateHandle(SimulationError):
    pass


class UnknownAccount(SimulationError):
    pass


class SelfFollow(SimulationError):
    pass


class DanglingReference(SimulationError):
    pass


class InvalidCoverage(SimulationError):
    pass


class InvalidDescriptor(SimulationError):
    pass


class StateSchemaError(SimulationError):
    pass


@dataclass(slots=True)
class ContentDescriptor:
    length: int
    token_entropy: float
    hashtags: tuple = ()
    emoticon_count: int = 0
    polarity: float = 0.0
    slang_fraction: float = 0.0
    media: bool = False
    text: str | None = None

    def __post_init__(self):
        if self.length < 0:
            raise InvalidDescriptor(f"length must be >= 0, got {self.length}")
        if self.token_entropy < 0:
            raise InvalidDescriptor(f"token_entropy must be >= 0, got {self.token_entropy}")
        if self.emoticon_count < 0:
            raise InvalidDescriptor("emoticon_count must be >= 0")
        if not -1.0 <= self.polarity <= 1.0:
            raise InvalidDescriptor(f"polarity out of [-1, 1]: {self.polarity}")
        if not 0.0 <= self.slang_fraction <= 1.0:
            raise InvalidDescriptor(f"slang_fraction out of [0, 1]: {self.slang_fraction}")
        if not isinstance(self.hashtags, tuple):
            self.hashtags = tuple(self.hashtags)

    def to_dict(self) -> dict:
        d = {
            "length": self.length,
            "token_entropy": self.token_entropy,
            "hashtags": list(self.hashtags),
            "emoticon_count": self.emoticon_count,
            "polarity": self.polarity,
            "slang_fraction": self.slang_fraction,
            "media": self.media,
        }
        if self.text is not None:
            d["text"] = self.text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ContentDescriptor":
        return cls(
            length=int(d["length"]),
            token_entropy=float(d["token_entropy"]),
            hashtags=tuple(d.get("hashtags", ())),
            emoticon_count=int(d.get("emoticon_count", 0)),
            polarity=float(d.get("polarity", 0.0)),
            slang_fraction=float(d.get("slang_fraction", 0.0)),
            media=bool(d.get("media", False)),
            text=d.get("text"),
        )


@dataclass(slots=True)
class Account:
    id: int
    handle: str
    created_at: int
    profile_completeness: float
    locale: str
    archetype: Archetype

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "handle": self.handle,
            "created_at": self.created_at,
            "profile_completeness": self.profile_completeness,
            "locale": self.locale,
            "archetype": self.archetype.value,
        }


@dataclass(slots=True)
class Post:
    id: int
    author: int
    at: int
    kind: PostKind
    descriptor: ContentDescriptor
    ref_post: int | None = None
    retweets: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "author": self.author,
            "at": self.at,
            "kind": self.kind.value,
            "ref_post": self.ref_post,
            "descriptor": self.descriptor.to_dict(),
        }


@dataclass(frozen=True)
class FollowEdge:
    follower: int
    followee: int
    since: int


@dataclass(frozen=True)
class AccountSnapshot:
    """Public metadata of an account at one instant. Never carries archetype."""

    id: int
    at: int
    followers: int
    following: int
    posts_by_kind: dict = field(default_factory=dict)
    account_age: int = 0
    profile_completeness: float = 0.0
    locale: str = "ww"

    @property
    def posts(self) -> int:
        return sum(self.posts_by_kind.values())

    @property
    def ratio(self) -> float:
        """following / followers, with an empty follower set counted as one."""
        return self.following / max(self.followers, 1)


@dataclass(eq=False)
class Subscription:
    topics: frozenset | None
    coverage: float
    rng: random.Random
    callback: Callable[[Post], None]


def follow_ratio(following: int, followers: int) -> float:
    return following / max(followers, 1)


class Platform:
    def __init__(self, timeline_cap: int = 1000):
        self.timeline_cap = timeline_cap
        self.accounts: list[Account] = []
        self._handles: dict[str, int] = {}
        self.followers: list[set] = []
        self.following: list[set] = []
        self.edge_since: dict[tuple[int, int], int] = {}
        self.posts: list[Post] = []
        self._post_times: list[int] = []
        self._author_posts: list[list[int]] = []
        self._author_times: list[list[int]] = []
        self._author_kinds: list[Counter] = []
        self._tag_posts: dict[str, list[int]] = {}
        self._tag_times: dict[str, list[int]] = {}
        self.timelines: list[deque] = []
        # (t, follower, followee, +1/-1) in execution order
        self._changes: list[tuple[int, int, int, int]] = []
        self._change_times: list[int] = []
        self._subs_by_tag: dict[str, list[Subscription]] = {}
        self._subs_all: list[Subscription] = []
        self.follow_listeners: list[Callable[[int, int, int], None]] = []
        self.journal: list | None = None
        self.clock = 0

    # -- accounts -----------------------------------------------------------

    def create_account(
        self,
        handle: str,
        at: int,
        *,
        profile_completeness: float = 0.5,
        locale: str = "ww",
        archetype: Archetype | str = Archetype.HUMAN,
        created_at: int | None = None,
    ) -> int:
        if handle in self._handles:
            raise DuplicateHandle(handle)
        if not 0.0 <= profile_completeness <= 1.0:
            raise ValueError(f"profile_completeness out of [0, 1]: {profile_completeness}")
        created = at if created_at is None else created_at
        aid = len(self.accounts)
        acct = Account(aid, handle, int(created), float(profile_completeness), locale, Archetype(archetype))
        self.accounts.append(acct)
        self._handles[handle] = aid
        self.followers.append(set())
        self.following.append(set())
        self._author_posts.append([])
        self._author_times.append([])
        self._author_kinds.append(Counter())
        self.timelines.append(deque(maxlen=self.timeline_cap))
        if self.journal is not None:
            self.journal.append({"op": "account", **acct.to_dict()})
        return aid

    def _check(self, aid: int) -> None:
        if not 0 <= aid < len(self.accounts):
            raise UnknownAccount(aid)

    def handle_id(self, handle: str) -> int:
        return self._handles[handle]

    # -- follow graph ---------------------------------------------------------

    def set_follow(self, a: int, b: int, at: int) -> bool:
        """Create edge a -> b. Returns False when a already follows b."""
        if a == b:
            raise SelfFollow(a)
        self._check(a)
        self._check(b)
        if b in self.following[a]:
            return False
        self.following[a].add(b)
        self.followers[b].add(a)
        self.edge_since[(a, b)] = at
        self._changes.append((at, a, b, 1))
        self._change_times.append(at)
        if self.journal is not None:
            self.journal.append({"op": "follow", "a": a, "b": b, "at": at})
        for listener in self.follow_listeners:
            listener(a, b, at)
        return True

    def remove_follow(self, a: int, b: int, at: int) -> bool:
        """Remove edge a -> b. Returns False when there is no such edge."""
        self._check(a)
        self._check(b)
        if b not in self.following[a]:
            return False
        self.following[a].discard(b)
        self.followers[b].discard(a)
        del self.edge_since[(a, b)]
        self._changes.append((at, a, b, -1))
        self._change_times.append(at)
        if self.journal is not None:
            self.journal.append({"op": "unfollow", "a": a, "b": b, "at": at})
        return True

    def follows(self, a: int, b: int) -> bool:
        return b in self.following[a]

    def edges(self) -> list[FollowEdge]:
        return [FollowEdge(a, b, t) for (a, b), t in sorted(self.edge_since.items())]

    # -- posts ----------------------------------------------------------------

    def submit_post(
        self,
        author: int,
        descriptor: ContentDescriptor,
        kind: PostKind | str = PostKind.ORIGINAL,
        ref_post: int | None = None,
        at: int = 0,
    ) -> int:
        self._check(author)
        kind = PostKind(kind)
        if kind in (PostKind.RETWEET, PostKind.REPLY):
            if ref_post is None or not 0 <= ref_post < len(self.posts):
                raise DanglingReference(f"{kind.value} references missing post {ref_post}")
        elif ref_post is not None and not 0 <= ref_post < len(self.posts):
            raise DanglingReference(f"reference to missing post {ref_post}")
        if kind is PostKind.MEDIA and not descriptor.media:
            raise InvalidDescriptor("media posts need a media-flagged descriptor")
        if self._post_times and at < self._post_times[-1]:
            raise ValueError("posts must be submitted in time order")
        pid = len(self.posts)
        post = Post(pid, author, at, kind, descriptor, ref_post)
        self.posts.append(post)
        self._post_times.append(at)
        self._author_posts[author].append(pid)
        self._author_times[author].append(at)
        self._author_kinds[author][kind.value] += 1
        if kind is PostKind.RETWEET:
            self.posts[ref_post].retweets += 1
        for tag in descriptor.hashtags:
            lst = self._tag_posts.get(tag)
            if lst is None:
                self._tag_posts[tag] = [pid]
                self._tag_times[tag] = [at]
            else:
                lst.append(pid)
                self._tag_times[tag].append(at)
        timelines = self.timelines
        for f in self.followers[author]:
            timelines[f].append(pid)
        if self.journal is not None:
            self.journal.append({"op": "post", **post.to_dict()})
        self._notify(post)
        return pid

    def _notify(self, post: Post) -> None:
        # identity-keyed and insertion-ordered, so each listener draws once
        seen: dict[Subscription, None] = {}
        for tag in post.descriptor.hashtags:
            subs = self._subs_by_tag.get(tag)
            if subs:
                seen.update(dict.fromkeys(subs))
        seen.update(dict.fromkeys(self._subs_all))
        for sub in seen:
            if sub.rng.random() < sub.coverage:
                sub.callback(post)

    def subscribe(
        self,
        topics: Iterable[str] | None,
        coverage: float,
        rng: random.Random,
        callback: Callable[[Post], None],
    ) -> Subscription:
        """Live stream listener with the same Bernoulli rule as ``sample_stream``."""
        _check_coverage(coverage)
        sub = Subscription(frozenset(topics) if topics is not None else None, coverage, rng, callback)
        if sub.topics is None:
            self._subs_all.append(sub)
        else:
            for tag in sorted(sub.topics):
                self._subs_by_tag.setdefault(tag, []).append(sub)
        return sub

    def posts_by(self, author: int) -> list[Post]:
        return [self.posts[i] for i in self._author_posts[author]]

    def post_count_between(self, author: int, t0: int, t1: int) -> int:
        times = self._author_times[author]
        return bisect_left(times, t1) - bisect_left(times, t0)

    def index_range(self, t0: int, t1: int) -> tuple[int, int]:
        """Post-id bounds ``[lo, hi)`` of posts created in ``[t0, t1)``."""
        return bisect_left(self._post_times, t0), bisect_left(self._post_times, t1)

    def posts_in_window(self, t0: int, t1: int) -> list[Post]:
        lo, hi = self.index_range(t0, t1)
        return self.posts[lo:hi]

    def matching(self, topics: Iterable[str] | None, t0: int, t1: int) -> list[Post]:
        if topics is None:
            return self.posts_in_window(t0, t1)
        ids: set[int] = set()
        for tag in topics:
            times = self._tag_times.get(tag)
            if not times:
                continue
            lo = bisect_left(times, t0)
            hi = bisect_left(times, t1)
            ids.update(self._tag_posts[tag][lo:hi])
        return [self.posts[i] for i in sorted(ids)]

    def sample_stream(
        self,
        topics: Iterable[str] | None,
        coverage: float,
        window: tuple[int, int],
        rng: random.Random,
    ) -> list[Post]:
        """Posts in ``[t0, t1)`` matching any topic, each kept with prob ``coverage``."""
        _check_coverage(coverage)
        t0, t1 = window
        pool = self.matching(topics, t0, t1)
        if coverage == 0.0:
            return []
        if coverage == 1.0:
            return pool
        return [p for p in pool if rng.random() < coverage]

    def trending(
        self, window: tuple[int, int], k: int | None, locale: str | None = None
    ) -> list[tuple[str, int]]:
        """Top-k hashtags by post count in ``[t0, t1)``; ties broken lexicographically.

        ``k=None`` returns the full ranking.
        """
        if k is not None and k < 1:
            raise ValueError("k must be >= 1")
        counts: Counter = Counter()
        accounts = self.accounts
        for post in self.posts_in_window(*window):
            if locale is not None and accounts[post.author].locale != locale:
                continue
            # a tag counts once per post
            counts.update(set(post.descriptor.hashtags))
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if k is None else ranked[:k]

    def account_snapshot(self, aid: int, at: int | None = None) -> AccountSnapshot:
        self._check(aid)
        acct = self.accounts[aid]
        followers = len(self.followers[aid])
        following = len(self.following[aid])
        if at is None:
            at = self.clock
        # undo graph changes that happened after `at`
        start = bisect_right(self._change_times, at)
        for t, a, b, delta in self._changes[start:]:
            if b == aid:
                followers -= delta
            if a == aid:
                following -= delta
        times = self._author_times[aid]
        by_kind: dict[str, int] = {k.value: 0 for k in PostKind}
        if not times or times[-1] <= at:
            by_kind.update(self._author_kinds[aid])
        else:
            posts = self.posts
            for pid in self._author_posts[aid][: bisect_right(times, at)]:
                by_kind[posts[pid].kind.value] += 1
        return AccountSnapshot(
            id=aid,
            at=at,
            followers=followers,
            following=following,
            posts_by_kind=by_kind,
            account_age=at - acct.created_at,
            profile_completeness=acct.profile_completeness,
            locale=acct.locale,
        )

    def current_ratio(self, aid: int) -> float:
        return follow_ratio(len(self.following[aid]), len(self.followers[aid]))

    # -- replay and export -----------------------------------------------------

    def apply_effect(self, eff: dict) -> None:
        op = eff["op"]
        if op == "post":
            self.submit_post(
                eff["author"],
                ContentDescriptor.from_dict(eff["descriptor"]),
                eff["kind"],
                eff["ref_post"],
                eff["at"],
            )
        elif op == "follow":
            self.set_follow(eff["a"], eff["b"], eff["at"])
        elif op == "unfollow":
            self.remove_follow(eff["a"], eff["b"], eff["at"])
        elif op == "account":
            aid = self.create_account(
                eff["handle"],
                eff["created_at"],
                profile_completeness=eff["profile_completeness"],
                locale=eff["locale"],
                archetype=eff["archetype"],
            )
            if aid != eff["id"]:
                raise StateSchemaError(f"replayed account id {aid} != logged {eff['id']}")
        else:
            raise StateSchemaError(f"unknown effect op {op!r}")

    @classmethod
    def replay(cls, records: Iterable[EventRecord], timeline_cap: int = 1000) -> "Platform":
        plat = cls(timeline_cap=timeline_cap)
        for rec in records:
            for eff in rec.payload.get("effects", ()):
                plat.apply_effect(eff)
            plat.clock = rec.fire_at
        return plat

    def export_lines(self, as_of: int | None = None) -> list[str]:
        as_of = self.clock if as_of is None else as_of
        dumps = _dumps
        lines = [
            dumps(
                {
                    "schema": STATE_SCHEMA,
                    "version": STATE_VERSION,
                    "as_of": as_of,
                    "accounts": len(self.accounts),
                    "edges": len(self.edge_since),
                    "posts": len(self.posts),
                }
            )
        ]
        for acct in self.accounts:
            lines.append(dumps({"type": "account", **acct.to_dict()}))
        for (a, b), t in sorted(self.edge_since.items()):
            lines.append(dumps({"type": "edge", "follower": a, "followee": b, "since": t}))
        for post in self.posts:
            lines.append(dumps({"type": "post", **post.to_dict()}))
        return lines

    def export_text(self, as_of: int | None = None) -> str:
        return "\n".join(self.export_lines(as_of)) + "\n"

    @classmethod
    def from_export(cls, lines: Iterable[str], timeline_cap: int = 1000) -> "Platform":
        it = iter(lines)
        try:
            header = json.loads(next(it))
        except StopIteration:
            raise StateSchemaError("empty state export") from None
        if header.get("schema") != STATE_SCHEMA or header.get("version") != STATE_VERSION:
            raise StateSchemaError(f"unsupported state header: {header}")
        plat = cls(timeline_cap=timeline_cap)
        edges = []
        for line in it:
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type", None)
            if kind == "account":
                rec["op"] = "account"
                plat.apply_effect(rec)
            elif kind == "edge":
                edges.append((rec["since"], rec["follower"], rec["followee"]))
            elif kind == "post":
                rec["op"] = "post"
                plat.apply_effect(rec)
            else:
                raise StateSchemaError(f"unknown record type {kind!r}")
        # graph changes must stay time-ordered for snapshots
        edges.sort()
        for since, a, b in edges:
            plat.set_follow(a, b, since)
        plat.clock = header["as_of"]
        if len(plat.accounts) != header["accounts"] or len(plat.posts) != header["posts"]:
            raise StateSchemaError("record counts disagree with header")
        return plat

    def check_consistency(self) -> None:
        """Raise AssertionError if counters, edges or references disagree."""
        n_in = [0] * len(self.accounts)
        n_out = [0] * len(self.accounts)
        for (a, b) in self.edge_since:
            assert a != b, "self edge"
            n_out[a] += 1
            n_in[b] += 1
        for aid in range(len(self.accounts)):
            assert len(self.followers[aid]) == n_in[aid], f"followers mismatch for {aid}"
            assert len(self.following[aid]) == n_out[aid], f"following mismatch for {aid}"
        for post in self.posts:
            if post.kind in (PostKind.RETWEET, PostKind.REPLY):
                assert post.ref_post is not None and post.ref_post < post.id


def _check_coverage(coverage: float) -> None:
    if not 0.0 <= coverage <= 1.0:
        raise InvalidCoverage(f"coverage must be within [0, 1], got {coverage}")


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def rank_of(ranked: Sequence[tuple[str, int]], tag: str) -> int | None:
    for i, (t, _) in enumerate(ranked, start=1):
        if t == tag:
            return i
    return None
