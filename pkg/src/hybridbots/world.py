"""Wires engine, platform and agents together from a :class:`RunConfig`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bots import (
    FOLLOW,
    MEDIA,
    ORIGINAL,
    REPLY_TEMPLATE,
    RETWEET,
    BotAgent,
    ContentDB,
    build_schedule,
    reactive_reply,
)
from .clock import DAY, HOUR, DailySchedule, parse_clock
from .config import RunConfig
from .engine import SYSTEM, Engine, EventRecord, RandomStream, derive_stream
from .humans import (
    POST,
    ContentSampler,
    HashtagVocabulary,
    HumanProfile,
    follow_back_decision,
    next_human_action,
)
from .platform import Archetype, ContentDescriptor, Platform, PostKind
from .presets import ARCHETYPE, CONTENT_DB, make_bot_profile, profile_completeness


@dataclass
class RosterEntry:
    account_id: int
    preset: str
    group: int
    index: int
    clique: bool = False


@dataclass
class Simulation:
    """One seeded run. Build with :meth:`from_config`, then call :meth:`run_until`."""

    config: RunConfig
    seed: int
    engine: Engine
    platform: Platform
    vocabulary: HashtagVocabulary
    t0: int
    humans: dict[int, HumanProfile] = field(default_factory=dict)
    bots: dict[int, BotAgent] = field(default_factory=dict)
    roster: list[RosterEntry] = field(default_factory=list)
    _streams: dict[str, RandomStream] = field(default_factory=dict, repr=False)
    _live: bool = False

    @classmethod
    def from_config(
        cls,
        config: RunConfig,
        seed: int | None = None,
        *,
        follow_back_prob: float | None = None,
        keep_log: bool = True,
    ) -> "Simulation":
        if follow_back_prob is not None:
            config = config.with_updates(**{"humans.follow_back_prob": float(follow_back_prob)})
        seed = config.seed if seed is None else int(seed)
        t0 = config.platform.start_day * DAY
        sim = cls(
            config=config,
            seed=seed,
            engine=Engine(start=t0, keep_log=keep_log),
            platform=Platform(timeline_cap=config.platform.timeline_cap),
            vocabulary=HashtagVocabulary(config.platform.hashtag_vocabulary, config.platform.hashtag_exponent),
            t0=t0,
        )
        sim._register()
        sim.engine.schedule(t0, SYSTEM, "bootstrap", {"seed": seed})
        return sim

    # -- plumbing -----------------------------------------------------------

    def stream(self, label: str) -> RandomStream:
        s = self._streams.get(label)
        if s is None:
            s = self._streams[label] = derive_stream(self.seed, label)
        return s

    def _register(self) -> None:
        eng = self.engine
        for action, fn in (
            ("bootstrap", self._bootstrap),
            ("human_post", self._human_post),
            ("human_retweet", self._human_retweet),
            ("human_follow_back", self._human_follow_back),
            ("bot_original", self._bot_post),
            ("bot_media", self._bot_post),
            ("bot_retweet", self._bot_post),
            ("bot_follow", self._bot_follow),
            ("bot_deadline", self._bot_deadline),
            ("bot_reply", self._bot_reply),
            ("push_post", self._push_post),
            ("push_retweet", self._push_retweet),
        ):
            eng.on(action, self._journaled(fn))
        self.platform.follow_listeners.append(self._on_follow)

    def _journaled(self, fn):
        plat = self.platform

        def handler(event: EventRecord):
            plat.journal = journal = []
            plat.clock = event.fire_at
            fn(event)
            plat.journal = None
            return journal

        return handler

    def run_until(self, t_end: int) -> list[EventRecord]:
        out = self.engine.run_until(t_end)
        self.platform.clock = self.engine.clock
        return out

    def run_days(self, days: float) -> list[EventRecord]:
        return self.run_until(self.t0 + int(days * DAY))

    @property
    def bot_ids(self) -> list[int]:
        return [r.account_id for r in self.roster]

    def ids_of(self, preset: str) -> list[int]:
        return [r.account_id for r in self.roster if r.preset == preset]

    # -- bootstrap ------------------------------------------------------------

    def _bootstrap(self, event: EventRecord) -> None:
        cfg = self.config
        now = event.fire_at
        self._create_humans(now)
        self._create_bots(now)
        self._live = True
        for hid, prof in self.humans.items():
            rng = self.stream(f"human/{hid}/activity")
            for kind, action in ((POST, "human_post"), ("retweet", "human_retweet")):
                t = next_human_action(prof, kind, now, rng)
                if t is not None:
                    self.engine.schedule(t, hid, action)
        for bid, agent in self.bots.items():
            for kind in (ORIGINAL, MEDIA, RETWEET, FOLLOW):
                if agent.profile.rate(kind) > 0:
                    self.engine.schedule(agent.next_time(kind, now), bid, f"bot_{kind}")
        if cfg.plan.push.enabled:
            self._schedule_push()

    def _create_humans(self, now: int) -> None:
        cfg = self.config
        hc = cfg.humans
        n = cfg.platform.humans
        if n == 0:
            return
        g = self.stream("bootstrap/humans").numpy()
        locales = sorted(cfg.platform.locales)
        weights = np.array([cfg.platform.locales[k] for k in locales], dtype=float)
        loc_idx = g.choice(len(locales), size=n, p=weights / weights.sum())
        ages = np.maximum(
            hc.age_days.median * np.exp(hc.age_days.sigma * g.standard_normal(n)), hc.min_age_days
        )
        completeness = g.beta(*hc.completeness_beta, size=n)
        post_rates = hc.post_rate.median * np.exp(hc.post_rate.sigma * g.standard_normal(n))
        rt_rates = hc.retweet_rate.median * np.exp(hc.retweet_rate.sigma * g.standard_normal(n))
        starts = np.clip(g.normal(hc.active_start_h.mean, hc.active_start_h.sd, n), 4.0, 12.0)
        lengths = np.clip(g.normal(hc.active_length_h.mean, hc.active_length_h.sd, n), 8.0, 20.0)
        plat = self.platform
        ids = []
        for i in range(n):
            hid = plat.create_account(
                f"user{i:05d}",
                now,
                profile_completeness=round(float(completeness[i]), 3),
                locale=locales[loc_idx[i]],
                archetype=Archetype.HUMAN,
                created_at=now - int(ages[i] * DAY),
            )
            ids.append(hid)
            start = int(starts[i] * HOUR)
            end = start + int(lengths[i] * HOUR)
            self.humans[hid] = HumanProfile(
                post_rate=round(float(post_rates[i]), 4),
                retweet_rate=round(float(rt_rates[i]), 4),
                active_hours=DailySchedule.fixed([(start, end % DAY if end > DAY else end)]),
                follow_back_prob=hc.follow_back_prob,
                balanced_ratio_band=tuple(hc.balanced_ratio_band),
                out_of_band_penalty=hc.out_of_band_penalty,
                latency_median_h=hc.latency_median_h,
                latency_sigma=hc.latency_sigma,
                latency_cap_h=hc.latency_cap_h,
                content=ContentSampler.for_person(
                    locales[loc_idx[i]], self.vocabulary, self.stream(f"human/{hid}/content")
                ),
            )
        # organic follow graph among humans, skewed towards popular accounts
        k = np.clip(
            np.round(hc.following.median * np.exp(hc.following.sigma * g.standard_normal(n))), 1, min(500, n - 1)
        ).astype(int)
        pop = np.exp(hc.popularity_sigma * g.standard_normal(n))
        pop /= pop.sum()
        targets = g.choice(n, size=int(k.sum()), p=pop)
        pos = 0
        for i in range(n):
            chosen = sorted(set(int(t) for t in targets[pos : pos + k[i]]) - {i})
            pos += k[i]
            a = ids[i]
            for t in chosen:
                plat.set_follow(a, ids[t], now)

    def _create_bots(self, now: int) -> None:
        cfg = self.config
        plat = self.platform
        dbs: dict[str, ContentDB] = {}
        roster_ids: set[int] = set()
        for gi, group in enumerate(cfg.roster):
            name = group.content_db or CONTENT_DB[group.preset]
            db = None
            if name is not None:
                if name not in dbs:
                    dbs[name] = ContentDB.from_jsonl(name) if group.content_db else ContentDB.packaged(name)
                db = dbs[name]
            for idx in range(group.count):
                label = f"bot/g{gi}/{idx}"
                prng = self.stream(f"{label}/profile")
                overrides = {**group.overrides, **group.per_bot.get(idx, {})}
                profile = make_bot_profile(group.preset, prng, self.vocabulary, overrides)
                completeness = overrides.get("profile_completeness", profile_completeness(group.preset, prng))
                bid = plat.create_account(
                    f"{group.preset}_{gi}_{idx:03d}",
                    now,
                    profile_completeness=completeness,
                    locale=group.locale,
                    archetype=ARCHETYPE[group.preset],
                )
                agent = BotAgent(
                    bid,
                    profile,
                    db,
                    build_schedule(profile, self.seed, label),
                    self.stream(f"{label}/actions"),
                    roster=roster_ids,
                )
                roster_ids.add(bid)
                self.bots[bid] = agent
                self.roster.append(RosterEntry(bid, group.preset, gi, idx))
        for bid, agent in self.bots.items():
            prof = agent.profile
            if prof.topics:
                if prof.reply_keywords:
                    cb = self._reactive_callback(agent)
                else:
                    cb = agent.on_stream_post
                plat.subscribe(prof.topics, cfg.platform.stream_coverage, self.stream(f"stream/{bid}"), cb)
        # the first n hybrid bots start as a mutually connected clique
        clique = [r for r in self.roster if r.preset == "hybrid_network"][: cfg.plan.n_initially_befriended]
        for r in clique:
            r.clique = True
        for a in clique:
            for b in clique:
                if a is not b:
                    plat.set_follow(a.account_id, b.account_id, now)

    def _reactive_callback(self, agent: BotAgent):
        def cb(post):
            act = reactive_reply(post, agent.profile.reply_keywords, agent.id, agent.profile.reply_delay)
            if act is not None:
                self.engine.schedule(self.engine.clock + act.delay, agent.id, "bot_reply", {"ref_post": act.ref_post})

        return cb

    # -- humans ---------------------------------------------------------------

    def _human_post(self, event: EventRecord) -> None:
        hid = event.actor
        prof = self.humans[hid]
        desc = prof.content.sample(self.stream(f"human/{hid}/content"))
        self.platform.submit_post(hid, desc, PostKind.ORIGINAL, None, event.fire_at)
        t = next_human_action(prof, POST, event.fire_at, self.stream(f"human/{hid}/activity"))
        if t is not None:
            self.engine.schedule(t, hid, "human_post")

    def _pick_retweet(self, hid: int, now: int, rng) -> int | None:
        plat = self.platform
        posts = plat.posts
        tl = plat.timelines[hid]
        if tl:
            span = min(len(tl), 50)
            for _ in range(3):
                pid = tl[len(tl) - 1 - rng.randrange(span)]
                p = posts[pid]
                orig = p.ref_post if p.kind is PostKind.RETWEET else pid
                op = posts[orig]
                if op.author != hid and now - op.at < DAY:
                    return orig
        lo, hi = plat.index_range(now - HOUR, now + 1)
        if hi <= lo:
            return None
        pid = lo + rng.randrange(hi - lo)
        p = posts[pid]
        orig = p.ref_post if p.kind is PostKind.RETWEET else pid
        if posts[orig].author == hid:
            return None
        return orig

    def _human_retweet(self, event: EventRecord) -> None:
        hid = event.actor
        prof = self.humans[hid]
        rng = self.stream(f"human/{hid}/activity")
        orig = self._pick_retweet(hid, event.fire_at, rng)
        if orig is not None:
            src = self.platform.posts[orig]
            self.platform.submit_post(hid, src.descriptor, PostKind.RETWEET, orig, event.fire_at)
        t = next_human_action(prof, "retweet", event.fire_at, rng)
        if t is not None:
            self.engine.schedule(t, hid, "human_retweet")

    def _on_follow(self, a: int, b: int, at: int) -> None:
        if not self._live:
            return
        prof = self.humans.get(b)
        if prof is None or a in self.platform.following[b]:
            return
        meta = self.platform.account_snapshot(a, at)
        decision = follow_back_decision(prof, meta, self.stream(f"human/{b}/reciprocity"))
        if decision.accept:
            self.engine.schedule(at + decision.latency, b, "human_follow_back", {"target": a})

    def _human_follow_back(self, event: EventRecord) -> None:
        self.platform.set_follow(event.actor, event.payload["target"], event.fire_at)

    # -- bots -----------------------------------------------------------------

    def _bot_post(self, event: EventRecord) -> None:
        kind = event.action[len("bot_") :]
        agent = self.bots[event.actor]
        agent.post_tick(self.platform, kind, event.fire_at)
        self.engine.schedule(agent.next_time(kind, event.fire_at), agent.id, event.action)

    def _bot_follow(self, event: EventRecord) -> None:
        agent = self.bots[event.actor]
        now = event.fire_at
        for act, target in agent.follow_tick(self.platform, now):
            if act == "follow":
                rec = agent.records[target]
                if rec.deadline is not None:
                    self.engine.schedule(rec.deadline, agent.id, "bot_deadline", {"target": target})
        self.engine.schedule(agent.next_time(FOLLOW, now), agent.id, "bot_follow")

    def _bot_deadline(self, event: EventRecord) -> None:
        agent = self.bots[event.actor]
        now = event.fire_at
        if not agent.is_active(now):
            # unfollows are platform actions and wait for the next active instant
            self.engine.schedule(agent.schedule.next_active(now), agent.id, "bot_deadline", event.payload)
            return
        agent.supervise(self.platform, now)

    def _bot_reply(self, event: EventRecord) -> None:
        self.platform.submit_post(event.actor, REPLY_TEMPLATE, PostKind.REPLY, event.payload["ref_post"], event.fire_at)

    # -- phase 2 --------------------------------------------------------------

    def push_window(self) -> tuple[int, int]:
        push = self.config.plan.push
        start = self.t0 + self.config.plan.push_day * DAY + parse_clock(push.start)
        return start, start + int(push.duration_h * HOUR)

    def _schedule_push(self) -> None:
        push = self.config.plan.push
        start, end = self.push_window()
        for r in self.roster:
            if r.preset != "hybrid_network":
                continue
            rng = self.stream(f"push/{r.account_id}")
            for i in range(push.posts_per_bot):
                self.engine.schedule(rng.randrange(start, end), r.account_id, "push_post", {"n": i})
            for i in range(push.retweets_per_bot):
                self.engine.schedule(rng.randrange(start, end), r.account_id, "push_retweet", {"n": i})

    def _push_content(self, bid: int, n: int) -> ContentDescriptor:
        db = _push_db()
        tags = self.config.plan.push.hashtags
        rng = self.stream(f"push/{bid}/content")
        base = db.entries[rng.randrange(len(db))]
        tag = tags[(bid + n) % len(tags)]
        text = f"{base.text} {tag}" if base.text else None
        return ContentDescriptor(
            length=base.length + len(tag) + 1,
            token_entropy=base.token_entropy,
            hashtags=tuple(dict.fromkeys(base.hashtags + (tag,))),
            emoticon_count=base.emoticon_count,
            polarity=base.polarity,
            slang_fraction=base.slang_fraction,
            media=False,
            text=text,
        )

    def _defer_if_inactive(self, event: EventRecord) -> bool:
        agent = self.bots[event.actor]
        if agent.is_active(event.fire_at):
            return False
        self.engine.schedule(agent.schedule.next_active(event.fire_at), event.actor, event.action, event.payload)
        return True

    def _push_post(self, event: EventRecord) -> None:
        if self._defer_if_inactive(event):
            return
        desc = self._push_content(event.actor, event.payload["n"])
        self.platform.submit_post(event.actor, desc, PostKind.ORIGINAL, None, event.fire_at)

    def _push_retweet(self, event: EventRecord) -> None:
        if self._defer_if_inactive(event):
            return
        plat = self.platform
        tags = set(self.config.plan.push.hashtags)
        start, _ = self.push_window()
        options = [
            p.id
            for p in plat.matching(sorted(tags), start, event.fire_at + 1)
            if p.kind is PostKind.ORIGINAL and p.author != event.actor and p.author in self.bots
        ]
        if not options:
            return
        rng = self.stream(f"push/{event.actor}/retweet")
        orig = options[rng.randrange(len(options))]
        plat.submit_post(event.actor, plat.posts[orig].descriptor, PostKind.RETWEET, orig, event.fire_at)


_PUSH_DB: ContentDB | None = None


def _push_db() -> ContentDB:
    global _PUSH_DB
    if _PUSH_DB is None:
        _PUSH_DB = ContentDB.packaged("content_push.jsonl")
    return _PUSH_DB
