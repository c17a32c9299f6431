"""Experiment orchestration: network growth, the hashtag push, baseline sampling."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .clock import DAY, HOUR, parse_clock
from .config import RunConfig
from .detection import Calibration, HistoryBuilder, calibrate
from .engine import EventRecord, derive_stream
from .platform import rank_of
from .stats import BoxSummary, RankSumResult, rank_sum_test, summarize_box
from .world import Simulation


class Unreachable(RuntimeError):
    """The growth target cannot be reached even if every human follows back."""

    def __init__(self, target: float, max_total: float):
        super().__init__(f"target {target} unreachable; mean total at follow_back_prob=1 is {max_total:.1f}")
        self.target = target
        self.max_total = max_total


class TimeOutOfRange(ValueError):
    pass


# -- phase 1 -----------------------------------------------------------------


@dataclass
class GrowthCurve:
    """Hourly follower counts of the bot roster over the productive days."""

    start: int
    hours: list[int]
    bots: list[int]
    per_bot: dict[int, list[int]]
    total: list[int]
    unfollows: list[int] = field(default_factory=list)  # per hour, edges removed from bots
    initial_total: int = 0

    @property
    def final_total(self) -> int:
        return self.total[-1]

    def rows(self, handles: dict[int, str] | None = None) -> tuple[list[str], list[list]]:
        names = [handles[b] if handles else str(b) for b in self.bots]
        header = ["hour", "time", *names, "total"]
        rows = [
            [h, self.start + h * HOUR, *(self.per_bot[b][i] for b in self.bots), self.total[i]]
            for i, h in enumerate(self.hours)
        ]
        return header, rows


def growth_curve(
    log: Iterable[EventRecord], bots: Sequence[int], start: int, days: int
) -> GrowthCurve:
    """Replay follow effects from an event log and sample follower counts hourly.

    The sample at hour ``h`` reflects every event with ``fire_at <= start + h*HOUR``.
    """
    bots = list(bots)
    idx = {b: i for i, b in enumerate(bots)}
    counts = [0] * len(bots)
    n_hours = days * 24
    per_bot = {b: [] for b in bots}
    total: list[int] = []
    unfollows = [0] * (n_hours + 1)
    initial = None
    h = 0

    def sample_until(t: int) -> None:
        nonlocal h
        while h <= n_hours and start + h * HOUR < t:
            for b, i in idx.items():
                per_bot[b].append(counts[i])
            total.append(sum(counts))
            h += 1

    for rec in log:
        sample_until(rec.fire_at)
        if h > n_hours:
            break
        for eff in rec.payload.get("effects", ()):
            op = eff["op"]
            if op not in ("follow", "unfollow"):
                continue
            i = idx.get(eff["b"])
            if i is None:
                continue
            if op == "follow":
                counts[i] += 1
            else:
                counts[i] -= 1
                if start <= rec.fire_at:
                    unfollows[min(n_hours, -(-(rec.fire_at - start) // HOUR))] += 1
        if initial is None and rec.action == "bootstrap":
            initial = sum(counts)
    sample_until(start + n_hours * HOUR + 1)
    return GrowthCurve(
        start=start,
        hours=list(range(n_hours + 1)),
        bots=bots,
        per_bot=per_bot,
        total=total,
        unfollows=unfollows,
        initial_total=initial or 0,
    )


@dataclass
class Phase1Result:
    curve: GrowthCurve
    simulation: Simulation
    seconds: float

    @property
    def log(self) -> list[EventRecord]:
        return self.simulation.engine.log


def _phase1_config(config: RunConfig) -> RunConfig:
    return config.with_updates(**{"plan.push.enabled": False})


def run_phase1(config: RunConfig, seed: int | None = None, *, follow_back_prob: float | None = None) -> Phase1Result:
    """Setup plus productive days; the curve covers the productive days only."""
    plan = config.plan
    began = time.perf_counter()
    sim = Simulation.from_config(_phase1_config(config), seed, follow_back_prob=follow_back_prob)
    sim.run_days(plan.setup_days + plan.productive_days)
    start = sim.t0 + plan.setup_days * DAY
    curve = growth_curve(sim.engine.log, sim.ids_of("hybrid_network"), start, plan.productive_days)
    return Phase1Result(curve, sim, time.perf_counter() - began)


@dataclass
class GrowthEvaluation:
    follow_back_prob: float
    totals: list[int]
    seconds: list[float]

    @property
    def mean_total(self) -> float:
        return float(np.mean(self.totals))


@dataclass
class GrowthCalibration:
    follow_back_prob: float
    target: float
    evaluations: list[GrowthEvaluation]

    @property
    def final(self) -> GrowthEvaluation:
        return next(e for e in reversed(self.evaluations) if e.follow_back_prob == self.follow_back_prob)


def evaluate_growth(config: RunConfig, p: float, seeds: Sequence[int]) -> GrowthEvaluation:
    totals, secs = [], []
    for s in seeds:
        res = run_phase1(config, s, follow_back_prob=p)
        totals.append(res.curve.final_total)
        secs.append(res.seconds)
    return GrowthEvaluation(p, totals, secs)


def calibrate_growth(
    config: RunConfig,
    target_total: float,
    tolerance: float = 0.1,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    max_iter: int = 20,
    progress=None,
) -> GrowthCalibration:
    """Bisection on the human follow-back probability over [0, 1]."""
    if target_total <= 0:
        return GrowthCalibration(0.0, target_total, [])
    evals: list[GrowthEvaluation] = []

    def evaluate(p: float) -> GrowthEvaluation:
        ev = evaluate_growth(config, p, seeds)
        evals.append(ev)
        if progress is not None:
            progress(ev)
        return ev

    top = evaluate(1.0)
    if abs(top.mean_total - target_total) <= tolerance * target_total:
        return GrowthCalibration(1.0, target_total, evals)
    if top.mean_total < target_total:
        raise Unreachable(target_total, top.mean_total)
    lo, hi = 0.0, 1.0
    best = top
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        ev = evaluate(mid)
        if abs(ev.mean_total - target_total) < abs(best.mean_total - target_total):
            best = ev
        if abs(ev.mean_total - target_total) <= tolerance * target_total:
            return GrowthCalibration(mid, target_total, evals)
        if ev.mean_total < target_total:
            lo = mid
        else:
            hi = mid
    return GrowthCalibration(best.follow_back_prob, target_total, evals)


# -- phase 2 -----------------------------------------------------------------


@dataclass
class TrendingRow:
    window_start: int
    window_end: int
    hashtag: str
    rank: int | None  # None: outside the reported top-k
    count: int
    phase: str  # "before", "during" or "after" the push


@dataclass
class TrendingReport:
    push_start: int
    push_end: int
    top_k: int
    rows: list[TrendingRow]

    def ranks(self, hashtag: str, phase: str | None = None) -> list[int | None]:
        return [r.rank for r in self.rows if r.hashtag == hashtag and (phase is None or r.phase == phase)]

    def rows_after(self, hashtag: str, delay: int) -> list[TrendingRow]:
        return [r for r in self.rows if r.hashtag == hashtag and r.window_start >= self.push_end + delay]

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = ["window_start", "window_end", "hashtag", "rank", "count", "phase"]
        return header, [[r.window_start, r.window_end, r.hashtag, r.rank, r.count, r.phase] for r in self.rows]


def trending_report(sim: Simulation, step: int = HOUR) -> TrendingReport:
    """Rank of each push hashtag in sliding trending windows around the push day."""
    cfg = sim.config
    push = cfg.plan.push
    width = cfg.platform.trending_window_s
    push_start, push_end = sim.push_window()
    first = sim.t0 + cfg.plan.push_day * DAY
    last = min(sim.engine.clock, first + push.observe_days * DAY)
    plat = sim.platform
    rows: list[TrendingRow] = []
    for w0 in range(first, last - width + 1, step):
        w1 = w0 + width
        full = plat.trending((w0, w1), None, push.trend_locale)
        counts = dict(full)
        ranked = full[: push.top_k]
        phase = "before" if w1 <= push_start else ("during" if w0 < push_end else "after")
        for tag in push.hashtags:
            rows.append(TrendingRow(w0, w1, tag, rank_of(ranked, tag), counts.get(tag, 0), phase))
    return TrendingReport(push_start, push_end, push.top_k, rows)


@dataclass
class Phase2Result:
    report: TrendingReport
    simulation: Simulation


def run_phase2(config: RunConfig, seed: int | None = None, simulation: Simulation | None = None) -> Phase2Result:
    """Run (or continue) a simulation through the push and its observation days."""
    sim = simulation if simulation is not None else Simulation.from_config(config, seed)
    sim.run_until(max(sim.engine.clock, sim.t0 + sim.config.plan.total_days * DAY))
    return Phase2Result(trending_report(sim), sim)


# -- baseline ----------------------------------------------------------------


def baseline_instants(config: RunConfig, t0: int) -> list[int]:
    base = config.plan.baseline
    day_start = t0 + config.plan.baseline_day * DAY
    return [day_start + parse_clock(t) for t in base.times]


def sample_baseline(
    event_log: Sequence[EventRecord],
    times: Sequence[int],
    coverage: float,
    locale_filter: str | None = None,
    *,
    window_s: int = 3600,
    seed: int = 0,
) -> list[int]:
    """Unique authors seen in a coverage-sampled stream window around each time.

    Each post inside ``[t - window_s/2, t + window_s/2)`` is kept independently
    with probability ``coverage``; authors are deduplicated across times.
    """
    if not 0.0 <= coverage <= 1.0:
        raise ValueError(f"coverage must be within [0, 1], got {coverage}")
    if not event_log:
        raise TimeOutOfRange("empty event log")
    first, last = event_log[0].fire_at, event_log[-1].fire_at
    half = window_s // 2
    for t in times:
        if t - half < first or t + half > last:
            raise TimeOutOfRange(f"window around {t} is outside the log span [{first}, {last}]")
    locales: dict[int, str] = {}
    posts: list[tuple[int, int]] = []
    for rec in event_log:
        for eff in rec.payload.get("effects", ()):
            if eff["op"] == "account":
                locales[eff["id"]] = eff["locale"]
            elif eff["op"] == "post":
                posts.append((eff["at"], eff["author"]))
    at = np.array([p[0] for p in posts], dtype=np.int64)
    chosen: set[int] = set()
    for k, t in enumerate(times):
        rng = derive_stream(seed, f"baseline/{k}")
        lo, hi = np.searchsorted(at, [t - half, t + half], side="left")
        for i in range(lo, hi):
            if rng.random() < coverage:
                chosen.add(posts[i][1])
    if locale_filter is not None:
        chosen = {a for a in chosen if locales.get(a) == locale_filter}
    return sorted(chosen)


def sample_run_baseline(sim: Simulation) -> list[int]:
    base = sim.config.plan.baseline
    return sample_baseline(
        sim.engine.log,
        baseline_instants(sim.config, sim.t0),
        base.coverage,
        base.locale,
        window_s=base.window_s,
        seed=sim.seed,
    )


# -- detection study ---------------------------------------------------------


def with_naive_army(config: RunConfig, count: int = 30) -> RunConfig:
    """Config whose roster also holds a naive bot army (needed for calibration)."""
    if any(g.preset == "naive_bot_army" for g in config.roster):
        return config
    roster = [g.model_dump() for g in config.roster] + [{"preset": "naive_bot_army", "count": count}]
    return config.with_updates(roster=roster)


@dataclass
class DetectionStudy:
    calibration: Calibration
    scores: dict[str, np.ndarray]  # cohort -> aggregate scores
    ids: dict[str, list[int]]
    baseline_ids: list[int]
    test: RankSumResult

    def fraction_above(self, cohort: str) -> float:
        s = self.scores[cohort]
        return float((s > self.calibration.threshold).mean()) if len(s) else float("nan")

    def summaries(self) -> dict[str, BoxSummary]:
        return {k: summarize_box(v) for k, v in self.scores.items() if len(v)}


def run_detection_study(
    config: RunConfig,
    seed: int | None = None,
    *,
    n_calibration_humans: int = 500,
    simulation: Simulation | None = None,
) -> DetectionStudy:
    """Calibrate on naive bots vs humans, then score hybrid bots and a baseline.

    Calibration humans are drawn from accounts outside the baseline sample, so
    the baseline cohort is never part of the training set.
    """
    sim = simulation
    if sim is None:
        sim = Simulation.from_config(with_naive_army(config), seed)
        sim.run_days(sim.config.plan.total_days)
    humans = set(sim.humans)
    baseline = sample_run_baseline(sim)
    baseline_humans = [a for a in baseline if a in humans]
    pool = sorted(humans - set(baseline))
    rng = sim.stream("study/calibration-humans")
    cal_humans = sorted(rng.sample(pool, min(n_calibration_humans, len(pool))))
    builder = HistoryBuilder(sim.platform)
    naive = [b for b in sim.ids_of("naive_bot_army") if not builder.history(b).is_empty()]
    labeled = [(builder.history(a), "human") for a in cal_humans] + [(builder.history(b), "naive_bot") for b in naive]
    cal = calibrate(labeled)
    ids = {
        "hybrid_bot": sim.ids_of("hybrid_network"),
        "naive_bot": naive,
        "baseline": baseline,
        "baseline_human": baseline_humans,
    }
    scores = {k: cal.score(builder.histories(v)) if v else np.empty(0) for k, v in ids.items()}
    test = rank_sum_test(scores["hybrid_bot"], scores["baseline_human"])
    return DetectionStudy(cal, scores, ids, baseline, test)
