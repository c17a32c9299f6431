"""Daily activity schedules on the integer simulation clock."""

from __future__ import annotations

from typing import Callable, Sequence

DAY = 86_400
HOUR = 3_600
MINUTE = 60

Interval = tuple[int, int]


def parse_clock(text: str) -> int:
    """``"HH:MM"`` -> seconds of day. ``"24:00"`` is accepted as end of day."""
    hh, mm = text.split(":")
    sec = int(hh) * HOUR + int(mm) * MINUTE
    if not 0 <= sec <= DAY:
        raise ValueError(f"clock time out of range: {text!r}")
    return sec


def normalize(intervals: Sequence[Interval]) -> list[Interval]:
    """Split wrap-around intervals and merge overlaps within one day."""
    parts: list[Interval] = []
    for start, end in intervals:
        start %= DAY
        if end != DAY:
            end %= DAY
        if start == end:
            continue
        if end > start:
            parts.append((start, end))
        else:
            parts.append((start, DAY))
            if end > 0:
                parts.append((0, end))
    parts.sort()
    merged: list[Interval] = []
    for s, e in parts:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def subtract(intervals: Sequence[Interval], holes: Sequence[Interval]) -> list[Interval]:
    out = list(intervals)
    for hs, he in holes:
        nxt = []
        for s, e in out:
            if he <= s or hs >= e:
                nxt.append((s, e))
                continue
            if s < hs:
                nxt.append((s, hs))
            if he < e:
                nxt.append((he, e))
        out = nxt
    return out


class DailySchedule:
    """Active intervals per day, possibly different every day.

    ``day_intervals(d)`` returns sorted disjoint ``(start, end)`` offsets in
    seconds of day ``d``. Intervals are half-open.
    """

    def __init__(self, day_intervals: Callable[[int], list[Interval]]):
        self._fn = day_intervals
        self._cache: dict[int, list[Interval]] = {}

    @classmethod
    def fixed(cls, intervals: Sequence[Interval]) -> "DailySchedule":
        norm = normalize(intervals)
        return cls(lambda _d: norm)

    def intervals(self, day: int) -> list[Interval]:
        iv = self._cache.get(day)
        if iv is None:
            iv = self._fn(day)
            self._cache[day] = iv
        return iv

    def is_active(self, t: int) -> bool:
        day, off = divmod(t, DAY)
        for s, e in self.intervals(day):
            if s <= off < e:
                return True
        return False

    def next_active(self, t: int, horizon_days: int = 400) -> int:
        """Smallest ``t' >= t`` that is active."""
        day, off = divmod(t, DAY)
        for d in range(day, day + horizon_days):
            for s, e in self.intervals(d):
                if d == day and off >= e:
                    continue
                return d * DAY + max(s, off if d == day else 0)
        raise ValueError("schedule has no active time")

    def active_seconds(self, day: int) -> int:
        return sum(e - s for s, e in self.intervals(day))

    def advance(self, t: int, active_seconds: float) -> int:
        """Wall time reached after consuming ``active_seconds`` from ``t``."""
        remaining = float(active_seconds)
        day, off = divmod(t, DAY)
        for d in range(day, day + 100_000):
            ivs = self.intervals(d)
            if not ivs:
                continue
            for s, e in ivs:
                if d == day:
                    if off >= e:
                        continue
                    s = max(s, off)
                span = e - s
                if remaining < span:
                    return d * DAY + s + int(remaining)
                remaining -= span
        raise ValueError("schedule has no active time")


def hour_of_day(t: int) -> int:
    return (t % DAY) // HOUR


def day_index(t: int) -> int:
    return t // DAY


__all__ = [
    "DAY",
    "HOUR",
    "MINUTE",
    "DailySchedule",
    "normalize",
    "subtract",
    "parse_clock",
    "hour_of_day",
    "day_index",
]
