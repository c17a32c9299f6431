"""Deterministic discrete-event engine.

Time is an integer number of seconds since the simulation epoch. Events are
ordered by ``(fire_at, seq)`` where ``seq`` is issued at schedule time, so two
runs that schedule the same events in the same order execute identically.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from typing import Any, Callable, Iterable, NamedTuple, Union

import numpy as np

SYSTEM = "SYSTEM"

Actor = Union[int, str]


class SimulationError(Exception):
    """Base class for simulator errors."""


class PastTimeError(SimulationError):
    pass


class EmptyLabelError(SimulationError):
    pass


class EventRecord(NamedTuple):
    seq: int
    fire_at: int
    actor: Actor
    action: str
    payload: dict

    def to_json(self) -> str:
        # field order is part of the on-disk format
        return json.dumps(
            {
                "seq": self.seq,
                "fire_at": self.fire_at,
                "actor": self.actor,
                "action": self.action,
                "payload": self.payload,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "EventRecord":
        d = json.loads(line)
        return cls(d["seq"], d["fire_at"], d["actor"], d["action"], d["payload"])


class RandomStream(random.Random):
    """A ``random.Random`` seeded from ``(root_seed, label)``.

    Mersenne Twister output for an integer seed is identical across
    platforms, which makes labeled substreams reproducible anywhere.
    """

    def __new__(cls, root_seed: int, label: str):
        return super().__new__(cls)

    def __init__(self, root_seed: int, label: str):
        self.root_seed = int(root_seed)
        self.label = label
        self._seed_int = _seed_int(self.root_seed, label)
        super().__init__(self._seed_int)

    def numpy(self) -> np.random.Generator:
        """Independent numpy generator keyed by the same label."""
        return np.random.default_rng(self._seed_int)

    def __repr__(self) -> str:
        return f"RandomStream({self.root_seed}, {self.label!r})"


def _seed_int(root_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{int(root_seed)}\x1f{label}".encode()).digest()
    return int.from_bytes(digest[:16], "big")


def derive_stream(root_seed: int, label: str) -> RandomStream:
    if not label:
        raise EmptyLabelError("random stream label must be non-empty")
    return RandomStream(root_seed, label)


Handler = Callable[[EventRecord], "list[dict] | None"]


class Engine:
    """Single-threaded event queue with an append-only execution log.

    Handlers are registered per action name. A handler may schedule further
    events and returns the list of platform effects it caused (or None);
    non-empty effects are stored under ``payload["effects"]`` in the log.
    """

    def __init__(self, start: int = 0, keep_log: bool = True):
        if start < 0:
            raise ValueError("start time must be non-negative")
        self.clock = int(start)
        self.keep_log = keep_log
        self.log: list[EventRecord] = []
        self._queue: list[tuple] = []
        self._seq = 0
        self._handlers: dict[str, Handler] = {}

    def on(self, action: str, handler: Handler) -> None:
        self._handlers[action] = handler

    def schedule(
        self, fire_at: int, actor: Actor, action: str, payload: dict | None = None
    ) -> int:
        fire_at = int(fire_at)
        if fire_at < self.clock:
            raise PastTimeError(f"cannot schedule at {fire_at} < clock {self.clock}")
        self._seq += 1
        heapq.heappush(
            self._queue, (fire_at, self._seq, actor, action, payload if payload is not None else {})
        )
        return self._seq

    def schedule_event(self, event: EventRecord) -> int:
        return self.schedule(event.fire_at, event.actor, event.action, event.payload)

    def pending(self) -> int:
        return len(self._queue)

    def peek_time(self) -> int | None:
        return self._queue[0][0] if self._queue else None

    def run_until(self, t_end: int) -> list[EventRecord]:
        t_end = int(t_end)
        if t_end < self.clock:
            raise PastTimeError(f"run_until({t_end}) is before clock {self.clock}")
        executed: list[EventRecord] = []
        queue = self._queue
        handlers = self._handlers
        while queue and queue[0][0] <= t_end:
            fire_at, seq, actor, action, payload = heapq.heappop(queue)
            self.clock = fire_at
            event = EventRecord(seq, fire_at, actor, action, payload)
            handler = handlers.get(action)
            effects = handler(event) if handler is not None else None
            if effects:
                event = EventRecord(seq, fire_at, actor, action, {**payload, "effects": effects})
            executed.append(event)
        self.clock = t_end
        if self.keep_log:
            self.log.extend(executed)
        return executed


def write_log(records: Iterable[EventRecord], fh) -> None:
    for rec in records:
        fh.write(rec.to_json())
        fh.write("\n")


def read_log(fh) -> list[EventRecord]:
    return [EventRecord.from_json(line) for line in fh if line.strip()]
