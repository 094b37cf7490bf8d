"""Deterministic future-event-list scheduler.

A single simulation run is driven by one :class:`Engine`: a simulation
clock in hours, a priority queue of events keyed by (fire_time,
sequence_no), named random substreams, and periodic process activations.
Everything a run does is a pure function of (scenario, seed); simultaneous
events fire in insertion (FIFO) order.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass
from typing import Any, Callable


class SchedulingError(Exception):
    """Raised when an event is scheduled in the past or with a bad interval.

    Signals a logic bug in the caller; the engine never clamps times.
    """


class QueueExhausted(Exception):
    """Raised by :meth:`Engine.advance` on an empty queue (normal termination)."""


@dataclass(frozen=True, slots=True)
class Event:
    """One scheduled occurrence: who fires, what kind, when."""

    fire_time: float
    sequence_no: int
    target: str
    kind: str
    payload: dict[str, Any] | None = None

    def sort_key(self) -> tuple[float, int]:
        return (self.fire_time, self.sequence_no)

    def payload_digest(self) -> str:
        """Short stable digest of the payload, for trace export."""
        if self.payload is None:
            return "-"
        blob = json.dumps(self.payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


class SimClock:
    """Monotone non-decreasing simulation time, in hours, starting at 0."""

    __slots__ = ("now",)

    def __init__(self) -> None:
        self.now: float = 0.0

    def advance_to(self, t: float) -> None:
        if t < self.now:
            raise SchedulingError(f"clock cannot move backwards: {t} < {self.now}")
        self.now = t


class RandomStreams:
    """Named random substreams derived from one 64-bit master seed.

    Each named stream is an independent ``random.Random`` seeded from
    sha256(seed, name), so the draw sequence of one stream never depends
    on how often other streams are consumed, and adding a new actor
    never perturbs existing actors' draws.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            digest = hashlib.sha256(f"{self.seed}/{name}".encode("utf-8")).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            self._streams[name] = rng
        return rng


@dataclass(slots=True)
class _Periodic:
    target: str
    kind: str
    interval: float
    fired: int = 0  # occurrences scheduled so far


Handler = Callable[["Engine", Event], None]


class Engine:
    """Future-event-list simulation engine for one run.

    Handlers are registered per event kind via :meth:`on`; events with no
    handler still fire (and appear in the trace), which keeps the engine
    usable on its own in tests.
    """

    def __init__(self, seed: int = 0) -> None:
        self.clock = SimClock()
        self.streams = RandomStreams(seed)
        self.trace: list[Event] = []
        self._queue: list[tuple[float, int, Event]] = []
        self._next_seq = 0
        self._periodics: list[_Periodic] = []
        self._handlers: dict[str, Handler] = {}

    # -- scheduling ---------------------------------------------------

    def schedule(
        self,
        at: float,
        target: str,
        kind: str,
        payload: dict[str, Any] | None = None,
    ) -> Event:
        """Enqueue an event at absolute time ``at`` (>= clock.now)."""
        if at < self.clock.now:
            raise SchedulingError(
                f"past event: cannot schedule '{kind}' at t={at} when now={self.clock.now}"
            )
        event = Event(at, self._next_seq, target, kind, payload)
        self._next_seq += 1
        heapq.heappush(self._queue, (event.fire_time, event.sequence_no, event))
        return event

    def schedule_in(
        self,
        delay: float,
        target: str,
        kind: str,
        payload: dict[str, Any] | None = None,
    ) -> Event:
        if delay < 0:
            raise SchedulingError(f"negative delay: {delay}")
        return self.schedule(self.clock.now + delay, target, kind, payload)

    def register_periodic(self, target: str, kind: str, interval: float) -> None:
        """Activate (target, kind) at interval, 2*interval, ... until run end.

        The first activation is one full interval after t=0, never at t=0.
        """
        if interval <= 0:
            raise SchedulingError(f"periodic interval must be positive, got {interval}")
        self._periodics.append(_Periodic(target, kind, interval))

    def on(self, kind: str, handler: Handler) -> None:
        self._handlers[kind] = handler

    # -- execution ----------------------------------------------------

    def peek_time(self) -> float | None:
        return self._queue[0][0] if self._queue else None

    def advance(self) -> tuple[float, Event]:
        """Pop and return the minimum-key event, advancing the clock to it."""
        if not self._queue:
            raise QueueExhausted("simulation exhausted: event queue is empty")
        _, _, event = heapq.heappop(self._queue)
        self.clock.advance_to(event.fire_time)
        return event.fire_time, event

    def run_until(self, t_end: float) -> list[Event]:
        """Process every event with fire_time <= t_end, in total order.

        Returns the ordered trace of fired events. Queue exhaustion before
        t_end is normal termination.
        """
        if t_end < 0:
            raise SchedulingError(f"horizon must be non-negative, got {t_end}")
        for spec in self._periodics:
            first = spec.interval  # occurrence 1, never t=0
            if spec.fired == 0 and first <= t_end:
                self.schedule(first, spec.target, spec.kind, None)
                spec.fired = 1
        while self._queue and self._queue[0][0] <= t_end:
            _, event = self.advance()
            self.trace.append(event)
            handler = self._handlers.get(event.kind)
            if handler is not None:
                handler(self, event)
            self._reschedule_periodic(event, t_end)
        return self.trace

    def _reschedule_periodic(self, event: Event, t_end: float) -> None:
        for spec in self._periodics:
            if spec.target == event.target and spec.kind == event.kind:
                # occurrence times are k*interval, not accumulated sums,
                # so the count over a horizon is exact
                nxt = (spec.fired + 1) * spec.interval
                if nxt <= t_end:
                    self.schedule(nxt, spec.target, spec.kind, None)
                    spec.fired += 1
                return


def trace_lines(trace: list[Event]) -> list[str]:
    """Serialize a fired-event trace, one JSON record per line."""
    lines = []
    for e in trace:
        lines.append(
            json.dumps(
                {
                    "t": e.fire_time,
                    "seq": e.sequence_no,
                    "target": e.target,
                    "kind": e.kind,
                    "digest": e.payload_digest(),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return lines
