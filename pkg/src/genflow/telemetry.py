"""Structured, ordered per-run event stream.

One writer per run appends events; any number of readers subscribe with a
replay point and then follow live. Replay handoff happens under the log
lock, so every subscriber observes the same gapless seq order no matter
when it joins. Slow subscribers are disconnected (their Subscription is
marked dropped) rather than ever blocking the pipeline.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterator

from .canon import compact_dumps
from .errors import UnknownRun

AGENT_ROLES = (
    "system",
    "director_llm",
    "enhancer",
    "generator",
    "director_agent",
    "brand_safety_agent",
    "orchestrator",
)

EVENT_KINDS = (
    "phase_start",
    "phase_end",
    "generation",
    "verdict",
    "consensus",
    "corrective",
    "violation_state",
    "repair",
    "fault",
)

# Which roles may emit which kinds; fault is deliberately open.
KIND_ROLE_MATRIX: dict[str, tuple[str, ...]] = {
    "phase_start": ("system",),
    "phase_end": ("system",),
    "generation": ("generator", "enhancer"),
    "verdict": ("director_agent", "brand_safety_agent"),
    "consensus": ("orchestrator",),
    "corrective": ("orchestrator",),
    "violation_state": ("system",),
    "repair": ("director_llm",),
    "fault": AGENT_ROLES,
}

_CLOSE = object()


@dataclass(frozen=True)
class Event:
    seq: int
    ts: float
    run_id: str
    scene_index: int | None
    attempt: int | None
    agent_role: str
    kind: str
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "ts": self.ts,
            "run_id": self.run_id,
            "scene_index": self.scene_index,
            "attempt": self.attempt,
            "agent_role": self.agent_role,
            "kind": self.kind,
            "payload": self.payload,
        }

    def dumps(self) -> str:
        return compact_dumps(self.to_dict())


class Subscription:
    """Ordered event feed: recorded replay first, then the live tail."""

    def __init__(self, log: "RunLog", replay: list[Event], max_buffer: int) -> None:
        self._log = log
        self._replay = replay
        self._queue: queue.Queue[Any] = queue.Queue(maxsize=max_buffer)
        self.dropped = False

    def __iter__(self) -> Iterator[Event]:
        for event in self._replay:
            yield event
        self._replay = []
        while True:
            try:
                item = self._queue.get(timeout=0.05)
            except queue.Empty:
                if self.dropped or (self._log.closed and self._queue.empty()):
                    return
                continue
            if item is _CLOSE:
                return
            yield item

    def _offer(self, item: Any) -> None:
        try:
            self._queue.put_nowait(item)
        except queue.Full:
            self.dropped = True


class RunLog:
    """Append-only event log for one run; seq is gapless from 0."""

    def __init__(
        self,
        run_id: str,
        clock: Callable[[], float] | None = None,
        max_subscriber_buffer: int = 4096,
    ) -> None:
        self.run_id = run_id
        self.closed = False
        self._clock = clock or (lambda: 0.0)
        self._events: list[Event] = []
        self._subs: list[Subscription] = []
        self._lock = threading.RLock()
        self._max_buffer = max_subscriber_buffer

    def emit(
        self,
        kind: str,
        agent_role: str,
        payload: dict[str, Any] | None = None,
        scene_index: int | None = None,
        attempt: int | None = None,
    ) -> Event:
        if kind not in KIND_ROLE_MATRIX:
            raise ValueError(f"unknown event kind {kind!r}")
        if agent_role not in KIND_ROLE_MATRIX[kind]:
            raise ValueError(f"role {agent_role!r} may not emit {kind!r}")
        with self._lock:
            if self.closed:
                raise UnknownRun(f"run {self.run_id} is closed")
            event = Event(
                seq=len(self._events),
                ts=round(self._clock(), 6),
                run_id=self.run_id,
                scene_index=scene_index,
                attempt=attempt,
                agent_role=agent_role,
                kind=kind,
                payload=payload or {},
            )
            self._events.append(event)
            live = [s for s in self._subs if not s.dropped]
            for sub in live:
                sub._offer(event)
            self._subs = live
        return event

    def subscribe(self, from_seq: int = 0) -> Subscription:
        with self._lock:
            replay = [e for e in self._events if e.seq >= from_seq]
            sub = Subscription(self, replay, self._max_buffer)
            if not self.closed:
                self._subs.append(sub)
            return sub

    def events(self) -> list[Event]:
        with self._lock:
            return list(self._events)

    def close(self) -> None:
        with self._lock:
            self.closed = True
            for sub in self._subs:
                sub._offer(_CLOSE)
            self._subs = []


class TelemetryHub:
    """Registry of run logs; the service-facing emit/subscribe surface."""

    def __init__(self) -> None:
        self._runs: dict[str, RunLog] = {}
        self._lock = threading.Lock()

    def create_run(self, run_id: str, clock: Callable[[], float] | None = None) -> RunLog:
        with self._lock:
            if run_id in self._runs:
                raise ValueError(f"run {run_id} already exists")
            log = RunLog(run_id, clock=clock)
            self._runs[run_id] = log
            return log

    def run(self, run_id: str) -> RunLog:
        with self._lock:
            log = self._runs.get(run_id)
        if log is None:
            raise UnknownRun(f"no such run: {run_id}")
        return log

    def emit(self, run_id: str, **fields: Any) -> Event:
        return self.run(run_id).emit(**fields)

    def subscribe(self, run_id: str, from_seq: int = 0) -> Subscription:
        return self.run(run_id).subscribe(from_seq)


class EventRecorder:
    """Minimal in-memory sink with the RunLog.emit signature, for engine code
    running outside a hub (CLI single runs, experiment arms)."""

    def __init__(
        self, run_id: str = "local", clock: Callable[[], float] | None = None
    ) -> None:
        self.log = RunLog(run_id, clock=clock)

    def __call__(self, **fields: Any) -> Event:
        return self.log.emit(**fields)

    def events(self) -> list[Event]:
        return self.log.events()
