"""Discrete-event engine and per-node clock model.

Time is an integer count of nanoseconds since the simulation epoch. Events
are ordered by ``(fire_at, seq)`` where ``seq`` is the insertion counter, so
simultaneous events run in the order they were scheduled and every run with
the same inputs replays the same trace.

Clocks are a read-side view over global time: a node perceives
``t + offset + jitter`` where the jitter is drawn uniformly from
``[-jitter_bound, +jitter_bound]`` on every read from a per-node seeded RNG.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

NS = 1
US = 1_000
MS = 1_000_000
S = 1_000_000_000


class SchedulingError(RuntimeError):
    """An event was scheduled before the current engine time."""


class Event(NamedTuple):
    fire_at: int
    seq: int
    kind: str


class Engine:
    """Single-threaded event loop.

    Args:
        trace: keep an ``Event`` entry for every processed event in
            :attr:`trace`. Off by default because long runs process millions
            of events.
    """

    def __init__(self, trace: bool = False):
        self.now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, str, Callable[..., Any], tuple]] = []
        self._cancelled: set[int] = set()
        self.trace: list[Event] | None = [] if trace else None
        self.steps = 0

    def schedule(self, fire_at: int, action: Callable[..., Any], *args: Any,
                 kind: str = "") -> int:
        """Enqueue ``action(*args)`` to run at ``fire_at``; return the event id."""
        if fire_at < self.now:
            raise SchedulingError(
                f"past event: {kind or action!r} at {fire_at} ns, engine at {self.now} ns")
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, (fire_at, seq, kind, action, args))
        return seq

    def cancel(self, event_id: int) -> None:
        self._cancelled.add(event_id)

    def pending(self):
        """Iterate over ``(fire_at, seq, kind, args)`` of events not yet run."""
        for fire_at, seq, kind, _, args in self._heap:
            if seq not in self._cancelled:
                yield fire_at, seq, kind, args

    def run_until(self, t_end: int) -> int:
        """Process every event with ``fire_at <= t_end``; return the count."""
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end}) is before engine time {self.now}")
        heap = self._heap
        cancelled = self._cancelled
        trace = self.trace
        pop = heapq.heappop
        steps = 0
        while heap and heap[0][0] <= t_end:
            fire_at, seq, kind, action, args = pop(heap)
            if cancelled and seq in cancelled:
                cancelled.discard(seq)
                continue
            self.now = fire_at
            if trace is not None:
                trace.append(Event(fire_at, seq, kind))
            action(*args)
            steps += 1
        self.now = t_end
        self.steps += steps
        return steps


@dataclass
class NodeClock:
    offset: int = 0
    jitter: int = 0
    rng: random.Random | None = None

    def error(self) -> int:
        """Draw the effective offset for one read."""
        if self.jitter:
            j = self.jitter
            # uniform on the 2j+1 integers in [-j, j]; random() is much cheaper than randint()
            return self.offset + int(self.rng.random() * (2 * j + 1)) - j
        return self.offset


class ClockModel:
    """Per-node synchronisation error: static offset plus bounded per-read jitter.

    Each node gets its own ``random.Random`` seeded from ``(seed, node)`` so
    the draw sequence of one node does not depend on how often other nodes
    read their clocks.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._clocks: dict[str, NodeClock] = {}

    def set(self, node: str, offset: int = 0, jitter: int = 0) -> None:
        if jitter < 0:
            raise ValueError("jitter bound must be >= 0")
        rng = random.Random(f"{self.seed}:{node}") if jitter else None
        self._clocks[node] = NodeClock(offset, jitter, rng)

    def clock(self, node: str) -> NodeClock:
        clk = self._clocks.get(node)
        if clk is None:
            clk = self._clocks[node] = NodeClock()
        return clk

    def is_perfect(self, node: str) -> bool:
        clk = self._clocks.get(node)
        return clk is None or (clk.offset == 0 and clk.jitter == 0)

    def local_time(self, node: str, t: int) -> int:
        """Time as read by ``node`` at global time ``t``."""
        return t + self.clock(node).error()

    def to_global(self, node: str, local: int) -> int:
        """Global instant at which ``node`` believes it is ``local``."""
        return local - self.clock(node).error()
