"""Transmission selection for egress ports.

Three policies share one queue layout (eight traffic classes, each a set of
per-ingress-source FIFOs):

* ``StrictPriority`` serves the highest non-empty class, FIFO inside a class.
* ``CreditBasedFifo`` (CBF) is strict priority across classes; inside a class
  it serves the ingress source with the largest queued byte occupancy, with a
  credit counter that forces service to a source left waiting too long.
* ``TimeAwareShaper`` is strict priority restricted to classes whose gate is
  open, and only for head frames that finish before that gate closes. The
  length check is how the guard band is realised.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

FOREVER = 2**63 - 1
NUM_QUEUES = 8
ALL_OPEN = 0xFF


class GclError(ValueError):
    pass


@dataclass(frozen=True)
class GateEntry:
    duration: int
    gate_state: int


@dataclass(frozen=True)
class GateControlList:
    """Cyclic gate schedule. Bit ``q`` of ``gate_state`` set means queue ``q`` open.

    Entry boundaries belong to the entry being entered, i.e. each entry covers
    the half-open interval ``[start, start + duration)`` of the cycle.
    """

    cycle: int
    entries: tuple[GateEntry, ...]
    base_time: int = 0
    _starts: tuple[int, ...] = field(init=False, repr=False, compare=False)
    # per entry: ns from the entry start until each queue's gate next closes,
    # and until the mask next changes (FOREVER when it never does)
    _close: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _change: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(e if isinstance(e, GateEntry) else GateEntry(*e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.cycle <= 0:
            raise GclError(f"cycle must be > 0, got {self.cycle}")
        if not entries:
            raise GclError("gate control list needs at least one entry")
        for e in entries:
            if e.duration <= 0:
                raise GclError(f"entry duration must be > 0, got {e.duration}")
            if not 0 <= e.gate_state <= 0xFF:
                raise GclError(f"gate state {e.gate_state:#x} is not an 8-bit mask")
        total = sum(e.duration for e in entries)
        if total != self.cycle:
            raise GclError(f"entry durations sum to {total} ns, cycle is {self.cycle} ns")
        starts, acc = [], 0
        for e in entries:
            starts.append(acc)
            acc += e.duration
        object.__setattr__(self, "_starts", tuple(starts))
        n = len(entries)
        close, change = [], []
        for i, e in enumerate(entries):
            row = []
            for q in range(NUM_QUEUES):
                bit = 1 << q
                acc, until = e.duration, FOREVER
                for k in range(1, n + 1):
                    nxt = entries[(i + k) % n]
                    if not nxt.gate_state & bit:
                        until = acc
                        break
                    acc += nxt.duration
                row.append(until)
            close.append(tuple(row))
            acc, until = e.duration, FOREVER
            for k in range(1, n + 1):
                nxt = entries[(i + k) % n]
                if nxt.gate_state != e.gate_state:
                    until = acc
                    break
                acc += nxt.duration
            change.append(until)
        object.__setattr__(self, "_close", tuple(close))
        object.__setattr__(self, "_change", tuple(change))

    @classmethod
    def always_open(cls, cycle: int = 1_000_000) -> GateControlList:
        return cls(cycle, (GateEntry(cycle, ALL_OPEN),))

    def phase(self, local_now: int) -> int:
        return (local_now - self.base_time) % self.cycle

    def index_at(self, local_now: int) -> tuple[int, int]:
        """Return ``(entry index, phase)`` for a local time."""
        ph = self.phase(local_now)
        return bisect_right(self._starts, ph) - 1, ph

    def entry_end(self, index: int) -> int:
        return self._starts[index] + self.entries[index].duration


def gate_state(gcl: GateControlList, local_now: int) -> int:
    """8-bit gate mask in force at ``local_now``."""
    i, _ = gcl.index_at(local_now)
    return gcl.entries[i].gate_state


def time_until_gate_close(gcl: GateControlList, queue: int, local_now: int) -> int:
    """Nanoseconds until ``queue``'s gate next closes, ``FOREVER`` if it never does.

    Raises:
        ValueError: the gate is closed at ``local_now``.
    """
    i, ph = gcl.index_at(local_now)
    if not gcl.entries[i].gate_state >> queue & 1:
        raise ValueError(f"gate of queue {queue} is closed at {local_now}")
    until = gcl._close[i][queue]
    return FOREVER if until == FOREVER else until - (ph - gcl._starts[i])


def time_until_next_boundary(gcl: GateControlList, local_now: int) -> int:
    """Nanoseconds until the gate mask next changes, ``FOREVER`` if it never does."""
    i, ph = gcl.index_at(local_now)
    until = gcl._change[i]
    return FOREVER if until == FOREVER else until - (ph - gcl._starts[i])


class ClassQueue:
    """One traffic class of an egress port, split into FIFOs per ingress source."""

    __slots__ = ("fifos", "src_bytes", "nbytes", "count")

    def __init__(self):
        self.fifos: dict[int, deque] = {}
        self.src_bytes: dict[int, int] = {}
        self.nbytes = 0
        self.count = 0

    def push(self, frame, source: int) -> None:
        fifo = self.fifos.get(source)
        if fifo is None:
            fifo = self.fifos[source] = deque()
            self.src_bytes[source] = 0
        fifo.append(frame)
        self.src_bytes[source] += frame.wire_len
        self.nbytes += frame.wire_len
        self.count += 1

    def head_source(self) -> int:
        """Source whose head frame arrived first (plain FIFO order)."""
        if len(self.fifos) == 1:
            return next(iter(self.fifos))
        best, best_seq = -1, None
        for src, fifo in self.fifos.items():
            if fifo and (best_seq is None or fifo[0].enq_seq < best_seq):
                best, best_seq = src, fifo[0].enq_seq
        return best

    def head(self):
        return self.fifos[self.head_source()][0]

    def pop(self, source: int):
        frame = self.fifos[source].popleft()
        self.src_bytes[source] -= frame.wire_len
        self.nbytes -= frame.wire_len
        self.count -= 1
        return frame

    def frames(self):
        for fifo in self.fifos.values():
            yield from fifo


class StrictPriority:
    name = "SP"
    needs_clock = False

    def select(self, queues: list[ClassQueue], local_now: int, tx_time) -> tuple:
        """Return ``(frame, None)`` or ``(None, None)`` when every queue is empty."""
        for q in range(NUM_QUEUES - 1, -1, -1):
            cq = queues[q]
            if cq.count:
                return cq.pop(cq.head_source()), None
        return None, None


class CreditBasedFifo:
    """Occupancy arbitration between ingress sources inside one class.

    Every selection debits the chosen source by the frame's wire length
    (floored at ``-credit_limit``) and credits each other backlogged source of
    the class with ``quantum`` bytes (capped at ``credit_limit``). A source
    whose credit reaches the cap is served next regardless of occupancy, so
    no source starves forever, but its wait grows with the competing rate.
    A source that drains its FIFO forfeits positive credit.
    """

    name = "CBF"
    needs_clock = False

    def __init__(self, credit_limit: int = 16384, quantum: int = 512):
        if credit_limit <= 0 or quantum <= 0:
            raise ValueError("credit_limit and quantum must be > 0")
        self.credit_limit = credit_limit
        self.quantum = quantum
        self.credits: dict[tuple[int, int], int] = {}

    def pick_source(self, q: int, cq: ClassQueue) -> int:
        backlogged = sorted(s for s, f in cq.fifos.items() if f)
        if len(backlogged) == 1:
            return backlogged[0]
        credits = self.credits
        for s in backlogged:
            if credits.get((q, s), 0) >= self.credit_limit:
                return s
        occ = cq.src_bytes
        return max(backlogged, key=lambda s: (occ[s], -s))

    def select(self, queues: list[ClassQueue], local_now: int, tx_time) -> tuple:
        for q in range(NUM_QUEUES - 1, -1, -1):
            cq = queues[q]
            if cq.count:
                src = self.pick_source(q, cq)
                frame = cq.pop(src)
                self._account(q, cq, src, frame.wire_len)
                return frame, None
        return None, None

    def _account(self, q: int, cq: ClassQueue, src: int, nbytes: int) -> None:
        credits = self.credits
        limit = self.credit_limit
        key = (q, src)
        credits[key] = max(credits.get(key, 0) - nbytes, -limit)
        for s, fifo in cq.fifos.items():
            if s != src and fifo:
                k = (q, s)
                credits[k] = min(credits.get(k, 0) + self.quantum, limit)
        if not cq.fifos[src] and credits[key] > 0:
            credits[key] = 0


class TimeAwareShaper:
    name = "TAS"
    needs_clock = True

    def __init__(self, gcl: GateControlList):
        self.gcl = gcl

    def select(self, queues: list[ClassQueue], local_now: int, tx_time) -> tuple:
        """Return ``(frame, None)``, or ``(None, wake_local)`` when nothing is eligible.

        ``tx_time(frame)`` gives the frame's transmission delay on this port.
        ``wake_local`` is the next gate boundary (local time), or ``None`` if
        every queue is empty or the schedule never changes.
        """
        gcl = self.gcl
        i, ph = gcl.index_at(local_now)
        mask = gcl.entries[i].gate_state
        backlog = False
        for q in range(NUM_QUEUES - 1, -1, -1):
            cq = queues[q]
            if not cq.count:
                continue
            backlog = True
            if not mask & (1 << q):
                continue
            src = cq.head_source()
            if tx_time(cq.fifos[src][0]) <= time_until_gate_close(gcl, q, local_now):
                return cq.pop(src), None
        if not backlog:
            return None, None
        dt = time_until_next_boundary(gcl, local_now)
        return None, (None if dt == FOREVER else local_now + dt)


def make_policy(name: str, gcl: GateControlList | None = None, **cbf):
    if name == "SP":
        return StrictPriority()
    if name == "CBF":
        return CreditBasedFifo(**cbf)
    if name == "TAS":
        if gcl is None:
            raise ValueError("TAS policy needs a gate control list")
        return TimeAwareShaper(gcl)
    raise ValueError(f"unknown selection policy {name!r}")


# Port-level entry points. ``port`` is anything with ``queues``, ``policy``
# and ``tx_time`` (an ``EgressPort``); a returned frame has been dequeued.

_SP = StrictPriority()


def sp_select(port):
    """Head of the highest non-empty class of ``port``, or ``None``."""
    return _SP.select(port.queues, 0, port.tx_time)[0]


def cbf_select(port):
    """Next frame of ``port`` under its ``CreditBasedFifo`` policy, or ``None``."""
    if not isinstance(port.policy, CreditBasedFifo):
        raise TypeError(f"port policy is {port.policy.name}, not CBF")
    return port.policy.select(port.queues, 0, port.tx_time)[0]


def tas_select(port, local_now: int) -> tuple:
    """``(frame, start)`` if a frame may go now, else ``(None, wake_local)``.

    ``start`` is ``local_now``; ``wake_local`` is the next gate boundary or
    ``None`` when nothing is queued.
    """
    if not isinstance(port.policy, TimeAwareShaper):
        raise TypeError(f"port policy is {port.policy.name}, not TAS")
    frame, wake = port.policy.select(port.queues, local_now, port.tx_time)
    return (frame, local_now) if frame is not None else (None, wake)
