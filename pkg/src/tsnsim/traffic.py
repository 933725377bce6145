"""Traffic sources: periodic control flows and token-bucket bulk load."""

from __future__ import annotations

from dataclasses import dataclass

from .network import Network


@dataclass(frozen=True)
class PeriodicFlowSpec:
    """Frame ``k`` is released at source-local time ``phase + k * period``."""

    name: str
    src: str
    dst: str
    payload: int
    period: int
    phase: int = 0
    priority: int = 7
    count: int | None = None
    measure: bool = True

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError(f"flow {self.name}: period must be > 0")
        if not 0 <= self.phase < self.period:
            raise ValueError(f"flow {self.name}: phase must be in [0, period)")
        if not 0 <= self.priority <= 7:
            raise ValueError(f"flow {self.name}: priority outside 0..7")


@dataclass(frozen=True)
class SaturatingFlowSpec:
    """Constant-rate bulk flow: a token bucket one frame deep."""

    name: str
    src: str
    dst: str
    payload: int
    rate: int
    priority: int = 0
    phase: int = 0
    measure: bool = False

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"flow {self.name}: rate must be >= 0")
        if not 0 <= self.priority <= 7:
            raise ValueError(f"flow {self.name}: priority outside 0..7")


def emit_periodic(spec: PeriodicFlowSpec, net: Network, until: int,
                  header_overhead: int = 0) -> None:
    """Schedule the releases of ``spec`` whose local release time is before ``until``."""
    engine = net.engine
    clocks = net.clocks
    wire = spec.payload + header_overhead
    limit = spec.count
    if spec.measure:
        net.measured.add(spec.name)

    def release(k: int) -> None:
        frame = net.new_frame(spec.name, k, spec.priority, spec.payload, wire, spec.src, spec.dst)
        net.inject(frame)
        nxt = k + 1
        local = spec.phase + nxt * spec.period
        if local < until and (limit is None or nxt < limit):
            engine.schedule(max(clocks.to_global(spec.src, local), engine.now + 1),
                            release, nxt, kind="gen")

    if spec.phase < until and (limit is None or limit > 0):
        engine.schedule(max(clocks.to_global(spec.src, spec.phase), engine.now),
                        release, 0, kind="gen")


def emit_saturating(spec: SaturatingFlowSpec, net: Network, until: int,
                    header_overhead: int = 0) -> None:
    """Schedule token-bucket releases of ``spec`` in global time up to ``until``.

    Release times are computed from the frame index rather than accumulated,
    so the long-run rate is exact and never drifts above ``spec.rate``.
    """
    if spec.rate == 0:
        return
    engine = net.engine
    wire = spec.payload + header_overhead
    bits_ns = wire * 8 * 1_000_000_000
    rate = spec.rate
    start = spec.phase
    if spec.measure:
        net.measured.add(spec.name)

    def release(k: int) -> None:
        frame = net.new_frame(spec.name, k, spec.priority, spec.payload, wire, spec.src, spec.dst)
        net.inject(frame)
        nxt = k + 1
        t = start + -(-nxt * bits_ns // rate)
        if t < until:
            engine.schedule(t, release, nxt, kind="gen")

    if start < until:
        engine.schedule(max(start, engine.now), release, 0, kind="gen")
