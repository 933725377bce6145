"""Closed-form latency model, worst-case blocking bounds and delay statistics.

All quantities are integer nanoseconds except the mean and standard deviation
of a sample, which are exact rationals evaluated to float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .network import PathModel, SwitchTiming, transmission_delay


def e2e_zero_queue(path: PathModel) -> int:
    """Constant part of the SFD-to-SFD delay along ``path`` with empty queues.

    Transmission delays never appear: switches cut through, and both ends
    timestamp the SFD. A bridged source contributes its switch's processing
    and egress delay only.
    """
    if path.source_bridge is not None:
        total = path.source_bridge.d_p + path.source_bridge.d_out
    else:
        total = path.source_tx_latency
    total += sum(link.prop_ns for link in path.links)
    total += sum(sw.d_in + sw.d_p + sw.d_out for sw in path.switches)
    return total


def lower_priority_blocking_per_hop(path: PathModel, mtu: int) -> list[tuple[str, int]]:
    """Per egress port ``(name, ns)``: one MTU frame of a lower class already on the wire."""
    return [(f"{h.node}->{h.peer}", transmission_delay(mtu, h.link.capacity))
            for h in path.egress_hops()]


def wc_lower_priority_blocking(path: PathModel, mtu: int) -> int:
    """Worst-case wait behind non-preemptable lower-priority frames, summed over hops."""
    return sum(ns for _, ns in lower_priority_blocking_per_hop(path, mtu))


def wc_same_priority_blocking(path: PathModel, competing_frames: Iterable[int]) -> int:
    """Worst-case wait behind same-class frames that can be queued ahead.

    Each entry of ``competing_frames`` is the wire length of one such frame;
    it is charged at the slowest egress port of the path.
    """
    hops = path.egress_hops()
    capacity = min(h.link.capacity for h in hops) if hops else path.links[0].capacity
    return sum(transmission_delay(n, capacity) for n in competing_frames)


def cycle_time_estimate(device_count: int, per_device_payload: int, capacity: int,
                        per_hop_constants: int = 0) -> int:
    """Minimum control cycle on a line of ``device_count`` devices behind one controller.

    One input and one output frame per device are serialised on the
    controller's link, and the farthest device is ``device_count`` hops away in
    each direction.
    """
    if device_count < 1:
        raise ValueError("device_count must be >= 1")
    serialized = 2 * device_count * transmission_delay(per_device_payload, capacity)
    return serialized + 2 * device_count * per_hop_constants


def calibrate_timing(k1: int, k2: int, d_l: int, processing_share: float = 0.5) -> SwitchTiming:
    """Switch constants that reproduce measured one-hop and two-hop constants.

    For a chain ``A2 -> A1 -> RC`` of identical bridged endpoints and links,
    ``k1 = d_p + d_out + d_l`` and ``k2 = 2 * k1 + d_in``. Only the sum
    ``d_p + d_out`` is identifiable; ``processing_share`` picks the split.
    """
    d_in = k2 - 2 * k1
    rest = k1 - d_l
    if d_in < 0 or rest < 0:
        raise ValueError(f"no non-negative solution for k1={k1}, k2={k2}, d_l={d_l}")
    d_p = round(rest * processing_share)
    return SwitchTiming(d_in=d_in, d_p=d_p, d_out=rest - d_p)


@dataclass(frozen=True)
class StatsSummary:
    """Delay statistics in ns. ``std`` is the population standard deviation."""

    count: int
    min: int
    max: int
    mean: float
    std: float

    @property
    def max_minus_min(self) -> int:
        return self.max - self.min

    def row_us(self) -> dict[str, float]:
        """Columns of a delay table in µs, rounded to 0.01 µs."""
        return {
            "min_us": round(self.min / 1000, 2),
            "max_us": round(self.max / 1000, 2),
            "mean_us": round(self.mean / 1000, 2),
            "std_us": round(self.std / 1000, 2),
            "max_minus_min_us": round(self.max_minus_min / 1000, 2),
        }


def summarize(records) -> StatsSummary:
    """Min/max/mean/std of delays given as ``LatencyRecord`` objects or integers.

    Sums are accumulated in Python integers, so mean and variance are exact
    before the final division and square root.
    """
    delays = [r if isinstance(r, int) else r.delay for r in records]
    n = len(delays)
    if n == 0:
        raise ValueError("cannot summarize an empty sample")
    s = sum(delays)
    ss = sum(d * d for d in delays)
    var_num = n * ss - s * s
    return StatsSummary(n, min(delays), max(delays), s / n, math.sqrt(var_num) / n)
