"""Gate control lists derived from the periodic flows crossing each TAS port."""

from __future__ import annotations

from ..network import BRIDGED, Topology, transmission_delay
from ..shapers import ALL_OPEN, GateControlList, GateEntry
from ..traffic import PeriodicFlowSpec


def enqueue_offsets(topo: Topology, spec: PeriodicFlowSpec) -> list[tuple[str, int]]:
    """Zero-queue enqueue instant (relative to cycle start) at every egress port of the flow."""
    nodes = topo.path(spec.src, spec.dst)
    src = topo.nodes[spec.src]
    out = []
    t = spec.phase
    if src.kind == BRIDGED:
        t += src.timing.d_p
        out.append((f"{nodes[0]}->{nodes[1]}", t))
    prev_d_out = src.timing.d_out
    for i in range(1, len(nodes) - 1):
        link = topo.link(nodes[i - 1], nodes[i])
        tim = topo.nodes[nodes[i]].timing
        t += prev_d_out + link.prop_ns + tim.d_in + tim.d_p
        out.append((f"{nodes[i]}->{nodes[i + 1]}", t))
        prev_d_out = tim.d_out
    return out


def derive_gcl(windows: list[tuple[int, int, int]], cycle: int) -> GateControlList:
    """Build a GCL from ``(start, length, queue)`` windows.

    Inside a window only the scheduled queue(s) active there are open. Outside
    every window, all queues except the scheduled ones are open. Windows may
    wrap past the end of the cycle.
    """
    if not windows:
        return GateControlList.always_open(cycle)
    scheduled = 0
    spans = []
    for start, length, q in windows:
        if length >= cycle:
            raise ValueError("window does not fit in the cycle")
        scheduled |= 1 << q
        s = start % cycle
        e = s + length
        if e <= cycle:
            spans.append((s, e, q))
        else:
            spans.append((s, cycle, q))
            spans.append((0, e - cycle, q))
    cuts = sorted({0, cycle, *(s for s, _, _ in spans), *(e for _, e, _ in spans)})
    entries: list[list[int]] = []
    for a, b in zip(cuts, cuts[1:]):
        mask = 0
        for s, e, q in spans:
            if s <= a and b <= e:
                mask |= 1 << q
        if not mask:
            mask = ALL_OPEN & ~scheduled
        if entries and entries[-1][1] == mask:
            entries[-1][0] += b - a
        else:
            entries.append([b - a, mask])
    return GateControlList(cycle, tuple(GateEntry(d, m) for d, m in entries))


def derive_tas_gcls(topo: Topology, flows: list[PeriodicFlowSpec], ports: list[str],
                    header_overhead: int = 0, margin: int = 1000,
                    queue_map: tuple[int, ...] = tuple(range(8))) -> dict[str, GateControlList]:
    """One GCL per port in ``ports``, opening a window around each expected arrival.

    A window spans ``margin`` ns before the expected enqueue instant to
    ``margin`` ns after the frame would finish. All flows crossing a port must
    share one period, which becomes the cycle.
    """
    per_port: dict[str, list[tuple[int, int, int]]] = {p: [] for p in ports}
    periods: dict[str, set[int]] = {p: set() for p in ports}
    for spec in flows:
        wire = spec.payload + header_overhead
        for port, t in enqueue_offsets(topo, spec):
            if port not in per_port:
                continue
            a, b = port.split("->")
            dt = transmission_delay(wire, topo.link(a, b).capacity)
            per_port[port].append((t - margin, dt + 2 * margin, queue_map[spec.priority]))
            periods[port].add(spec.period)
    out = {}
    for port in ports:
        if len(periods[port]) > 1:
            raise ValueError(f"{port}: flows with different periods {sorted(periods[port])}")
        cycle = next(iter(periods[port]), 1_000_000)
        out[port] = derive_gcl(per_port[port], cycle)
    return out
