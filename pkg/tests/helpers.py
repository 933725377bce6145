"""Small network builders shared by the test modules."""

from __future__ import annotations

from tsnsim import ClockModel, Engine, Link, Network, Node, SwitchTiming, Topology
from tsnsim.network import BRIDGED, ENDPOINT, SWITCH


def line(n_switches: int, capacity: int = 1_000_000_000, timing=None, lengths=None,
         src_kind: str = ENDPOINT, src_tx_latency: int = 0) -> Topology:
    """``H0 - SW1 - ... - SWn - H1``; ``timing`` is one SwitchTiming or a list."""
    timings = timing if isinstance(timing, list) else [timing or SwitchTiming()] * n_switches
    names = ["H0"] + [f"SW{i + 1}" for i in range(n_switches)] + ["H1"]
    if src_kind == BRIDGED:
        src = Node("H0", BRIDGED, timings[0] if n_switches == 0 else SwitchTiming(0, 300, 200))
    else:
        src = Node("H0", ENDPOINT, SwitchTiming(d_out=src_tx_latency))
    nodes = [src] + [Node(n, SWITCH, t) for n, t in zip(names[1:-1], timings)] + [Node("H1")]
    lengths = lengths or [2.0] * (len(names) - 1)
    links = [Link(a, b, capacity, length) for a, b, length in zip(names, names[1:], lengths)]
    return Topology(nodes, links)


def network(topo: Topology, policies=None, seed: int = 0, record_tx: bool = False,
            queue_capacity: int = 512 * 1024, clocks: ClockModel | None = None) -> Network:
    return Network(topo, Engine(), clocks or ClockModel(seed), policies,
                   queue_capacity=queue_capacity, record_tx=record_tx)


def send(net: Network, src: str, dst: str, wire_len: int = 256, priority: int = 7,
         flow: str = "f", seq: int = 0, at: int | None = None):
    """Create and inject a frame at ``at`` (default: now), like a generator release."""
    net.measured.add(flow)

    def release():
        net.inject(net.new_frame(flow, seq, priority, wire_len, wire_len, src, dst))

    if at is None or at == net.engine.now:
        release()
    else:
        net.engine.schedule(at, release, kind="gen")
