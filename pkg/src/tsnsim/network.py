"""Topology, frames and the cut-through switch/port mechanics.

Timing of one hop through a cut-through switch, for a frame whose Start of
Frame Delimiter (SFD) reaches the ingress port at ``t``:

* enqueued on the egress class queue at ``t + d_in + d_p``;
* transmission starts at some ``start >= enqueue`` chosen by the port's
  selection policy; the port is busy for ``transmission_delay(wire_len, C)``;
* the SFD reaches the next node at ``start + d_out + propagation_delay``.

Bridged endpoints (an endpoint with an embedded switch) inject their own
frames straight into their switch, skipping ``d_in``. Receivers timestamp the
SFD, so the last hop's transmission delay never appears in a measured delay.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from typing import Callable

from .engine import ClockModel, Engine
from .shapers import NUM_QUEUES, ClassQueue, StrictPriority

ENDPOINT = "endpoint"
BRIDGED = "bridged"
SWITCH = "switch"
NODE_KINDS = (ENDPOINT, BRIDGED, SWITCH)

DEFAULT_QUEUE_CAPACITY = 512 * 1024
REALISTIC_HEADER_OVERHEAD = 38


class ConfigurationError(ValueError):
    """The topology or forwarding state cannot carry the requested traffic."""


class InvariantError(RuntimeError):
    """The model reached a state its own rules forbid."""


def transmission_delay(wire_len: int, capacity: int) -> int:
    """Serialisation time in ns of ``wire_len`` bytes at ``capacity`` bit/s, rounded up."""
    if capacity <= 0:
        raise ValueError("link capacity must be > 0")
    return -(-wire_len * 8 * 1_000_000_000 // capacity)


def propagation_delay(length, speed) -> int:
    """Time in ns for one bit to cover ``length`` metres at ``speed`` m/s, rounded to nearest."""
    if speed <= 0:
        raise ValueError("propagation speed must be > 0")
    return round(Fraction(length) * 1_000_000_000 / Fraction(speed))


@dataclass(slots=True, eq=False)
class Frame:
    frame_id: int
    flow: str
    seq: int
    priority: int
    payload_len: int
    wire_len: int
    src: str
    dst: str
    tx_local_time: int | None = None
    sfd_rx_time: int | None = None
    enq_seq: int = 0

    def __post_init__(self):
        if not 0 <= self.priority <= 7:
            raise ValueError(f"priority {self.priority} outside 0..7")
        if self.wire_len < self.payload_len:
            raise ValueError("wire_len must be >= payload_len")


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    capacity: int
    length: float = 2.0
    speed: float = 2e8

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"link {self.a}-{self.b}: capacity must be > 0")
        if self.speed <= 0:
            raise ValueError(f"link {self.a}-{self.b}: propagation speed must be > 0")
        if self.length < 0:
            raise ValueError(f"link {self.a}-{self.b}: length must be >= 0")

    @property
    def prop_ns(self) -> int:
        return propagation_delay(self.length, self.speed)

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class SwitchTiming:
    d_in: int = 0
    d_p: int = 0
    d_out: int = 0

    def __post_init__(self):
        if min(self.d_in, self.d_p, self.d_out) < 0:
            raise ValueError("switch timing constants must be >= 0")


@dataclass(frozen=True)
class Node:
    name: str
    kind: str = ENDPOINT
    timing: SwitchTiming = SwitchTiming()

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"node {self.name}: unknown kind {self.kind!r}")

    @property
    def forwards(self) -> bool:
        return self.kind != ENDPOINT


@dataclass(frozen=True)
class Hop:
    """One egress port on a path, with the timing that frames see there."""

    node: str
    peer: str
    link: Link
    d_out: int


@dataclass(frozen=True)
class PathModel:
    """Elements between a source and a destination.

    ``links`` has n entries and ``switches`` the timing of the n-1 nodes the
    frame is forwarded through. A bridged source keeps its own switch in
    ``source_bridge`` (no ingress delay for self-originated frames); a plain
    endpoint source contributes its NIC latency ``source_tx_latency``.
    """

    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    switches: tuple[SwitchTiming, ...]
    source_bridge: SwitchTiming | None = None
    source_tx_latency: int = 0

    def __post_init__(self):
        if len(self.switches) != len(self.links) - 1:
            raise ValueError("a path of n links traverses n-1 switches")

    def egress_hops(self) -> list[Hop]:
        """Switch egress ports on the path (a plain source's NIC is not included)."""
        hops = []
        if self.source_bridge is not None:
            hops.append(Hop(self.nodes[0], self.nodes[1], self.links[0], self.source_bridge.d_out))
        for i, sw in enumerate(self.switches, start=1):
            hops.append(Hop(self.nodes[i], self.nodes[i + 1], self.links[i], sw.d_out))
        return hops


class Topology:
    """Nodes, full-duplex links and a static forwarding table.

    The link graph must be a forest so every pair of nodes has at most one
    loop-free path.
    """

    def __init__(self, nodes: list[Node], links: list[Link]):
        self.nodes = {n.name: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise ConfigurationError("duplicate node names")
        self.links = list(links)
        self.neighbors: dict[str, list[str]] = {n: [] for n in self.nodes}
        self._link: dict[tuple[str, str], Link] = {}
        parent = {n: n for n in self.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for link in self.links:
            for end in (link.a, link.b):
                if end not in self.nodes:
                    raise ConfigurationError(f"link {link.a}-{link.b} references unknown node {end}")
            if link.a == link.b:
                raise ConfigurationError(f"link {link.a}-{link.b} is a self loop")
            ra, rb = find(link.a), find(link.b)
            if ra == rb:
                raise ConfigurationError(f"link {link.a}-{link.b} closes a loop")
            parent[ra] = rb
            self.neighbors[link.a].append(link.b)
            self.neighbors[link.b].append(link.a)
            self._link[(link.a, link.b)] = link
            self._link[(link.b, link.a)] = link
        for name, nbrs in self.neighbors.items():
            if self.nodes[name].kind == ENDPOINT and len(nbrs) > 1:
                raise ConfigurationError(f"plain endpoint {name} has {len(nbrs)} links; it cannot forward")
        self.forwarding = self._build_forwarding()

    def link(self, a: str, b: str) -> Link:
        return self._link[(a, b)]

    def ingress_index(self, node: str, from_node: str | None) -> int:
        """0 for frames originated by the node itself, else 1 + neighbour position."""
        if from_node is None:
            return 0
        return self.neighbors[node].index(from_node) + 1

    def _build_forwarding(self) -> dict[tuple[str, str], str]:
        table = {}
        for dst in self.nodes:
            # BFS from the destination; each node's BFS parent is its next hop.
            seen = {dst}
            frontier = deque([dst])
            while frontier:
                cur = frontier.popleft()
                for nb in self.neighbors[cur]:
                    if nb not in seen:
                        seen.add(nb)
                        table[(nb, dst)] = cur
                        frontier.append(nb)
        return table

    def next_hop(self, node: str, dst: str) -> str:
        try:
            return self.forwarding[(node, dst)]
        except KeyError:
            raise ConfigurationError(f"no forwarding entry at {node} for destination {dst}") from None

    def path(self, src: str, dst: str) -> list[str]:
        nodes = [src]
        while nodes[-1] != dst:
            nodes.append(self.next_hop(nodes[-1], dst))
        for mid in nodes[1:-1]:
            if not self.nodes[mid].forwards:
                raise ConfigurationError(f"path {src}->{dst} crosses plain endpoint {mid}")
        return nodes

    def path_model(self, src: str, dst: str) -> PathModel:
        nodes = self.path(src, dst)
        if len(nodes) < 2:
            raise ConfigurationError("source and destination coincide")
        links = tuple(self.link(a, b) for a, b in zip(nodes, nodes[1:]))
        source = self.nodes[src]
        switches = tuple(self.nodes[n].timing for n in nodes[1:-1])
        if source.kind == BRIDGED:
            return PathModel(tuple(nodes), links, switches, source_bridge=source.timing)
        if source.kind == SWITCH:
            raise ConfigurationError(f"switch {src} cannot originate traffic")
        return PathModel(tuple(nodes), links, switches, source_tx_latency=source.timing.d_out)

    def capacities(self) -> set[int]:
        return {link.capacity for link in self.links}


@dataclass(slots=True)
class LatencyRecord:
    flow: str
    seq: int
    t_tx: int
    t_rx: int

    @property
    def delay(self) -> int:
        return self.t_rx - self.t_tx


@dataclass(slots=True)
class TxRecord:
    start: int
    end: int
    queue: int
    local_start: int
    frame_id: int


class EgressPort:
    """One direction of a link as seen from the transmitting node."""

    def __init__(self, node: Node, peer: str, link: Link, policy=None,
                 queue_capacity: int = DEFAULT_QUEUE_CAPACITY, record_tx: bool = False):
        self.node = node
        self.name = f"{node.name}->{peer}"
        self.peer = peer
        self.link = link
        self.capacity = link.capacity
        self.d_out = node.timing.d_out
        self.prop = link.prop_ns
        self.policy = policy if policy is not None else StrictPriority()
        self.queues = [ClassQueue() for _ in range(NUM_QUEUES)]
        self.queue_capacity = queue_capacity
        self.drops = [0] * NUM_QUEUES
        self.busy_until = 0
        self.queued = 0
        self.wake_at: int | None = None
        self.tx_log: list[TxRecord] | None = [] if record_tx else None
        self._dt_cache: dict[int, int] = {}

    def tx_time(self, frame: Frame) -> int:
        dt = self._dt_cache.get(frame.wire_len)
        if dt is None:
            dt = self._dt_cache[frame.wire_len] = transmission_delay(frame.wire_len, self.capacity)
        return dt

    def backlog(self) -> int:
        return sum(q.count for q in self.queues)


@dataclass
class FlowCounters:
    generated: int = 0
    delivered: int = 0
    dropped: int = 0


class Network:
    """Runtime state of a topology bound to an engine and a clock model.

    Args:
        policies: egress port name (``"A1->RC"``) to selection policy;
            unlisted ports use strict priority.
        on_record: called with every ``LatencyRecord`` of a measured flow.
    """

    def __init__(self, topology: Topology, engine: Engine | None = None,
                 clocks: ClockModel | None = None, policies: dict | None = None,
                 queue_capacity: int = DEFAULT_QUEUE_CAPACITY, mtu: int = 1500,
                 record_tx: bool = False, queue_map: tuple[int, ...] = tuple(range(8))):
        self.topology = topology
        self.engine = engine if engine is not None else Engine()
        self.clocks = clocks if clocks is not None else ClockModel()
        self.mtu = mtu
        self.queue_map = queue_map
        policies = policies or {}
        self.ports: dict[str, EgressPort] = {}
        self._egress: dict[tuple[str, str], EgressPort] = {}
        for name, node in topology.nodes.items():
            for peer in topology.neighbors[name]:
                port = EgressPort(node, peer, topology.link(name, peer),
                                  policies.get(f"{name}->{peer}"), queue_capacity, record_tx)
                self.ports[port.name] = port
                self._egress[(name, peer)] = port
        unknown = set(policies) - set(self.ports)
        if unknown:
            raise ConfigurationError(f"policies for unknown ports: {sorted(unknown)}")
        self.counters: dict[str, FlowCounters] = {}
        self.records: list[LatencyRecord] = []
        self.measured: set[str] = set()
        self.on_record: Callable[[LatencyRecord], None] | None = None
        self._frame_ids = count()
        self._enq_seq = count()
        # (switch, ingress neighbour, dst) -> (egress port, source index, d_in + d_p)
        self._routes: dict[tuple[str, str, str], tuple[EgressPort, int, int]] = {}

    # -- frame creation -------------------------------------------------

    def new_frame(self, flow: str, seq: int, priority: int, payload_len: int,
                  wire_len: int, src: str, dst: str) -> Frame:
        frame = Frame(next(self._frame_ids), flow, seq, priority, payload_len, wire_len, src, dst)
        self.counters.setdefault(flow, FlowCounters()).generated += 1
        return frame

    def egress_port(self, node: str, dst: str) -> EgressPort:
        return self._egress[(node, self.topology.next_hop(node, dst))]

    def inject(self, frame: Frame) -> None:
        """Hand a freshly released frame to its source node at the current time.

        A bridged endpoint stamps the frame now and delivers it to its own
        switch, where it is enqueued after the processing delay. A plain
        endpoint queues it on its NIC and stamps it when the SFD goes out.
        """
        now = self.engine.now
        src = self.topology.nodes[frame.src]
        port = self.egress_port(frame.src, frame.dst)
        if frame.wire_len > self.mtu:
            raise ConfigurationError(f"frame of {frame.wire_len} B exceeds MTU {self.mtu} B")
        if src.kind == BRIDGED:
            frame.tx_local_time = self.clocks.local_time(frame.src, now)
            self.engine.schedule(now + src.timing.d_p, self._enqueue, port, frame, 0, kind="enqueue")
        elif src.kind == ENDPOINT:
            self._enqueue(port, frame, 0)
        else:
            raise ConfigurationError(f"switch {frame.src} cannot originate traffic")

    # -- switch mechanics -----------------------------------------------

    def ingest_frame(self, switch: str, ingress_from: str, frame: Frame, sfd_time: int) -> None:
        """SFD of ``frame`` reaches ``switch`` from neighbour ``ingress_from`` at ``sfd_time``."""
        key = (switch, ingress_from, frame.dst)
        route = self._routes.get(key)
        if route is None:
            timing = self.topology.nodes[switch].timing
            route = self._routes[key] = (self.egress_port(switch, frame.dst),
                                         self.topology.ingress_index(switch, ingress_from),
                                         timing.d_in + timing.d_p)
        if frame.wire_len > self.mtu:
            raise ConfigurationError(f"frame of {frame.wire_len} B exceeds MTU {self.mtu} B")
        port, source, latency = route
        self.engine.schedule(sfd_time + latency, self._enqueue, port, frame, source,
                             kind="enqueue")

    def _enqueue(self, port: EgressPort, frame: Frame, source: int) -> None:
        q = self.queue_map[frame.priority]
        cq = port.queues[q]
        if cq.nbytes + frame.wire_len > port.queue_capacity:
            port.drops[q] += 1
            self.counters[frame.flow].dropped += 1
            return
        frame.enq_seq = next(self._enq_seq)
        cq.push(frame, source)
        port.queued += 1
        self.service(port)

    def _wake(self, port: EgressPort, t: int) -> None:
        if port.wake_at is not None and port.wake_at <= t:
            return
        port.wake_at = t
        self.engine.schedule(t, self._on_wake, port, t, kind="wake")

    def _on_wake(self, port: EgressPort, t: int) -> None:
        if port.wake_at != t:
            return
        port.wake_at = None
        self.service(port)

    def service(self, port: EgressPort) -> None:
        """Start the next transmission on ``port`` if it is idle and a frame is eligible."""
        now = self.engine.now
        if port.busy_until > now:
            self._wake(port, port.busy_until)
            return
        policy = port.policy
        local = self.clocks.local_time(port.node.name, now) if policy.needs_clock else now
        frame, wake_local = policy.select(port.queues, local, port.tx_time)
        if frame is not None:
            port.queued -= 1
            self.begin_transmission(port, frame, now, local)
            if port.queued:
                self._wake(port, port.busy_until)
        elif wake_local is not None:
            self._wake(port, now + max(wake_local - local, 1))

    def begin_transmission(self, port: EgressPort, frame: Frame, start: int,
                           local_start: int | None = None) -> None:
        if start < port.busy_until:
            raise InvariantError(
                f"{port.name}: transmission at {start} overlaps one busy until {port.busy_until}")
        dt = port.tx_time(frame)
        port.busy_until = start + dt
        if port.tx_log is not None:
            port.tx_log.append(TxRecord(start, start + dt, self.queue_map[frame.priority],
                                        start if local_start is None else local_start,
                                        frame.frame_id))
        if frame.tx_local_time is None and port.node.name == frame.src:
            frame.tx_local_time = self.clocks.local_time(frame.src, start)
        sfd = start + port.d_out + port.prop
        if port.peer == frame.dst:
            self.engine.schedule(sfd, self.deliver, frame.dst, frame, sfd, kind="deliver")
        else:
            self.ingest_frame(port.peer, port.node.name, frame, sfd)

    def deliver(self, endpoint: str, frame: Frame, sfd_time: int) -> LatencyRecord:
        """Hardware-timestamp the SFD at the receiver and record the delay."""
        if endpoint != frame.dst:
            raise InvariantError(f"frame for {frame.dst} delivered to {endpoint}")
        frame.sfd_rx_time = self.clocks.local_time(endpoint, sfd_time)
        self.counters[frame.flow].delivered += 1
        rec = LatencyRecord(frame.flow, frame.seq, frame.tx_local_time, frame.sfd_rx_time)
        if frame.flow in self.measured:
            self.records.append(rec)
            if self.on_record is not None:
                self.on_record(rec)
        return rec

    # -- inspection -----------------------------------------------------

    def in_flight(self) -> dict[str, int]:
        """Frames queued in ports or carried by pending events, per flow."""
        out: dict[str, int] = {}
        for port in self.ports.values():
            for cq in port.queues:
                for f in cq.frames():
                    out[f.flow] = out.get(f.flow, 0) + 1
        for _, _, kind, args in self.engine.pending():
            if kind in ("enqueue", "deliver"):
                f = args[1]
                out[f.flow] = out.get(f.flow, 0) + 1
        return out

    def drops_by_port(self) -> dict[str, int]:
        return {name: sum(p.drops) for name, p in self.ports.items()}
