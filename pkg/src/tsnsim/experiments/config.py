"""Scenario configuration: JSON loading, validation and network assembly."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ..engine import S, ClockModel, Engine
from ..network import (DEFAULT_QUEUE_CAPACITY, ENDPOINT, SWITCH, ConfigurationError,
                       FlowCounters, Link, Network, Node, SwitchTiming, Topology, transmission_delay)
from ..shapers import GateControlList, GateEntry, GclError, make_policy
from ..traffic import (PeriodicFlowSpec, SaturatingFlowSpec, emit_periodic,
                       emit_saturating)

SCHEMA_VERSION = 1
PRESET_DIR = Path(__file__).with_name("presets")


class ConfigError(ValueError):
    """A scenario failed to parse or validate. ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@lru_cache(maxsize=1)
def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema.json").read_text())


@dataclass
class ScenarioConfig:
    name: str
    raw: dict
    topology: Topology
    port_policies: dict[str, tuple[str, GateControlList | None]]
    flows: list
    labels: dict[str, str]
    clocks: dict[str, tuple[int, int]]
    seed: int = 0
    duration: int = 10 * S
    drain: int = 10_000_000
    header_overhead: int = 0
    mtu: int = 1500
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY
    cbf: dict = field(default_factory=dict)

    def policy_of(self, port: str) -> str:
        return self.port_policies.get(port, ("SP", None))[0]

    def periodic_flows(self) -> list[PeriodicFlowSpec]:
        return [f for f in self.flows if isinstance(f, PeriodicFlowSpec)]

    def saturating_flows(self) -> list[SaturatingFlowSpec]:
        return [f for f in self.flows if isinstance(f, SaturatingFlowSpec)]


def parse_gate_state(value) -> int:
    return int(value, 16) if isinstance(value, str) else int(value)


def gcl_from_json(doc: dict) -> GateControlList:
    entries = tuple(GateEntry(e["duration_ns"], parse_gate_state(e["gate_states"]))
                    for e in doc["entries"])
    return GateControlList(doc["cycle_ns"], entries, doc.get("base_time_ns", 0))


def gcl_to_json(gcl: GateControlList) -> dict:
    return {
        "base_time_ns": gcl.base_time,
        "cycle_ns": gcl.cycle,
        "entries": [{"duration_ns": e.duration, "gate_states": f"0x{e.gate_state:02x}"}
                    for e in gcl.entries],
    }


def _schema_errors(doc) -> list[str]:
    validator = jsonschema.Draft202012Validator(schema())
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.path))):
        where = "/".join(str(p) for p in err.path) or "<root>"
        out.append(f"schema: {where}: {err.message}")
    return out


def parse_config(doc: dict) -> ScenarioConfig:
    """Validate a scenario document and build its model objects.

    Raises:
        ConfigError: with every schema and semantic violation found.
    """
    errors = _schema_errors(doc)
    if errors:
        raise ConfigError(errors)
    doc = copy.deepcopy(doc)

    nodes = []
    for name, nd in doc["nodes"].items():
        timing = SwitchTiming(nd.get("d_in_ns", 0), nd.get("d_p_ns", 0), nd.get("d_out_ns", 0))
        nodes.append(Node(name, nd["kind"], timing))
        if nd["kind"] == ENDPOINT and ("policy" in nd or "gcl" in nd):
            errors.append(f"node {name}: plain endpoints take no selection policy")
    links = [Link(lk["a"], lk["b"], lk["capacity_bps"], lk.get("length_m", 2.0),
                  lk.get("speed_mps", 2e8)) for lk in doc["links"]]
    rates = {lk.capacity for lk in links}
    if len(rates) > 1:
        errors.append(f"mixed link rates {sorted(rates)}: cut-through chaining needs one rate")
    try:
        topo = Topology(nodes, links)
    except ConfigurationError as exc:
        raise ConfigError(errors + [f"topology: {exc}"]) from None

    policies: dict[str, tuple[str, GateControlList | None]] = {}

    def add_policy(port: str, spec: dict, where: str):
        gcl = None
        if "gcl" in spec:
            try:
                gcl = gcl_from_json(spec["gcl"])
            except GclError as exc:
                errors.append(f"{where}: gcl: {exc}")
                return
        if spec["policy"] == "TAS" and gcl is None:
            errors.append(f"{where}: TAS needs a gcl")
            return
        policies[port] = (spec["policy"], gcl)

    for name, nd in doc["nodes"].items():
        if "policy" in nd:
            for peer in topo.neighbors[name]:
                add_policy(f"{name}->{peer}", nd, f"node {name}")
    ports = {f"{a}->{b}" for a in topo.nodes for b in topo.neighbors[a]}
    for port, spec in doc.get("ports", {}).items():
        if port not in ports:
            errors.append(f"ports: {port} is not a port of the topology")
            continue
        add_policy(port, spec, f"port {port}")

    header = doc.get("header_overhead", 0)
    mtu = doc.get("mtu", 1500)
    flows, labels, names = [], {}, set()
    for fd in doc["flows"]:
        where = f"flow {fd['name']}"
        if fd["name"] in names:
            errors.append(f"{where}: duplicate flow name")
        names.add(fd["name"])
        bad = False
        for end in ("src", "dst"):
            if fd[end] not in topo.nodes:
                errors.append(f"{where}: {end} references unknown node {fd[end]}")
                bad = True
            elif topo.nodes[fd[end]].kind == SWITCH:
                errors.append(f"{where}: {end} {fd[end]} is a switch, not an endpoint")
                bad = True
        if bad:
            continue
        if fd["src"] == fd["dst"]:
            errors.append(f"{where}: src and dst are the same node")
            continue
        try:
            topo.path(fd["src"], fd["dst"])
        except ConfigurationError as exc:
            errors.append(f"{where}: {exc}")
            continue
        if fd["payload"] + header > mtu:
            errors.append(f"{where}: wire length {fd['payload'] + header} B exceeds MTU {mtu} B")
        try:
            if fd["type"] == "periodic":
                spec = PeriodicFlowSpec(fd["name"], fd["src"], fd["dst"], fd["payload"],
                                        fd["period_ns"], fd.get("phase_ns", 0),
                                        fd.get("priority", 7), fd.get("count"),
                                        fd.get("measure", True))
            else:
                spec = SaturatingFlowSpec(fd["name"], fd["src"], fd["dst"], fd["payload"],
                                          fd["rate_bps"], fd.get("priority", 0),
                                          fd.get("phase_ns", 0), fd.get("measure", False))
                hops = topo.path(spec.src, spec.dst)
                bottleneck = min(topo.link(a, b).capacity for a, b in zip(hops, hops[1:]))
                if spec.rate > bottleneck:
                    errors.append(f"{where}: rate {spec.rate} exceeds path bottleneck {bottleneck}")
        except ValueError as exc:
            errors.append(str(exc))
            continue
        flows.append(spec)
        labels[spec.name] = fd.get("label", spec.src)

    clocks = {}
    known = set(topo.nodes)
    default = doc.get("clocks", {}).get("*", {})
    for name in topo.nodes:
        c = {**default, **doc.get("clocks", {}).get(name, {})}
        clocks[name] = (c.get("offset_ns", 0), c.get("jitter_ns", 0))
    for name in doc.get("clocks", {}):
        if name != "*" and name not in known:
            errors.append(f"clocks: unknown node {name}")

    if errors:
        raise ConfigError(errors)
    cbf = doc.get("cbf", {})
    return ScenarioConfig(
        name=doc.get("name", "scenario"),
        raw=doc,
        topology=topo,
        port_policies=policies,
        flows=flows,
        labels=labels,
        clocks=clocks,
        seed=doc.get("seed", 0),
        duration=round(doc.get("duration_s", 10) * S),
        drain=round(doc.get("drain_s", 0.01) * S),
        header_overhead=header,
        mtu=mtu,
        queue_capacity=doc.get("queue_capacity_bytes", DEFAULT_QUEUE_CAPACITY),
        cbf={"credit_limit": cbf.get("credit_limit_bytes", 16384),
             "quantum": cbf.get("quantum_bytes", 512)},
    )


def resolve_config_path(path_or_name: str | Path) -> Path:
    """Accept a file path or the name of a shipped preset (``exp2_100m``)."""
    p = Path(path_or_name)
    if p.exists():
        return p
    preset = PRESET_DIR / f"{path_or_name}.json"
    if preset.exists():
        return preset
    raise FileNotFoundError(f"no config file or preset named {path_or_name}")


def load_raw(path: str | Path) -> dict:
    try:
        return json.loads(resolve_config_path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"parse error: {exc}"]) from None


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(load_raw(path))


def without_load(doc: dict) -> dict:
    """Copy of a scenario with the saturating flows removed."""
    out = copy.deepcopy(doc)
    out["flows"] = [f for f in out["flows"] if f["type"] != "saturating"]
    return out


def build_network(cfg: ScenarioConfig, record_tx: bool = False,
                  trace: bool = False) -> Network:
    """Assemble engine, clocks, policies and traffic generators for one run."""
    engine = Engine(trace=trace)
    clocks = ClockModel(cfg.seed)
    for node, (offset, jitter) in cfg.clocks.items():
        clocks.set(node, offset, jitter)
    policies = {port: make_policy(name, gcl, **cfg.cbf) if name == "CBF" else make_policy(name, gcl)
                for port, (name, gcl) in cfg.port_policies.items()}
    net = Network(cfg.topology, engine, clocks, policies, cfg.queue_capacity, cfg.mtu,
                  record_tx=record_tx)
    for spec in cfg.flows:
        net.counters.setdefault(spec.name, FlowCounters())
        if isinstance(spec, PeriodicFlowSpec):
            emit_periodic(spec, net, cfg.duration, cfg.header_overhead)
        else:
            emit_saturating(spec, net, cfg.duration, cfg.header_overhead)
    return net


def wire_len(cfg: ScenarioConfig, spec) -> int:
    return spec.payload + cfg.header_overhead


def frame_time(cfg: ScenarioConfig, spec) -> int:
    rate = next(iter(cfg.topology.capacities()))
    return transmission_delay(wire_len(cfg, spec), rate)
