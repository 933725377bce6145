"""Scenario execution, parameter sweeps and table/CSV emission."""

from __future__ import annotations

import copy
import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..analytics import StatsSummary, summarize
from ..network import LatencyRecord, Network
from .config import ScenarioConfig, build_network, parse_config

RECORD_COLUMNS = ("flow", "seq", "t_tx_ns", "t_rx_ns", "delay_ns")
SUMMARY_COLUMNS = ("actuator", "queue", "policy", "load", "samples",
                   "min_us", "max_us", "mean_us", "std_us", "max_minus_min_us")


def queue_label(priority: int) -> str:
    return {0: "BE", 7: "ST"}.get(priority, f"Q{priority}")


def load_label(cfg: ScenarioConfig) -> str:
    rate = sum(f.rate for f in cfg.saturating_flows())
    if rate == 0:
        return "-"
    return f"{rate / 1e6:g} Mbps"


@dataclass
class SummaryRow:
    actuator: str
    queue: str
    policy: str
    load: str
    flow: str
    stats: StatsSummary

    def as_dict(self) -> dict:
        return {"actuator": self.actuator, "queue": self.queue, "policy": self.policy,
                "load": self.load, "samples": self.stats.count, **self.stats.row_us()}


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list[LatencyRecord]
    rows: list[SummaryRow]
    drops: dict[str, int]
    counters: dict
    in_flight: dict[str, int] = field(default_factory=dict)
    network: Network | None = None

    def by_flow(self) -> dict[str, list[LatencyRecord]]:
        out: dict[str, list[LatencyRecord]] = {}
        for r in self.records:
            out.setdefault(r.flow, []).append(r)
        return out

    def stats(self, flow: str) -> StatsSummary:
        for row in self.rows:
            if row.flow == flow:
                return row.stats
        raise KeyError(flow)

    def records_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in sorted(self.records, key=lambda r: (r.flow, r.seq)):
            w.writerow((r.flow, r.seq, r.t_tx, r.t_rx, r.delay))
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow(row.as_dict())
        return buf.getvalue()

    def drops_csv(self) -> str:
        lines = ["port,drops"] + [f"{p},{n}" for p, n in sorted(self.drops.items())]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path, gnuplot: bool = False) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "records.csv": self.records_csv(),
            "summary.csv": self.summary_csv(),
            "summary.md": render_table([r.as_dict() for r in self.rows]),
            "drops.csv": self.drops_csv(),
        }
        if gnuplot:
            files["plot.gp"] = gnuplot_script(sorted(self.by_flow()), self.config.name)
        paths = []
        for name, text in files.items():
            p = out / name
            p.write_text(text)
            paths.append(p)
        return paths


def run_scenario(cfg: ScenarioConfig, record_tx: bool = False, trace: bool = False,
                 keep_network: bool = False) -> ScenarioResult:
    """Run one scenario for its duration plus drain time."""
    net = build_network(cfg, record_tx=record_tx, trace=trace)
    net.engine.run_until(cfg.duration + cfg.drain)
    grouped: dict[str, list[LatencyRecord]] = {}
    for r in net.records:
        grouped.setdefault(r.flow, []).append(r)
    rows = []
    load = load_label(cfg)
    for spec in cfg.flows:
        recs = grouped.get(spec.name)
        if not recs:
            continue
        hops = cfg.topology.path_model(spec.src, spec.dst).egress_hops()
        policy = cfg.policy_of(f"{hops[0].node}->{hops[0].peer}") if hops else "SP"
        rows.append(SummaryRow(cfg.labels[spec.name], queue_label(spec.priority),
                               policy, load, spec.name, summarize(recs)))
    return ScenarioResult(cfg, net.records, rows, net.drops_by_port(),
                          {k: vars(v).copy() for k, v in net.counters.items()},
                          net.in_flight(), net if keep_network or record_tx or trace else None)


def render_table(rows: list[dict]) -> str:
    """Markdown table in the layout of the delay result tables."""
    head = ("Actuator", "Queue", "QoS", "Network load", "Min(us)", "Max(us)",
            "Mean(us)", "Std(us)", "Max-Min(us)")
    keys = ("actuator", "queue", "policy", "load", "min_us", "max_us", "mean_us",
            "std_us", "max_minus_min_us")
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for row in rows:
        cells = []
        for k in keys:
            v = row[k]
            cells.append(f"{v:,.2f}" if isinstance(v, float) else str(v))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def gnuplot_script(flows: list[str], title: str) -> str:
    plots = ", \\\n     ".join(
        f"'records.csv' using ($3/1e9):(strcol(1) eq '{f}' ? $5/1e3 : 1/0) with points pt 7 ps 0.3 title '{f}'"
        for f in flows)
    return (f"set datafile separator ','\nset key autotitle columnhead\n"
            f"set title '{title}'\nset xlabel 'time (s)'\nset ylabel 'delay (us)'\n"
            f"plot {plots}\n")


# -- sweeps -------------------------------------------------------------

SWEEP_PARAMETERS = ("phase", "jitter", "rate", "payload")


def apply_parameter(doc: dict, parameter: str, value) -> dict:
    """Copy of ``doc`` with one sweep parameter set.

    ``parameter`` is ``phase:<flow>``, ``rate:<flow>``, ``payload:<flow>``,
    ``jitter`` (every node) or ``jitter:<node>``.
    """
    kind, _, target = parameter.partition(":")
    if kind not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    out = copy.deepcopy(doc)
    if kind == "jitter":
        clocks = out.setdefault("clocks", {})
        keys = [target] if target else ["*"] + [k for k in clocks if k != "*"]
        for k in keys:
            clocks.setdefault(k, {})["jitter_ns"] = int(value)
        return out
    field_name = {"phase": "phase_ns", "rate": "rate_bps", "payload": "payload"}[kind]
    for flow in out["flows"]:
        if flow["name"] == target:
            if kind == "rate" and flow["type"] != "saturating":
                raise ValueError(f"flow {target} has no rate")
            flow[field_name] = int(value)
            return out
    raise ValueError(f"sweep parameter {parameter!r} names no flow")


@dataclass
class SweepPoint:
    value: int
    stats: dict[str, StatsSummary]
    drops: int


def _run_point(args) -> SweepPoint:
    doc, parameter, value = args
    res = run_scenario(parse_config(apply_parameter(doc, parameter, value)))
    return SweepPoint(value, {r.flow: r.stats for r in res.rows}, sum(res.drops.values()))


def sweep(doc: dict, parameter: str, values, parallel: int = 1) -> list[SweepPoint]:
    """Run ``doc`` once per value of ``parameter``; points come back in input order."""
    values = list(values)
    if not values:
        raise ValueError("sweep range is empty")
    apply_parameter(doc, parameter, values[0])
    jobs = [(doc, parameter, v) for v in values]
    if parallel > 1:
        with ProcessPoolExecutor(parallel) as pool:
            return list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * parallel))))
    return [_run_point(j) for j in jobs]


def sweep_extrema(points: list[SweepPoint]) -> dict[str, tuple[int, int]]:
    """Per flow, ``(value, max delay)`` of the point with the largest max delay."""
    best: dict[str, tuple[int, int]] = {}
    for p in points:
        for flow, st in p.stats.items():
            if flow not in best or st.max > best[flow][1]:
                best[flow] = (p.value, st.max)
    return best


def sweep_csv(points: list[SweepPoint], parameter: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("parameter", "value", "flow", "samples", "min_ns", "max_ns", "mean_ns",
                "std_ns", "drops"))
    for p in points:
        for flow, st in sorted(p.stats.items()):
            w.writerow((parameter, p.value, flow, st.count, st.min, st.max,
                        f"{st.mean:.3f}", f"{st.std:.3f}", p.drops))
    return buf.getvalue()


# -- the delay tables -----------------------------------------------------

def _run_doc(doc: dict) -> list[dict]:
    return [r.as_dict() for r in run_scenario(parse_config(doc)).rows]


def report(docs: list[dict], parallel: int = 1) -> list[dict]:
    """Run each scenario with and without its bulk load; return table rows."""
    from .config import without_load

    jobs = []
    for doc in docs:
        jobs.append(without_load(doc))
        jobs.append(doc)
    if parallel > 1:
        with ProcessPoolExecutor(parallel) as pool:
            results = list(pool.map(_run_doc, jobs))
    else:
        results = [_run_doc(j) for j in jobs]
    rows = [row for res in results for row in res]
    order = {"CBF": 0, "SP": 1, "TAS": 2}
    rows.sort(key=lambda r: (r["actuator"], r["queue"] != "BE", order.get(r["policy"], 9),
                             r["load"] != "-"))
    return rows
