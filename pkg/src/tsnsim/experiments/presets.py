"""Builders for the shipped experiment presets.

The testbed is a chain ``S - A2 - A1 - RC``: two bridged actuators, a sensor
PC pushing bulk traffic and the robot controller that timestamps arrivals.

Switch constants come from :func:`tsnsim.analytics.calibrate_timing` applied
to the no-load constants K1 (A1 -> RC) and K2 (A2 -> RC) measured on the
testbed, with 2 m cables and an even processing/egress split. The sensor NIC
latency is chosen so that the 1 us phase grid of the lower-priority blocking
sweep contains the instant where a sensor frame and an A1 frame are enqueued
together at A1.

Regenerate the JSON files with ``python -m tsnsim.experiments.presets``.
"""

from __future__ import annotations

import json
import sys

from ..analytics import calibrate_timing
from ..network import propagation_delay
from .config import PRESET_DIR, gcl_to_json, parse_config
from .schedule import derive_tas_gcls

RATES = {
    "100m": {"capacity": 100_000_000, "k1": 3830, "k2": 9350, "load": 90_000_000,
             "sensor_tx_latency": 780},
    "1g": {"capacity": 1_000_000_000, "k1": 1060, "k2": 2400, "load": 900_000_000,
           "sensor_tx_latency": 370},
}
CABLE_M = 2.0
SPEED = 2e8
PERIOD = 1_000_000
CONTROL_PAYLOAD = 256
BULK_PAYLOAD = 1500
TAS_MARGIN = 1000
# A1 releases 50 us into the cycle so that, with no load, its frame never
# meets A2's frame at A1's egress port.
A1_PHASE = 50_000

EXPERIMENTS = {
    "exp1": {"policy": "CBF", "priority": 0, "title": "same priority blocking"},
    "exp2": {"policy": "SP", "priority": 7, "title": "lower priority blocking"},
    "exp3": {"policy": "TAS", "priority": 7, "title": "time-aware shaper"},
}


def build_preset(exp: str, rate: str) -> dict:
    r = RATES[rate]
    e = EXPERIMENTS[exp]
    timing = calibrate_timing(r["k1"], r["k2"], propagation_delay(CABLE_M, SPEED))
    bridged = {"kind": "bridged", "d_in_ns": timing.d_in, "d_p_ns": timing.d_p,
               "d_out_ns": timing.d_out}
    doc = {
        "schema_version": 1,
        "name": f"{exp}_{rate}",
        "description": f"{e['title']}, {r['capacity'] // 1_000_000} Mbps links",
        "seed": 0,
        "duration_s": 10,
        "drain_s": 0.01,
        "header_overhead": 0,
        "mtu": 1500,
        "queue_capacity_bytes": 512 * 1024,
        "nodes": {
            "S": {"kind": "endpoint", "d_out_ns": r["sensor_tx_latency"]},
            "A2": dict(bridged),
            "A1": dict(bridged),
            "RC": {"kind": "endpoint"},
        },
        "links": [
            {"a": a, "b": b, "capacity_bps": r["capacity"], "length_m": CABLE_M, "speed_mps": SPEED}
            for a, b in (("S", "A2"), ("A2", "A1"), ("A1", "RC"))
        ],
        "clocks": {"*": {"offset_ns": 0, "jitter_ns": 0}},
        "flows": [
            {"name": "F_A1", "type": "periodic", "label": "A1", "src": "A1", "dst": "RC",
             "payload": CONTROL_PAYLOAD, "period_ns": PERIOD,
             "phase_ns": A1_PHASE, "priority": e["priority"]},
            {"name": "F_A2", "type": "periodic", "label": "A2", "src": "A2", "dst": "RC",
             "payload": CONTROL_PAYLOAD, "period_ns": PERIOD, "phase_ns": 0,
             "priority": e["priority"]},
            {"name": "F_S", "type": "saturating", "label": "S", "src": "S", "dst": "RC",
             "payload": BULK_PAYLOAD, "rate_bps": r["load"], "phase_ns": 0, "priority": 0,
             "measure": False},
        ],
        "output": {"dir": f"out/{exp}_{rate}", "gnuplot": True},
    }
    if e["policy"] == "TAS":
        cfg = parse_config(doc)
        ports = ["A2->A1", "A1->RC"]
        gcls = derive_tas_gcls(cfg.topology, cfg.periodic_flows(), ports,
                               cfg.header_overhead, TAS_MARGIN)
        doc["ports"] = {p: {"policy": "TAS", "gcl": gcl_to_json(gcls[p])} for p in ports}
    else:
        doc["nodes"]["A2"]["policy"] = e["policy"]
        doc["nodes"]["A1"]["policy"] = e["policy"]
    if e["policy"] == "CBF":
        doc["cbf"] = {"credit_limit_bytes": 16384, "quantum_bytes": 512}
    return doc


def preset_names() -> list[str]:
    return [f"{exp}_{rate}" for exp in EXPERIMENTS for rate in RATES]


def write_presets(directory=PRESET_DIR) -> list[str]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in preset_names():
        exp, rate = name.split("_")
        path = directory / f"{name}.json"
        path.write_text(json.dumps(build_preset(exp, rate), indent=2) + "\n")
        written.append(str(path))
    return written


if __name__ == "__main__":
    for p in write_presets():
        print(p, file=sys.stderr)
