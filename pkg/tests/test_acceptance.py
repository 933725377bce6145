"""Acceptance criteria, each at its stated tolerance.

Every check records a line in the terminal summary (``criterion N: PASS``)
before asserting, so the report lists failures alongside passes.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from tsnsim import (ClockModel, Engine, Link, Network, Node, SwitchTiming, Topology,
                    summarize, transmission_delay)
from tsnsim.analytics import e2e_zero_queue, wc_lower_priority_blocking
from tsnsim.experiments import load_raw, parse_config, run_scenario
from tsnsim.experiments.config import without_load
from tsnsim.experiments.runner import apply_parameter, sweep
from tsnsim.network import BRIDGED, ENDPOINT, SWITCH
from tsnsim.shapers import TimeAwareShaper, gate_state, time_until_gate_close

US = 1000
RATES = {"100m": 100_000_000, "1g": 1_000_000_000}


def record(crit: int, check: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.append((crit, check, bool(ok), detail))
    print(f"criterion {crit} [{check}]: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


# -- 1. analytic bound values -------------------------------------------------

def test_c1_mtu_transmission_delays():
    a = transmission_delay(1500, 100_000_000)
    b = transmission_delay(1500, 1_000_000_000)
    assert record(1, "d_t(1500 B)", a == 120 * US and b == 12 * US,
                  f"100 Mbps {a} ns, 1 Gbps {b} ns")


# -- 2. oracle equivalence ----------------------------------------------------

def random_line(rng: random.Random) -> tuple[Topology, str, str]:
    n = rng.randint(1, 6)
    capacity = rng.choice([10_000_000, 100_000_000, 1_000_000_000, 2_500_000_000])
    speed = rng.choice([2e8, 1.9e8, 2.3e8])

    def timing():
        return SwitchTiming(rng.randint(0, 5000), rng.randint(0, 5000), rng.randint(0, 5000))

    if rng.random() < 0.5:
        src = Node("src", BRIDGED, timing())
    else:
        src = Node("src", ENDPOINT, SwitchTiming(d_out=rng.randint(0, 2000)))
    mids = [Node(f"sw{i}", rng.choice([SWITCH, BRIDGED]), timing()) for i in range(n)]
    nodes = [src, *mids, Node("dst")]
    links = [Link(a.name, b.name, capacity, rng.uniform(0, 150), speed)
             for a, b in zip(nodes, nodes[1:])]
    return Topology(nodes, links), "src", "dst"


def test_c2_single_frame_delay_equals_closed_form():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    mismatches = []
    for k in range(50):
        topo, src, dst = random_line(rng)
        net = Network(topo, Engine(), ClockModel())
        net.measured.add("f")
        wire = rng.randint(0, 1500)
        start = rng.randint(0, 10**6)
        net.engine.schedule(start, lambda: net.inject(
            net.new_frame("f", 0, rng.randint(0, 7), wire, wire, src, dst)))
        net.engine.run_until(10**9)
        got = net.records[0].delay
        want = e2e_zero_queue(topo.path_model(src, dst))
        if got != want:
            mismatches.append((k, got, want))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 1.0
    assert record(2, "50 random lines", ok,
                  f"{len(mismatches)} mismatches, {elapsed:.2f} s")


# -- 3. calibration reproduction ---------------------------------------------

@pytest.mark.parametrize("rate,k1,k2", [("100m", 3.83, 9.35), ("1g", 1.06, 2.40)])
def test_c3_no_load_means(rate, k1, k2):
    res = run_scenario(parse_config(without_load(load_raw(f"exp2_{rate}"))))
    a1 = res.stats("F_A1").mean / 1000
    a2 = res.stats("F_A2").mean / 1000
    ok = abs(a1 - k1) <= 0.05 and abs(a2 - k2) <= 0.05
    assert record(3, f"{rate} no-load ST/SP", ok,
                  f"A1 {a1:.3f} us (target {k1}), A2 {a2:.3f} us (target {k2})")


# -- 4. lower-priority bound tightness ---------------------------------------

@pytest.fixture(scope="module", params=["100m", "1g"])
def phase_sweep(request):
    rate = request.param
    doc = load_raw(f"exp2_{rate}")
    doc["duration_s"] = 0.004
    doc["drain_s"] = 0.001
    t0 = time.perf_counter()
    points = sweep(doc, "phase:F_S", range(0, 1_000_000, 1000))
    elapsed = time.perf_counter() - t0
    cfg = parse_config(doc)
    return rate, cfg, points, elapsed


def test_c4_a1_max_is_k1_plus_mtu_time(phase_sweep):
    rate, cfg, points, elapsed = phase_sweep
    path = cfg.topology.path_model("A1", "RC")
    target = e2e_zero_queue(path) + wc_lower_priority_blocking(path, cfg.mtu)
    got = max(p.stats["F_A1"].max for p in points)
    ok = got == target and elapsed < 60
    assert record(4, f"{rate} A1 max = K1 + d_t(MTU)", ok,
                  f"{got} ns vs {target} ns, sweep {elapsed:.1f} s")


def a2_bound(cfg) -> int:
    """K2 + two MTU blockings + one same-priority 256 B frame (F_A1 at A1)."""
    path = cfg.topology.path_model("A2", "RC")
    cap = next(iter(cfg.topology.capacities()))
    return (e2e_zero_queue(path) + wc_lower_priority_blocking(path, cfg.mtu)
            + transmission_delay(256, cap))


def test_c4_a2_max_within_bound(phase_sweep):
    rate, cfg, points, _ = phase_sweep
    bound = a2_bound(cfg)
    got = max(p.stats["F_A2"].max for p in points)
    assert record(4, f"{rate} A2 max <= K2 + 2 d_t(MTU) + d_t(256 B)", got <= bound,
                  f"{got} ns <= {bound} ns")


def test_c4_a2_sweep_reaches_99_percent_of_bound(phase_sweep):
    rate, cfg, points, _ = phase_sweep
    bound = a2_bound(cfg)
    got = max(p.stats["F_A2"].max for p in points)
    share = got / bound
    assert record(4, f"{rate} A2 sweep max >= 99% of bound", share >= 0.99,
                  f"{got} ns = {100 * share:.1f}% of {bound} ns")


# -- 5. TAS isolation ------------------------------------------------------------

@pytest.mark.parametrize("rate", ["100m", "1g"])
def test_c5_tas_perfect_clocks_zero_spread(rate):
    t0 = time.perf_counter()
    res = run_scenario(parse_config(load_raw(f"exp3_{rate}")))
    elapsed = time.perf_counter() - t0
    spans = {r.flow: (r.stats.count, r.stats.max_minus_min) for r in res.rows}
    ok = all(n >= 10_000 and span == 0 for n, span in spans.values())
    assert record(5, f"{rate} full load, perfect clocks: Max-Min = 0", ok,
                  f"{spans}, {elapsed:.1f} s")


@pytest.mark.parametrize("rate", ["100m", "1g"])
def test_c5_tas_jitter_150ns_spread(rate):
    doc = apply_parameter(load_raw(f"exp3_{rate}"), "jitter", 150)
    t0 = time.perf_counter()
    res = run_scenario(parse_config(doc))
    elapsed = time.perf_counter() - t0
    spans = {r.flow: (r.stats.count, r.stats.max_minus_min) for r in res.rows}
    ok = all(n >= 10_000 and span <= 600 for n, span in spans.values())
    assert record(5, f"{rate} full load, jitter 150 ns on every node: Max-Min <= 0.6 us", ok,
                  f"{spans}, {elapsed:.1f} s")


# -- 6. CBF unboundedness ----------------------------------------------------------

@pytest.fixture(scope="module")
def cbf_runs():
    base = load_raw("exp1_100m")
    no_load = run_scenario(parse_config(without_load(base)))
    loaded = {}
    for mbps in (90, 95, 98, 99):
        res = run_scenario(parse_config(apply_parameter(base, "rate:F_S", mbps * 1_000_000)))
        loaded[mbps] = (res.stats("F_A1").max, sum(res.drops.values()))
    return no_load.stats("F_A1").mean, loaded


def test_c6_cbf_max_at_90m_is_ten_times_no_load(cbf_runs):
    mean0, loaded = cbf_runs
    worst = loaded[90][0]
    assert record(6, "A1 max at 90 Mbps >= 10x no-load mean", worst >= 10 * mean0,
                  f"{worst / 1000:.2f} us vs no-load {mean0 / 1000:.2f} us "
                  f"({worst / mean0:.1f}x)")


def test_c6_cbf_max_grows_towards_capacity(cbf_runs):
    _, loaded = cbf_runs
    maxes = [loaded[m][0] for m in sorted(loaded)]
    ok = maxes == sorted(maxes) and maxes[-1] > maxes[0]
    detail = ", ".join(f"{m} Mbps {loaded[m][0] / 1000:.1f} us" for m in sorted(loaded))
    assert record(6, "A1 max grows as load -> capacity", ok, detail)


def test_c6_cbf_drops_near_capacity(cbf_runs):
    _, loaded = cbf_runs
    drops = {m: loaded[m][1] for m in (98, 99)}
    assert record(6, "drops > 0 at >= 98 Mbps", all(d > 0 for d in drops.values()),
                  f"drops {drops}, max {loaded[98][0] / 1e6:.2f} ms at 98 Mbps")


# -- 7. invariant suites ---------------------------------------------------------

def random_scenario(seed: int) -> dict:
    """One of the presets with random phases, load, queue size and clock error."""
    rng = random.Random(seed)
    exp = ("exp1", "exp2", "exp3")[seed % 3]
    rate = rng.choice(list(RATES))
    doc = load_raw(f"{exp}_{rate}")
    doc["seed"] = seed
    doc["duration_s"] = 0.2 if rate == "100m" else 0.04
    doc["drain_s"] = 0.0005
    doc["queue_capacity_bytes"] = rng.choice([3 * 1024, 16 * 1024, 512 * 1024])
    doc["clocks"] = {"*": {"offset_ns": 0, "jitter_ns": rng.choice([0, 50, 150, 400])},
                     "A1": {"offset_ns": rng.randint(-300, 300)}}
    for flow in doc["flows"]:
        flow["phase_ns"] = rng.randrange(0, 1_000_000)
        if flow["type"] == "saturating":
            flow["rate_bps"] = rng.randint(50, 100) * RATES[rate] // 100
    return doc


SEEDS = list(range(12))


def tx_trace(net) -> dict:
    return {name: [(r.start, r.end, r.queue, r.local_start, r.frame_id) for r in p.tx_log]
            for name, p in net.ports.items()}


@pytest.fixture(scope="module")
def invariant_runs():
    t0 = time.perf_counter()
    runs = []
    for seed in SEEDS:
        doc = random_scenario(seed)
        first = run_scenario(parse_config(doc), record_tx=True)
        second = run_scenario(parse_config(doc), record_tx=True)
        runs.append((seed, doc, first, second))
    return runs, time.perf_counter() - t0


def test_c7_gate_safety(invariant_runs):
    runs, _ = invariant_runs
    violations = checked = 0
    for _, _, res, _ in runs:
        for port in res.network.ports.values():
            if not isinstance(port.policy, TimeAwareShaper):
                continue
            gcl = port.policy.gcl
            for r in port.tx_log:
                checked += 1
                if not gate_state(gcl, r.local_start) >> r.queue & 1:
                    violations += 1
                elif time_until_gate_close(gcl, r.queue, r.local_start) < r.end - r.start:
                    violations += 1
    n_tas = sum(1 for _, d, _, _ in runs if "ports" in d)
    assert record(7, "gate safety", violations == 0 and n_tas > 0 and checked > 0,
                  f"{checked} TAS transmissions in {n_tas} TAS runs, {violations} violations")


def test_c7_port_serialization(invariant_runs):
    runs, _ = invariant_runs
    overlaps = checked = 0
    for _, _, res, _ in runs:
        for port in res.network.ports.values():
            log = port.tx_log
            checked += len(log)
            overlaps += sum(1 for a, b in zip(log, log[1:]) if b.start < a.end)
    assert record(7, "port serialization", overlaps == 0 and checked > 0,
                  f"{checked} transmissions, {overlaps} overlaps")


def test_c7_frame_conservation(invariant_runs):
    runs, _ = invariant_runs
    bad = []
    drops = 0
    for seed, _, res, _ in runs:
        drops += sum(res.drops.values())
        for flow, c in res.counters.items():
            if c["generated"] != c["delivered"] + c["dropped"] + res.in_flight.get(flow, 0):
                bad.append((seed, flow))
    assert record(7, "frame conservation", not bad,
                  f"{len(runs)} seeds, {drops} drops in total, {len(bad)} violations")


def test_c7_determinism(invariant_runs):
    runs, elapsed = invariant_runs
    differing = [seed for seed, _, a, b in runs
                 if a.records_csv() != b.records_csv() or a.summary_csv() != b.summary_csv()
                 or tx_trace(a.network) != tx_trace(b.network)]
    ok = not differing and elapsed < 60
    assert record(7, "bit-for-bit determinism", ok,
                  f"{len(runs)} seeds, differing {differing}, suite {elapsed:.1f} s")


# -- 8. statistics correctness --------------------------------------------------------

def reference_summary(delays: list[int]) -> tuple:
    n = len(delays)
    mean = Fraction(sum(delays), n)
    var = sum((Fraction(d) - mean) ** 2 for d in delays) / n
    return min(delays), max(delays), mean, var


def test_c8_summarize_matches_reference():
    rng = random.Random(8)
    worst_mean = worst_std = 0.0
    exact = True
    for trial in range(20):
        delays = [rng.randint(0, 5_000_000) for _ in range(1000)]
        s = summarize(delays)
        lo, hi, mean, var = reference_summary(delays)
        exact &= (s.min, s.max, s.max_minus_min) == (lo, hi, hi - lo)
        exact &= round(s.mean) == round(mean) and round(s.std ** 2) == round(var)
        worst_mean = max(worst_mean, abs(s.mean - float(mean)))
        worst_std = max(worst_std, abs(s.std - float(var) ** 0.5))
    ok = exact and worst_mean < 0.5 and worst_std < 0.5
    assert record(8, "summarize vs reference, 20 x 1000 samples", ok,
                  f"max |mean err| {worst_mean:.2e} ns, max |std err| {worst_std:.2e} ns")
