"""
Isolation with the time-aware shaper
====================================

Both actuator switches open the scheduled-traffic gate only around the
expected arrival of the control frames, and close it to best effort early
enough that no bulk frame is still on the wire. The control frames then see
the same delay with or without load; only clock error adds spread.
"""

from tsnsim.experiments import load_raw, parse_config, run_scenario, without_load
from tsnsim.experiments.runner import apply_parameter, render_table

rows = []
for rate in ("100m", "1g"):
    doc = load_raw(f"exp3_{rate}")
    doc["duration_s"] = 1
    for variant in (without_load(doc), doc, apply_parameter(doc, "jitter", 150)):
        res = run_scenario(parse_config(variant))
        rows += [r.as_dict() for r in res.rows]

# The last group of each rate has 150 ns of clock error on every node.
print(render_table(rows))

# The derived gate schedule of A1's egress port:
gcl = parse_config(load_raw("exp3_100m")).port_policies["A1->RC"][1]
for e in gcl.entries:
    print(f"{e.duration:8d} ns  gates 0x{e.gate_state:02x}")
