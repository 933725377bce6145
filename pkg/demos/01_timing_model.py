"""
The cut-through timing model
============================

A frame's delay from the sender's SFD to the receiver's SFD is a sum of
constants plus queuing. This walk-through builds the 100 Mbps testbed,
checks the simulator against the closed form and shows that frame length
does not matter on an idle path.
"""

from tsnsim import ClockModel, Engine, Network, propagation_delay, transmission_delay
from tsnsim.analytics import calibrate_timing, e2e_zero_queue
from tsnsim.experiments import load_config

# Solve the switch constants from the two no-load delays measured on the
# testbed: 3.83 us from A1 and 9.35 us from A2. Only d_p + d_out is
# identifiable, so half of it goes to each.
d_l = propagation_delay(2.0, 2e8)
timing = calibrate_timing(3830, 9350, d_l)
print("cable delay", d_l, "ns;", timing)

# The shipped preset uses those constants.
cfg = load_config("exp2_100m")
for src in ("A1", "A2"):
    path = cfg.topology.path_model(src, "RC")
    print(f"closed form {src} -> RC: {e2e_zero_queue(path)} ns")

# One frame per length on an empty network: the measured delay never changes,
# because every switch cuts through and both ends timestamp the SFD.
for wire_len in (64, 256, 1500):
    net = Network(cfg.topology, Engine(), ClockModel())
    net.measured.add("probe")
    net.inject(net.new_frame("probe", 0, 7, wire_len, wire_len, "A2", "RC"))
    net.engine.run_until(1_000_000)
    print(f"{wire_len:5d} B: delay {net.records[0].delay} ns "
          f"(its own serialisation would take {transmission_delay(wire_len, 100_000_000)} ns)")
