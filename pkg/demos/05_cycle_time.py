"""
Cycle time of a line of devices
===============================

A rough lower bound on the control cycle: every device sends one input and
receives one output frame over the controller's link, and the farthest
device is n hops away.
"""

from tsnsim.analytics import cycle_time_estimate

per_hop = 1060  # one 1 Gbps hop of the calibrated testbed
for n in (1, 2, 4, 8, 16, 32):
    bare = cycle_time_estimate(n, 256, 1_000_000_000)
    full = cycle_time_estimate(n, 256, 1_000_000_000, per_hop)
    print(f"{n:3d} devices: {bare / 1000:7.3f} us serialised, {full / 1000:7.3f} us with hop constants")
