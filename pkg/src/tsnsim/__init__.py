"""Deterministic simulation of switched Ethernet with TSN transmission selection.

Submodules:

* :mod:`tsnsim.engine`: event loop and per-node clock error
* :mod:`tsnsim.network`: topology, frames, cut-through ports
* :mod:`tsnsim.shapers`: strict priority, CBF and time-aware shaper
* :mod:`tsnsim.traffic`: periodic and token-bucket sources
* :mod:`tsnsim.analytics`: closed-form delays, bounds, statistics
* :mod:`tsnsim.experiments`: scenario files, presets, sweeps, CLI
"""

from .analytics import (StatsSummary, cycle_time_estimate, e2e_zero_queue, summarize,
                        wc_lower_priority_blocking, wc_same_priority_blocking)
from .engine import MS, NS, S, US, ClockModel, Engine, SchedulingError
from .network import (Frame, LatencyRecord, Link, Network, Node, PathModel, SwitchTiming,
                      Topology, propagation_delay, transmission_delay)
from .shapers import (FOREVER, CreditBasedFifo, GateControlList, GateEntry, StrictPriority,
                      TimeAwareShaper, cbf_select, gate_state, sp_select, tas_select,
                      time_until_gate_close)
from .traffic import PeriodicFlowSpec, SaturatingFlowSpec, emit_periodic, emit_saturating

__all__ = [
    "cbf_select",
    "ClockModel",
    "CreditBasedFifo",
    "cycle_time_estimate",
    "e2e_zero_queue",
    "emit_periodic",
    "emit_saturating",
    "Engine",
    "FOREVER",
    "Frame",
    "gate_state",
    "GateControlList",
    "GateEntry",
    "LatencyRecord",
    "Link",
    "MS",
    "Network",
    "Node",
    "NS",
    "PathModel",
    "PeriodicFlowSpec",
    "propagation_delay",
    "S",
    "SaturatingFlowSpec",
    "SchedulingError",
    "sp_select",
    "StatsSummary",
    "StrictPriority",
    "summarize",
    "SwitchTiming",
    "tas_select",
    "time_until_gate_close",
    "TimeAwareShaper",
    "Topology",
    "transmission_delay",
    "US",
    "wc_lower_priority_blocking",
    "wc_same_priority_blocking",
]

__version__ = "0.1.0"
