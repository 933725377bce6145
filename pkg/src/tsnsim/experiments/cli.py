"""Command line front end: ``tsnsim {validate,run,sweep,calibrate,report}``.

Exit status is 0 on success, 2 when a configuration fails validation and 1
on any other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..analytics import calibrate_timing
from ..network import propagation_delay
from .config import ConfigError, load_raw, parse_config, without_load
from .presets import RATES, preset_names
from .runner import (render_table, report, run_scenario, sweep, sweep_csv,
                     sweep_extrema)

log = logging.getLogger("tsnsim")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _overrides(doc: dict, args) -> dict:
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "duration", None) is not None:
        doc["duration_s"] = args.duration
    return doc


def parse_range(text: str) -> list[int]:
    """``start:stop:step`` (stop exclusive) or a comma separated list."""
    if ":" in text:
        parts = [int(float(p)) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError("range must be start:stop:step with step > 0")
        return list(range(*parts))
    return [int(float(v)) for v in text.split(",") if v.strip()]


def cmd_validate(args) -> int:
    cfg = parse_config(load_raw(args.config))
    print(f"{cfg.name}: ok ({len(cfg.topology.nodes)} nodes, {len(cfg.flows)} flows, "
          f"{len(cfg.port_policies)} configured ports)")
    return EXIT_OK


def cmd_run(args) -> int:
    doc = _overrides(load_raw(args.config), args)
    if args.no_load:
        doc = without_load(doc)
    cfg = parse_config(doc)
    res = run_scenario(cfg)
    out = args.out or doc.get("output", {}).get("dir")
    if out:
        for p in res.write(out, gnuplot=doc.get("output", {}).get("gnuplot", False)):
            log.info("wrote %s", p)
    sys.stdout.write(render_table([r.as_dict() for r in res.rows]))
    dropped = {p: n for p, n in res.drops.items() if n}
    if dropped:
        print("drops: " + ", ".join(f"{p}={n}" for p, n in sorted(dropped.items())))
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _overrides(load_raw(args.config), args)
    parse_config(doc)
    points = sweep(doc, args.param, args.values, parallel=args.parallel)
    text = sweep_csv(points, args.param)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
    else:
        sys.stdout.write(text)
    for flow, (value, worst) in sorted(sweep_extrema(points).items()):
        print(f"# {flow}: max delay {worst / 1000:.3f} us at {args.param}={value}",
              file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    d_l = propagation_delay(args.length, args.speed)
    timing = calibrate_timing(round(args.k1 * 1000), round(args.k2 * 1000), d_l, args.share)
    print(json.dumps({"d_in_ns": timing.d_in, "d_p_ns": timing.d_p, "d_out_ns": timing.d_out,
                      "d_l_ns": d_l}, indent=2))
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out) if args.out else None
    for rate in args.rates:
        docs = [_overrides(load_raw(f"{exp}_{rate}"), args) for exp in ("exp1", "exp2", "exp3")]
        rows = report(docs, parallel=args.parallel)
        cap = RATES[rate]["capacity"]
        title = f"Delay results, link capacity {cap // 1_000_000} Mbps"
        text = f"### {title}\n\n" + render_table(rows)
        print(text)
        if out:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"table_{rate}.md").write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsnsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True,
                            help=f"scenario JSON or preset name ({', '.join(preset_names())})")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--duration", type=float, help="run duration in seconds")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--parallel", type=int, default=1)

    sp = sub.add_parser("validate", help="check a scenario file")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("run", help="run one scenario")
    common(sp)
    sp.add_argument("--no-load", action="store_true", help="drop the saturating flows")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a scenario over a parameter range")
    common(sp)
    sp.add_argument("--param", required=True,
                    help="phase:<flow> | rate:<flow> | payload:<flow> | jitter[:<node>]")
    sp.add_argument("--values", required=True, type=parse_range,
                    help="start:stop:step or v1,v2,...")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("calibrate", help="solve switch constants from no-load K1/K2")
    sp.add_argument("--k1", type=float, required=True, help="A1 no-load delay in us")
    sp.add_argument("--k2", type=float, required=True, help="A2 no-load delay in us")
    sp.add_argument("--length", type=float, default=2.0, help="cable length in m")
    sp.add_argument("--speed", type=float, default=2e8, help="propagation speed in m/s")
    sp.add_argument("--share", type=float, default=0.5, help="processing share of d_p + d_out")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("report", help="regenerate the delay tables from the presets")
    common(sp, config=False)
    sp.add_argument("--rates", nargs="+", choices=sorted(RATES), default=["100m", "1g"])
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
