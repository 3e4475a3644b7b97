"""Command-line entry point.

Subcommands: run, simulate, monitor, plot, selftest. See ``--help``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import loops, plots, stl
from .config import MODES, ExperimentConfig, load_config
from .idm import make_controller
from .model import simulate_action
from .sim import ScenarioParams, read_trace_csv, rollout, write_trace_csv

log = logging.getLogger("acc_falsify")


def _load_cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    d = cfg.to_dict()
    for key in ("mode", "episodes", "seed", "out"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    return ExperimentConfig.from_dict(d)


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    log.info("running %s for %d episode(s), seed %d", cfg.mode, cfg.episodes, cfg.seed)
    hist = loops.run(cfg)
    loops.write_history(hist, cfg.out)
    ep = [r.episode for r in hist.records]
    with open(os.path.join(cfg.out, "learning_curve.svg"), "w") as fh:
        fh.write(plots.emit_learning_curve([(cfg.mode, ep, hist.rewards())]))
    best = hist.best
    tr = simulate_action(best.action, cfg.setup, use_friction=True).trace_hat
    write_trace_csv(tr, os.path.join(cfg.out, "best_trajectory.csv"))
    with open(os.path.join(cfg.out, "best_trajectory.svg"), "w") as fh:
        fh.write(plots.emit_trajectory(tr, title=f"best scenario ({cfg.mode})"))
    print(f"best episode {best.episode}: reward {best.reward:.6g}, rho {best.rho:.6g}, "
          f"safety margin {best.safety_margin:.6g}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    with open(args.scenario) as fh:
        try:
            p = ScenarioParams.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.scenario}: invalid JSON ({exc})") from exc
    tr = rollout(p, make_controller(cfg.idm), cfg.sim, use_friction=not args.no_friction)
    os.makedirs(args.out, exist_ok=True)
    write_trace_csv(tr, os.path.join(args.out, "trajectory.csv"))
    with open(os.path.join(args.out, "trajectory.svg"), "w") as fh:
        fh.write(plots.emit_trajectory(tr))
    rho = stl.robustness(cfg.setup.spec, stl.SignalTrace(tr.signals(), tr.ts))
    print(f"rho {rho!r} collided {tr.collided}")
    return 0


def _read_signals(path) -> stl.SignalTrace:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no samples")
    sig = {}
    for k in rows[0]:
        try:
            sig[k] = np.array([float(r[k]) for r in rows])
        except (TypeError, ValueError):
            raise ValueError(f"{path}: column {k!r} is not numeric") from None
    if "gap" in sig and "v_h" in sig:
        tr = read_trace_csv(path)
        sig = {**sig, **tr.signals()}
    ts = float(sig["t"][1] - sig["t"][0]) if "t" in sig and len(rows) > 1 else 1.0
    return stl.SignalTrace(sig, ts)


def cmd_monitor(args) -> int:
    if args.acc:
        f = _load_cfg(args).setup.spec
    elif args.formula:
        with open(args.formula) as fh:
            f = stl.parse(fh.read())
    else:
        raise ValueError("give --formula FILE or --acc")
    w = _read_signals(args.trace)
    missing = stl.signal_names(f) - set(w.signals)
    if missing:
        raise ValueError(f"trace lacks signal(s) {sorted(missing)}")
    print(stl.robustness(f, w, args.t))
    return 0


def cmd_plot(args) -> int:
    series = []
    for path in [args.episodes, *(args.overlay or [])]:
        ep, r = loops.read_episode_rewards(path)
        label = os.path.basename(os.path.dirname(os.path.abspath(path))) or path
        series.append((label, ep, r))
    svg = plots.emit_learning_curve(series, log_y=not args.linear)
    with open(args.out, "w") as fh:
        fh.write(svg)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(quick=not args.full) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acc-falsify", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run a falsification experiment")
    p.add_argument("--config")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="simulate one scenario JSON on the SUT")
    p.add_argument("scenario")
    p.add_argument("--config")
    p.add_argument("--out", default=".")
    p.add_argument("--no-friction", action="store_true", help="use the prior-knowledge model dynamics")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monitor", help="robustness of a formula on a trace CSV")
    p.add_argument("trace")
    p.add_argument("--formula")
    p.add_argument("--acc", action="store_true", help="use the built-in ACC requirement")
    p.add_argument("--config")
    p.add_argument("-t", type=int, default=0, help="sample index to evaluate at")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("plot", help="learning curve SVG from episodes.csv")
    p.add_argument("episodes")
    p.add_argument("--overlay", nargs="*")
    p.add_argument("--out", default="learning_curve.svg")
    p.add_argument("--linear", action="store_true", help="linear instead of log10 reward axis")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("selftest", help="run the oracle and gradient checks")
    p.add_argument("--full", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
