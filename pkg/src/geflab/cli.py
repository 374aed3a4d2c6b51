"""Command-line front end: ``python -m geflab <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .complex_gaussian import derive_trial_rng
from .errors import GefError
from .experiments import (
    EVENT_STREAMS,
    default_workers,
    estimate_event_probability,
    fit_decay_exponent,
    log_prob_omega,
    sample_conditional_omega,
    verify_omega_chain,
)
from .gef_core import sample_gef
from .potential import jensen_residual, make_probe, probe_deviation
from .zeros import HoleTag, classify_hole, find_zeros

ESTIMATE_FIELDS = ["event", "r", "delta", "trials", "successes", "uncertain", "p_hat", "p_low", "p_high",
                   "ci_low", "ci_high", "log_p_hat", "seed"]
FIT_FIELDS = ["event", "window_min_r", "window_max_r", "amplitude", "exponent", "residual_rms"]
HOLES_FIELDS = ESTIMATE_FIELDS + FIT_FIELDS[1:]
OMEGA_FIELDS = ["r", "log_prob_omega", "conditional_samples", "holes_certified"]
PROBE_FIELDS = ["delta", "r", "kappa", "n_discs", "max_deviation", "deviation_over_sqrt_delta"]
JENSEN_FIELDS = ["r", "samples", "seed", "max_residual", "mean_residual"]

COMMANDS = ("holes", "counts", "logm", "circlemean", "jensen", "omega", "probe", "fit", "sample")
DEFAULT_TRIALS = {"holes": 10_000, "counts": 10_000, "logm": 10_000, "circlemean": 10_000,
                  "jensen": 100, "omega": 100, "probe": 100, "sample": 1}
DEFAULT_PROBE_DELTAS = "0.25,0.09,0.04,0.01,0.0025"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    r_values: list
    delta: list | None
    trials: int
    master_seed: int
    output_format: str
    output_path: str | None
    workers: int


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _float_list(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals or any(not math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geflab", description="Gaussian entire function zero and hole-probability experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--r", type=_float_list, default=None, help="comma-separated radii")
        p.add_argument("--delta", type=_float_list, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None)
        p.add_argument("--workers", type=int, default=None)
        if name == "fit":
            p.add_argument("--input", required=True, help="CSV with r and p_hat (or neg_log_p) columns")
            p.add_argument("--event", default=None, help="only fit rows with this event name")
        if name == "sample":
            p.add_argument("--trial", type=int, default=0)
            p.add_argument("--dump-zeros", action="store_true")
    return parser


def _config(ns) -> RunConfig:
    trials = ns.trials if ns.trials is not None else DEFAULT_TRIALS.get(ns.command, 1)
    if ns.command != "fit" and trials < 1:
        raise UsageError("--trials must be at least 1")
    if not 0 <= ns.seed < 2**64:
        raise UsageError("--seed must fit in 64 bits")
    r_values = ns.r if ns.r is not None else ([1.0] if ns.command in ("probe", "sample", "omega", "jensen") else None)
    if ns.command != "fit" and not r_values:
        raise UsageError("--r is required")
    if r_values and any(r < 0 for r in r_values):
        raise UsageError("radii must be nonnegative")
    # the environment variable wins over the flag
    workers = default_workers() if ns.workers is None or os.environ.get("GEFLAB_WORKERS") else ns.workers
    if workers < 1:
        raise UsageError("--workers must be at least 1")
    return RunConfig(ns.command, r_values or [], ns.delta, trials, ns.seed, ns.format, ns.output, workers)


def _one_delta(cfg: RunConfig, default: float = 0.25) -> float:
    if cfg.delta is None:
        return default
    if len(cfg.delta) != 1:
        raise UsageError("this command takes a single --delta")
    return cfg.delta[0]


def _estimate_rows(cfg: RunConfig, events) -> list:
    rows = []
    for r in cfg.r_values:
        for event, delta in events:
            est = estimate_event_probability(event, r, delta, cfg.trials, cfg.master_seed, cfg.workers)
            rows.append(est.as_row())
    return rows


def cmd_holes(cfg: RunConfig):
    rows = _estimate_rows(cfg, [("hole", None)])
    pts = [(row["r"], -row["log_p_hat"]) for row in rows
           if row["log_p_hat"] is not None and 0 < row["p_hat"] < 1 and row["r"] > 0]
    if len(pts) >= 3:
        rows.append(fit_decay_exponent(sorted(pts)).as_row("fit"))
    return HOLES_FIELDS, rows


def cmd_counts(cfg):
    return ESTIMATE_FIELDS, _estimate_rows(cfg, [("count_deviation", _one_delta(cfg))])


def cmd_logm(cfg):
    return ESTIMATE_FIELDS, _estimate_rows(cfg, [("logM_deviation", _one_delta(cfg))])


def cmd_circlemean(cfg):
    return ESTIMATE_FIELDS, _estimate_rows(cfg, [("circle_mean_low", _one_delta(cfg)), ("abs_mean_high", None)])


def cmd_jensen(cfg):
    rows = []
    for r in cfg.r_values:
        res = [jensen_residual(sample_gef(r, derive_trial_rng(cfg.master_seed, EVENT_STREAMS["jensen"], i)), r)
               for i in range(cfg.trials)]
        rows.append({"r": r, "samples": cfg.trials, "seed": cfg.master_seed,
                     "max_residual": max(res), "mean_residual": float(np.mean(res))})
    return JENSEN_FIELDS, rows


def cmd_omega(cfg):
    rows = []
    for r in cfg.r_values:
        certified = 0
        for i in range(cfg.trials):
            gef = sample_conditional_omega(r, derive_trial_rng(cfg.master_seed, EVENT_STREAMS["omega"], i))
            hole = classify_hole(gef, r).tag is HoleTag.HOLE
            certified += hole and verify_omega_chain(gef, r).chain_holds
        rows.append({"r": r, "log_prob_omega": log_prob_omega(r), "conditional_samples": cfg.trials,
                     "holes_certified": certified})
    return OMEGA_FIELDS, rows


def cmd_probe(cfg):
    deltas = cfg.delta if cfg.delta is not None else _float_list(DEFAULT_PROBE_DELTAS)
    rows = []
    for r in cfg.r_values:
        for di, delta in enumerate(deltas):
            worst = 0.0
            for i in range(cfg.trials):
                probe = make_probe(delta, r, "random", derive_trial_rng(cfg.master_seed, 100 + di, i))
                worst = max(worst, probe_deviation(probe))
            probe = make_probe(delta, r, "center")
            rows.append({"delta": delta, "r": r, "kappa": probe.kappa, "n_discs": probe.n_discs,
                         "max_deviation": worst, "deviation_over_sqrt_delta": worst / math.sqrt(delta)})
    return PROBE_FIELDS, rows


def _read_fit_points(path: str, event: str | None) -> list:
    pts = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if event is not None and row.get("event") != event:
                continue
            if not row.get("r"):
                continue
            r = float(row["r"])
            if row.get("neg_log_p"):
                v = float(row["neg_log_p"])
            elif row.get("log_p_hat"):
                v = -float(row["log_p_hat"])
            else:
                continue
            if r > 0 and v > 0:
                pts.append((r, v))
    return sorted(pts)


def cmd_fit(cfg, ns):
    fit = fit_decay_exponent(_read_fit_points(ns.input, ns.event))
    return FIT_FIELDS, [fit.as_row(ns.event or "fit")]


def cmd_sample(cfg, ns):
    r = cfg.r_values[0]
    gef = sample_gef(r, derive_trial_rng(cfg.master_seed, 0, ns.trial))
    if ns.dump_zeros:
        return {"gef": gef.to_dict(), "zeros": find_zeros(gef, r).to_dict()}
    return gef.to_dict()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(fields, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{f: row.get(f) for f in fields} for row in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row.get(f)) for f in fields])
    return buf.getvalue()


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = build_parser().parse_args(argv)
        cfg = _config(ns)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if cfg.command == "sample":
            text = json.dumps(cmd_sample(cfg, ns), indent=1) + "\n"
        else:
            if cfg.command == "fit":
                fields, rows = cmd_fit(cfg, ns)
            else:
                fields, rows = globals()[f"cmd_{cfg.command}"](cfg)
            text = render(fields, rows, cfg.output_format)
    except UsageError as exc:
        sys.stderr.write(f"geflab: error: {exc}\n")
        return 2
    except (GefError, OSError, ValueError) as exc:
        sys.stderr.write(f"geflab: {type(exc).__name__}: {exc}\n")
        return 1
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())
