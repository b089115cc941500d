"""Command-line front end.

Subcommands: fit, detect, multi, distributed, simulate, curve.  Exit
codes let shell pipelines branch on detection: 0 no alarm, 10 alarm
raised, 1 error.

Input data formats (documented in the README):
* single stream: CSV with (index, value) rows, or one value per row;
* multi-stream: wide CSV with a tick index column followed by one value
  column per stream;
* laws: JSON {"period": T, "family": ..., "params": [...]}, candidate
  banks as an array of laws, stream banks as an array of
  {"pre": law, "post": law} pairs.

A header row is skipped if its cells are not numeric.  Report paths get
a rendered PNG next to the CSV unless --no-figure is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .detect import run_detector, threshold_for_mtfa
from .distributed import run_bank
from .learn import BatchSpec, expand_to_law, fit_step_params, scale_post
from .model import Gaussian, IpidLaw, law_from_dict, load_law, save_law
from .multi import run_multi
from .report import (
    plot_bank_trajectory,
    plot_curve,
    plot_multi_trajectory,
    plot_trajectory,
    write_bank_trajectory,
    write_curve,
    write_multi_trajectory,
    write_trajectory,
)
from .sim import generate, tradeoff_curve

__all__ = ["main"]

EXIT_NO_ALARM = 0
EXIT_ERROR = 1
EXIT_ALARM = 10

# demo change: unit shift in phase 1, half shift in phase 2, I = 0.3125
_DEMO_PRE = IpidLaw((Gaussian(0.0, 1.0), Gaussian(0.0, 1.0)))
_DEMO_POST = IpidLaw((Gaussian(1.0, 1.0), Gaussian(0.5, 1.0)))


def _open_input(path: str):
    if path == "-":
        return sys.stdin
    return open(path, newline="")


def _numeric_row(cells: list[str]) -> bool:
    try:
        for cell in cells:
            float(cell)
    except ValueError:
        return False
    return bool(cells)


def _read_rows(path: str) -> list[tuple[int, list[str]]]:
    """Non-empty CSV rows as (1-based file row number, cells)."""
    fh = _open_input(path)
    try:
        rows = [(i, [c.strip() for c in row])
                for i, row in enumerate(csv.reader(fh), start=1)
                if any(c.strip() for c in row)]
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if not _numeric_row(rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no data rows after the header")
    return rows


def _cell(path: str, rownum: int, cells: list[str], col: int) -> float:
    try:
        return float(cells[col])
    except ValueError:
        raise ValueError(
            f"{path}: row {rownum}: could not parse {cells[col]!r} as a number"
        ) from None


def _read_single_with_rows(path: str) -> tuple[list[int], np.ndarray]:
    rows = _read_rows(path)
    width = len(rows[0][1])
    if width not in (1, 2):
        raise ValueError(f"{path}: expected 1 or 2 columns, got {width}")
    col = width - 1
    out = np.empty(len(rows))
    rownums = []
    for k, (rownum, cells) in enumerate(rows):
        if len(cells) != width:
            raise ValueError(f"{path}: row {rownum}: expected {width} columns, got {len(cells)}")
        out[k] = _cell(path, rownum, cells, col)
        rownums.append(rownum)
    return rownums, out


def read_single_csv(path: str) -> np.ndarray:
    """One stream: (index, value) rows, or a bare value column."""
    return _read_single_with_rows(path)[1]


def read_wide_csv(path: str, streams: int) -> np.ndarray:
    """Multi-stream ticks: a tick index column then one column per stream."""
    rows = _read_rows(path)
    width = streams + 1
    out = np.empty((len(rows), streams))
    for k, (rownum, cells) in enumerate(rows):
        if len(cells) != width:
            raise ValueError(
                f"{path}: row {rownum}: expected {width} columns "
                f"(tick + {streams} streams), got {len(cells)}"
            )
        for j in range(streams):
            out[k, j] = _cell(path, rownum, cells, j + 1)
    return out


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def load_candidate_bank(path: str) -> list[IpidLaw]:
    doc = _load_json(path)
    if not isinstance(doc, list) or not doc:
        raise ValueError(f"{path}: expected a non-empty JSON array of laws")
    return [law_from_dict(d) for d in doc]


def load_stream_bank(path: str) -> list[tuple[IpidLaw, IpidLaw]]:
    doc = _load_json(path)
    if not isinstance(doc, list) or not doc:
        raise ValueError(f"{path}: expected a non-empty JSON array of pre/post pairs")
    pairs = []
    for k, entry in enumerate(doc, start=1):
        if not isinstance(entry, dict) or "pre" not in entry or "post" not in entry:
            raise ValueError(f"{path}: stream {k}: expected an object with pre and post laws")
        pairs.append((law_from_dict(entry["pre"]), law_from_dict(entry["post"])))
    return pairs


def _threshold_beta(args) -> tuple[float, float]:
    """Resolve the (A, beta) pair from whichever flag was given."""
    if args.threshold is not None:
        return args.threshold, math.exp(args.threshold)
    return threshold_for_mtfa(args.beta), args.beta


def _figure_path(out: str) -> str:
    return os.path.splitext(out)[0] + ".png"


def _parse_lengths(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"could not parse batch lengths {text!r}") from None


def _parse_thresholds(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"could not parse threshold list {text!r}") from None


def _demo_laws(args) -> tuple[IpidLaw, IpidLaw]:
    if (args.pre is None) != (args.post is None):
        raise ValueError("give both --pre and --post, or neither for the demo config")
    if args.pre is None:
        return _DEMO_PRE, _DEMO_POST
    return load_law(args.pre), load_law(args.post)


def cmd_fit(args) -> int:
    rownums, samples = _read_single_with_rows(args.data)
    if args.family == "poisson":
        bad = np.flatnonzero((samples < 0) | (samples != np.floor(samples)))
        if bad.size:
            k = int(bad[0])
            raise ValueError(
                f"{args.data}: row {rownums[k]}: expected a nonnegative "
                f"integer count, got {float(samples[k])!r}"
            )
    if args.batches is None:
        spec = BatchSpec.from_lengths(args.period, [1] * args.period)
    else:
        spec = BatchSpec.from_lengths(args.period, _parse_lengths(args.batches))
    params = fit_step_params(samples, spec, args.family,
                             fit_variance=args.fit_variance,
                             rate_floor=args.rate_floor)
    law = expand_to_law(params)
    save_law(law, args.out)
    print(f"wrote {args.out}: period {law.period}, {spec.n_batches} batches, "
          f"family {law.family}")
    if args.post_scale is not None:
        post_out = args.post_out or _derived_post_path(args.out)
        save_law(scale_post(law, args.post_scale), post_out)
        print(f"wrote {post_out}: post-change law at scale {args.post_scale}")
    return EXIT_NO_ALARM


def _derived_post_path(out: str) -> str:
    stem, suffix = os.path.splitext(out)
    return stem + "_post" + (suffix or ".json")


def cmd_detect(args) -> int:
    pre = load_law(args.pre)
    post = load_law(args.post)
    threshold, _ = _threshold_beta(args)
    xs = read_single_csv(args.data)
    run = run_detector(xs, pre, post, threshold, horizon=args.horizon,
                       record_trajectory=True, phase_offset=args.phase_offset)
    write_trajectory(args.out, run)
    if not args.no_figure:
        plot_trajectory(_figure_path(args.out), run)
    print(f"wrote {args.out}")
    if run.stopped:
        print(f"alarm at n={run.stop_time} (threshold {threshold:g})")
        return EXIT_ALARM
    print(f"no alarm in {run.n_seen} samples (threshold {threshold:g})")
    return EXIT_NO_ALARM


def cmd_multi(args) -> int:
    pre = load_law(args.pre)
    posts = load_candidate_bank(args.posts)
    _, beta = _threshold_beta(args)
    xs = read_single_csv(args.data)
    run = run_multi(xs, pre, posts, beta, horizon=args.horizon,
                    record_trajectory=True, phase_offset=args.phase_offset)
    write_multi_trajectory(args.out, run)
    if not args.no_figure:
        plot_multi_trajectory(_figure_path(args.out), run)
    print(f"wrote {args.out}")
    stop = run.stop_time_cm if args.rule == "max" else run.stop_time_sr
    for rule, when in (("max", run.stop_time_cm), ("sr", run.stop_time_sr)):
        if when is None:
            print(f"{rule} rule: no alarm in {run.n_seen} samples")
        else:
            print(f"{rule} rule: alarm at n={when}")
    if stop is not None:
        print(f"largest candidate statistic: {run.argmax_candidate + 1}")
        return EXIT_ALARM
    return EXIT_NO_ALARM


def cmd_distributed(args) -> int:
    streams = load_stream_bank(args.bank)
    _, beta = _threshold_beta(args)
    ticks = read_wide_csv(args.data, len(streams))
    run = run_bank(streams, ticks, beta, horizon=args.horizon,
                   record_trajectory=True, phase_offset=args.phase_offset)
    write_bank_trajectory(args.out, run)
    if not args.no_figure:
        plot_bank_trajectory(_figure_path(args.out), run)
    print(f"wrote {args.out}")
    stop = run.stop_time_dm if args.rule == "max" else run.stop_time_srd
    for rule, when in (("max", run.stop_time_dm), ("sr", run.stop_time_srd)):
        if when is None:
            print(f"{rule} rule: no alarm in {run.n_seen} ticks")
        else:
            print(f"{rule} rule: alarm at tick {when}")
    if stop is not None:
        print(f"largest stream statistic: {run.argmax_stream + 1}")
        return EXIT_ALARM
    return EXIT_NO_ALARM


def cmd_simulate(args) -> int:
    pre, post = _demo_laws(args)
    threshold, _ = _threshold_beta(args)
    change = None if args.change_point in (None, "never") else int(args.change_point)
    xs = generate(pre, post, change, args.horizon, args.seed)
    run = run_detector(xs, pre, post, threshold, record_trajectory=True,
                       phase_offset=args.phase_offset)
    write_trajectory(args.out, run)
    if not args.no_figure:
        plot_trajectory(_figure_path(args.out), run)
    print(f"wrote {args.out}")
    where = "never" if change is None else f"n={change}"
    if run.stopped:
        print(f"change {where}: alarm at n={run.stop_time} (threshold {threshold:g})")
        return EXIT_ALARM
    print(f"change {where}: no alarm in {run.n_seen} samples (threshold {threshold:g})")
    return EXIT_NO_ALARM


def cmd_curve(args) -> int:
    pre, post = _demo_laws(args)
    thresholds = _parse_thresholds(args.thresholds)
    points = tradeoff_curve(pre, post, thresholds, args.paths, args.seed,
                            mtfa_horizon=args.mtfa_horizon,
                            wadd_horizon=args.wadd_horizon)
    write_curve(args.out, points)
    if not args.no_figure:
        plot_curve(_figure_path(args.out), points)
    print(f"wrote {args.out}")
    for p in points:
        flag = " (censored, lower bound)" if p.mtfa_censor_frac > 0 else ""
        print(f"A={p.threshold:g}: wadd={p.wadd:.2f}+-{p.wadd_ci:.2f}, "
              f"log mtfa={math.log(p.mtfa):.3f}{flag}, theory={p.theory_delay:.2f}")
    return EXIT_NO_ALARM


def _add_threshold_flags(sub, default_beta: bool = False) -> None:
    group = sub.add_mutually_exclusive_group(required=not default_beta)
    group.add_argument("--threshold", type=float, help="alarm threshold A")
    group.add_argument("--beta", type=float,
                       help="target mean time to false alarm; maps to A = ln(beta)")


def _add_io_flags(sub, default_out: str) -> None:
    sub.add_argument("--phase-offset", type=int, default=0,
                     help="cycle position of the first sample minus one")
    sub.add_argument("--out", default=default_out, help="output CSV path")
    sub.add_argument("--no-figure", action="store_true",
                     help="skip rendering the PNG next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcusum",
        description="Quickest change detection for periodic data streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="mode", required=True)

    fit = subs.add_parser("fit", help="fit a baseline law from training data")
    fit.add_argument("--data", required=True, help="training CSV, whole periods")
    fit.add_argument("--period", type=int, required=True, help="cycle length T")
    fit.add_argument("--batches", default=None,
                     help="comma-separated batch lengths; the last batch "
                          "absorbs any remainder (default: one batch per phase)")
    fit.add_argument("--family", choices=["poisson", "gaussian"], default="poisson")
    fit.add_argument("--fit-variance", action="store_true",
                     help="estimate per-batch Gaussian variances (default: 1.0)")
    fit.add_argument("--rate-floor", type=float, default=0.5,
                     help="rate for Poisson batches with zero observed counts")
    fit.add_argument("--post-scale", type=float, nargs="?", const=3.0, default=None,
                     help="also write a post-change law with intensities "
                          "scaled by this factor (default 3 when given bare)")
    fit.add_argument("--post-out", default=None,
                     help="post law path (default: derived from --out)")
    fit.add_argument("--out", default="pre_law.json", help="fitted law path")
    fit.set_defaults(func=cmd_fit)

    detect = subs.add_parser("detect", help="run the detector over a data file")
    detect.add_argument("--pre", required=True, help="pre-change law JSON")
    detect.add_argument("--post", required=True, help="post-change law JSON")
    detect.add_argument("--data", required=True, help="sample CSV, or - for stdin")
    detect.add_argument("--horizon", type=int, default=None,
                        help="stop feeding samples after this many")
    _add_threshold_flags(detect)
    _add_io_flags(detect, "trajectory.csv")
    detect.set_defaults(func=cmd_detect)

    multi = subs.add_parser("multi", help="detect with a bank of candidate post laws")
    multi.add_argument("--pre", required=True, help="pre-change law JSON")
    multi.add_argument("--posts", required=True, help="JSON array of candidate laws")
    multi.add_argument("--data", required=True, help="sample CSV, or - for stdin")
    multi.add_argument("--rule", choices=["max", "sr"], default="max",
                       help="which stopping rule drives the exit code")
    multi.add_argument("--horizon", type=int, default=None,
                       help="stop feeding samples after this many")
    _add_threshold_flags(multi)
    _add_io_flags(multi, "multi_trajectory.csv")
    multi.set_defaults(func=cmd_multi)

    dist = subs.add_parser("distributed", help="detect across parallel streams")
    dist.add_argument("--bank", required=True, help="JSON array of pre/post law pairs")
    dist.add_argument("--data", required=True, help="wide CSV, or - for stdin")
    dist.add_argument("--rule", choices=["max", "sr"], default="max",
                      help="which stopping rule drives the exit code")
    dist.add_argument("--horizon", type=int, default=None,
                      help="stop feeding ticks after this many")
    _add_threshold_flags(dist)
    _add_io_flags(dist, "bank_trajectory.csv")
    dist.set_defaults(func=cmd_distributed)

    simulate = subs.add_parser("simulate", help="run the detector on a synthetic stream")
    simulate.add_argument("--pre", default=None, help="pre-change law JSON (default: demo)")
    simulate.add_argument("--post", default=None, help="post-change law JSON (default: demo)")
    simulate.add_argument("--change-point", default=None,
                          help="1-based sample where the change starts, or never")
    simulate.add_argument("--horizon", type=int, default=500,
                          help="stream length (default 500)")
    simulate.add_argument("--seed", type=int, required=True)
    _add_threshold_flags(simulate)
    _add_io_flags(simulate, "trajectory.csv")
    simulate.set_defaults(func=cmd_simulate)

    curve = subs.add_parser("curve", help="estimate the delay vs false-alarm curve")
    curve.add_argument("--pre", default=None, help="pre-change law JSON (default: demo)")
    curve.add_argument("--post", default=None, help="post-change law JSON (default: demo)")
    curve.add_argument("--thresholds", default="3,4,5,5.5,6",
                       help="comma-separated threshold list")
    curve.add_argument("--paths", type=int, default=5000)
    curve.add_argument("--seed", type=int, required=True)
    curve.add_argument("--mtfa-horizon", type=int, default=None,
                       help="censoring horizon for false-alarm paths (default 10 e^A)")
    curve.add_argument("--wadd-horizon", type=int, default=None,
                       help="censoring horizon for delay paths")
    curve.add_argument("--out", default="curve.csv", help="output CSV path")
    curve.add_argument("--no-figure", action="store_true",
                       help="skip rendering the PNG next to the CSV")
    curve.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; fold argparse usage errors into the error code
        return 0 if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
