"""CSV artifacts and matplotlib figures for detection runs and curves.

Floats are written with repr so a rerun with the same seed produces a
byte-identical file.  Figures are rendered with the Agg backend and
saved next to the delimited output.
"""

from __future__ import annotations

import csv
import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .detect import DetectionRun
from .distributed import BankRun
from .multi import MultiRun
from .sim import PerfPoint

__all__ = [
    "write_trajectory",
    "write_multi_trajectory",
    "write_bank_trajectory",
    "write_curve",
    "plot_trajectory",
    "plot_multi_trajectory",
    "plot_bank_trajectory",
    "plot_curve",
]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _need_trajectory(run) -> tuple:
    if run.trajectory is None:
        raise ValueError("run was made without record_trajectory=True")
    return run.trajectory


def write_trajectory(path: str, run: DetectionRun) -> None:
    """Single-stream trajectory: n, phase, x, Z, W."""
    rows = ((p.n, p.phase, p.x, p.z, p.w) for p in _need_trajectory(run))
    _write_rows(path, ["n", "phase", "x", "Z", "W"], rows)


def write_multi_trajectory(path: str, run: MultiRun) -> None:
    """Candidate-bank trajectory: n, phase, x, then W and log R per candidate."""
    rows = _need_trajectory(run)
    m = (len(rows[0]) - 3) // 2
    header = (["n", "phase", "x"]
              + [f"W{i}" for i in range(1, m + 1)]
              + [f"logR{i}" for i in range(1, m + 1)])
    _write_rows(path, header, rows)


def write_bank_trajectory(path: str, run: BankRun) -> None:
    """Multi-stream trajectory: n, phase, then x, D, log S per stream."""
    rows = _need_trajectory(run)
    m = run.final_bank.m
    header = (["n", "phase"]
              + [f"x{i}" for i in range(1, m + 1)]
              + [f"D{i}" for i in range(1, m + 1)]
              + [f"logS{i}" for i in range(1, m + 1)])
    _write_rows(path, header, rows)


def write_curve(path: str, points: Sequence[PerfPoint]) -> None:
    """Trade-off curve, one row per threshold.

    censor_frac is the larger of the false-alarm and delay censoring
    fractions; any nonzero value marks the row as a bound, not an
    estimate.
    """
    rows = ((p.threshold, math.log(p.mtfa), p.mtfa_ci, p.wadd, p.wadd_ci,
             p.theory_delay, max(p.mtfa_censor_frac, p.wadd_censor_frac))
            for p in points)
    header = ["A", "log_mtfa_est", "mtfa_ci", "wadd_est", "wadd_ci",
              "theory_delay", "censor_frac"]
    _write_rows(path, header, rows)


def plot_trajectory(path: str, run: DetectionRun, title: str = "Detection statistic") -> None:
    pts = _need_trajectory(run)
    ns = [p.n for p in pts]
    ws = [p.w for p in pts]
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(ns, ws, lw=1.0, label="W")
    ax.axhline(run.threshold, color="crimson", ls="--", lw=1.0, label="threshold")
    if run.stopped:
        ax.axvline(run.stop_time, color="gray", ls=":", lw=1.0,
                   label=f"alarm at n={run.stop_time}")
    ax.set_xlabel("n")
    ax.set_ylabel("statistic")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_multi_trajectory(path: str, run: MultiRun, title: str = "Candidate bank") -> None:
    rows = _need_trajectory(run)
    m = (len(rows[0]) - 3) // 2
    ns = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for i in range(m):
        ax.plot(ns, [r[3 + i] for r in rows], lw=1.0, label=f"W{i + 1}")
    ax.axhline(math.log(run.beta * m), color="crimson", ls="--", lw=1.0,
               label="log(beta m)")
    if run.stop_time_cm is not None:
        ax.axvline(run.stop_time_cm, color="gray", ls=":", lw=1.0,
                   label=f"max rule at n={run.stop_time_cm}")
    ax.set_xlabel("n")
    ax.set_ylabel("statistic")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bank_trajectory(path: str, run: BankRun, title: str = "Stream bank") -> None:
    rows = _need_trajectory(run)
    m = run.final_bank.m
    ns = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for i in range(m):
        ax.plot(ns, [r[2 + m + i] for r in rows], lw=1.0, label=f"D{i + 1}")
    ax.axhline(math.log(run.beta * m), color="crimson", ls="--", lw=1.0,
               label="log(beta m)")
    if run.stop_time_dm is not None:
        ax.axvline(run.stop_time_dm, color="gray", ls=":", lw=1.0,
                   label=f"max rule at n={run.stop_time_dm}")
    ax.set_xlabel("tick")
    ax.set_ylabel("statistic")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_curve(path: str, points: Sequence[PerfPoint], title: str = "Delay vs log MTFA") -> None:
    """Simulated points with error bars against the A / I asymptote."""
    xs = [math.log(p.mtfa) for p in points]
    ys = [p.wadd for p in points]
    yerr = [p.wadd_ci for p in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(xs, ys, yerr=yerr, fmt="o-", capsize=3, label="simulated")
    ax.plot([p.threshold for p in points], [p.theory_delay for p in points],
            ls="--", color="gray", label="A / I")
    ax.set_xlabel("log mean time to false alarm")
    ax.set_ylabel("worst-case mean delay")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
