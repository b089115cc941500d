"""Single-stream CUSUM detector for periodic laws, with a brute-force oracle.

The running statistic follows the reflected recursion

    W_{n+1} = max(W_n, 0) + log g_{n+1}(X_{n+1}) / f_{n+1}(X_{n+1}),

with ``W_0 = 0`` and phase-dependent densities ``f_n``, ``g_n`` taken from
the pre- and post-change laws.  An alarm is raised the first time
``W_n > A`` (strict).  The recursion is equivalent to maximizing the sum
of log-likelihood ratios over the change start point; the brute-force
functions below evaluate that maximization directly and serve as an
independent oracle for the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import IpidLaw, llr, phase_of, _check_same_period

__all__ = [
    "CusumState",
    "TrajectoryPoint",
    "DetectionRun",
    "cusum_init",
    "cusum_step",
    "observe",
    "brute_force_statistic",
    "brute_force_trajectory",
    "cusum_trajectory",
    "first_crossing",
    "run_detector",
    "threshold_for_mtfa",
]


@dataclass(frozen=True)
class CusumState:
    """Samples consumed so far and the current statistic value."""

    n: int
    w: float


@dataclass(frozen=True)
class TrajectoryPoint:
    """One recorded step: time, phase, observation, increment, statistic."""

    n: int
    phase: int
    x: float
    z: float
    w: float


@dataclass(frozen=True)
class DetectionRun:
    """Outcome of running a detector over a stream.

    ``stop_time`` is the alarm time, or ``None`` when the run was censored
    (stream exhausted or horizon reached without a crossing).
    """

    stopped: bool
    stop_time: int | None
    n_seen: int
    threshold: float
    trajectory: tuple[TrajectoryPoint, ...] | None = None


def cusum_init() -> CusumState:
    """Fresh detector state: no samples seen, statistic at zero."""
    return CusumState(n=0, w=0.0)


def cusum_step(state: CusumState, x: float, pre: IpidLaw, post: IpidLaw,
               phase_offset: int = 0) -> CusumState:
    """Advance the statistic with one observation.

    ``phase_offset`` shifts the time-to-phase alignment: the sample at
    time ``n`` uses the densities of phase ``phase_of(n + phase_offset)``.
    """
    period = _check_same_period(pre, post)
    phase = phase_of(state.n + 1 + phase_offset, period)
    z = llr(pre.phases[phase - 1], post.phases[phase - 1], x)
    return CusumState(n=state.n + 1, w=max(state.w, 0.0) + z)


def observe(state: CusumState, x: float, pre: IpidLaw, post: IpidLaw,
            threshold: float, phase_offset: int = 0) -> tuple[CusumState, bool]:
    """Streaming contract: feed one observation, get (new state, crossed)."""
    new = cusum_step(state, x, pre, post, phase_offset)
    return new, new.w > threshold


def brute_force_statistic(xs, pre: IpidLaw, post: IpidLaw, phase_offset: int = 0) -> float:
    """Direct evaluation of the max-over-start-point statistic.

    Computes ``max_{1 <= k <= n} sum_{i=k}^{n} Z_i`` by summing every
    candidate tail explicitly, O(n^2).  Independent oracle for
    :func:`cusum_step`; never uses the reflected recursion.
    """
    xs = list(xs)
    if not xs:
        raise ValueError("brute_force_statistic needs at least one sample")
    period = _check_same_period(pre, post)
    zs = [
        llr(pre.phases[phase_of(i + 1 + phase_offset, period) - 1],
            post.phases[phase_of(i + 1 + phase_offset, period) - 1],
            x)
        for i, x in enumerate(xs)
    ]
    return max(math.fsum(zs[k:]) for k in range(len(zs)))


def brute_force_trajectory(xs, pre: IpidLaw, post: IpidLaw, phase_offset: int = 0) -> np.ndarray:
    """Max-over-start-point statistic at every prefix of the sample sequence.

    Maintains the full vector of start-point sums ``sum_{i=k}^{n} Z_i`` for
    all ``k`` and takes a true maximum at each ``n``; still definition-based
    (no reflection), but O(n^2) total instead of per prefix.
    """
    xs = list(xs)
    if not xs:
        raise ValueError("brute_force_trajectory needs at least one sample")
    period = _check_same_period(pre, post)
    out = np.empty(len(xs))
    tail_sums = np.empty(len(xs))
    for n, x in enumerate(xs):
        phase = phase_of(n + 1 + phase_offset, period)
        z = llr(pre.phases[phase - 1], post.phases[phase - 1], x)
        tail_sums[:n] += z  # every open start point gains Z_{n+1}
        tail_sums[n] = z  # new start point k = n+1
        out[n] = tail_sums[: n + 1].max()
    return out


def cusum_trajectory(zs) -> np.ndarray:
    """Statistic path from a precomputed increment array, vectorized.

    Uses ``W_n = S_n - min(0, S_1, ..., S_{n-1})`` with ``S`` the prefix
    sums of ``zs``; equal to iterating the reflected recursion.
    """
    zs = np.asarray(zs, dtype=float)
    s = np.cumsum(zs)
    floor = np.minimum.accumulate(np.concatenate(([0.0], s)))[:-1]
    return s - floor


def first_crossing(zs, threshold: float) -> int | None:
    """1-based index of the first ``W_n > threshold``, or None if never."""
    w = cusum_trajectory(zs)
    above = w > threshold
    if not above.any():
        return None
    return int(np.argmax(above)) + 1


def run_detector(xs: Iterable[float], pre: IpidLaw, post: IpidLaw, threshold: float,
                 horizon: int | None = None, record_trajectory: bool = False,
                 phase_offset: int = 0) -> DetectionRun:
    """Consume a stream until the statistic first exceeds ``threshold``.

    Stops at the first ``n`` with ``W_n > threshold``; otherwise runs until
    the stream is exhausted or ``horizon`` samples have been seen, and the
    run is marked censored (``stop_time=None``).
    """
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    if horizon is not None and horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    period = _check_same_period(pre, post)
    state = cusum_init()
    rows: list[TrajectoryPoint] = [] if record_trajectory else None
    stopped = False
    stop_time = None
    for x in xs:
        prev_w = state.w
        state = cusum_step(state, x, pre, post, phase_offset)
        if record_trajectory:
            phase = phase_of(state.n + phase_offset, period)
            rows.append(TrajectoryPoint(state.n, phase, float(x), state.w - max(prev_w, 0.0), state.w))
        if state.w > threshold:
            stopped = True
            stop_time = state.n
            break
        if horizon is not None and state.n >= horizon:
            break
    if state.n == 0:
        raise ValueError("empty observation stream")
    return DetectionRun(
        stopped=stopped,
        stop_time=stop_time,
        n_seen=state.n,
        threshold=threshold,
        trajectory=tuple(rows) if record_trajectory else None,
    )


def threshold_for_mtfa(beta: float) -> float:
    """Threshold ``A = log(beta)`` meeting the mean-time-to-false-alarm floor ``beta``."""
    if not beta > 1.0:
        raise ValueError(f"beta must be > 1, got {beta}")
    return math.log(beta)
