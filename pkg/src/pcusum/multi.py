"""Detection with an unknown post-change law drawn from M candidates.

Runs one reflected CUSUM statistic per candidate and stops when the
largest crosses ``log(beta * M)`` (non-strict), or alternatively when the
Shiryaev-Roberts-type statistic

    R_n = sum_{l=1}^{M} sum_{k=1}^{n} prod_{i=k}^{n} g_i^{(l)}(X_i) / f_i(X_i)

crosses ``beta * M``.  Each candidate's SR component obeys
``R_{n+1} = (1 + R_n) * exp(Z_{n+1})`` and is maintained in the log
domain (``log_r`` starts at -inf, meaning ``R_0 = 0``); statistics are
never exponentiated outside stabilized log-sum operations.  Under the
no-change law, ``R_n - n*M`` is a martingale, which
:func:`martingale_check` verifies empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import IpidLaw, llr, llr_values, phase_of, sample_law, _check_same_period

__all__ = [
    "MultiState",
    "MultiRun",
    "MartingalePoint",
    "MartingaleReport",
    "multi_init",
    "multi_step",
    "log_sr",
    "stop_cm",
    "stop_sr",
    "run_multi",
    "martingale_check",
]


@dataclass(frozen=True)
class MultiState:
    """Per-candidate CUSUM statistics and log-domain SR components."""

    n: int
    w: tuple[float, ...]
    log_r: tuple[float, ...]


@dataclass(frozen=True)
class MultiRun:
    """First firing times of the max rule and the SR rule on one stream.

    ``argmax_candidate`` is the 0-based index of the largest CUSUM
    statistic at the max-rule alarm (or at the last step when censored);
    it is a diagnostic only, with no optimality claim attached.
    """

    stop_time_cm: int | None
    stop_time_sr: int | None
    n_seen: int
    beta: float
    argmax_candidate: int
    log_sr_at_stop: float | None
    final_state: MultiState
    trajectory: tuple[tuple, ...] | None = None


def _bank_period(pre: IpidLaw, posts: Sequence[IpidLaw]) -> int:
    if not posts:
        raise ValueError("need at least one candidate post-change law")
    for post in posts:
        _check_same_period(pre, post)
    return pre.period


def multi_init(m: int) -> MultiState:
    """Start state for a bank of ``m`` candidates: all W at 0, all R at 0."""
    if m < 1:
        raise ValueError(f"candidate count must be >= 1, got {m}")
    return MultiState(n=0, w=(0.0,) * m, log_r=(-math.inf,) * m)


def multi_step(state: MultiState, x: float, pre: IpidLaw, posts: Sequence[IpidLaw],
               phase_offset: int = 0) -> MultiState:
    """Advance every candidate's statistics with one observation."""
    period = _bank_period(pre, posts)
    if len(posts) != len(state.w):
        raise ValueError(f"state tracks {len(state.w)} candidates but {len(posts)} laws given")
    phase = phase_of(state.n + 1 + phase_offset, period)
    f = pre.phases[phase - 1]
    w = []
    log_r = []
    for wl, lrl, post in zip(state.w, state.log_r, posts):
        z = llr(f, post.phases[phase - 1], x)
        w.append(max(wl, 0.0) + z)
        # log(1 + R) + Z, stable for R = 0 (log_r = -inf) through R >> 1
        log_r.append(float(np.logaddexp(0.0, lrl)) + z)
    return MultiState(n=state.n + 1, w=tuple(w), log_r=tuple(log_r))


def log_sr(state: MultiState) -> float:
    """log R_n: stabilized log-sum of the per-candidate components."""
    return float(np.logaddexp.reduce(np.asarray(state.log_r)))


def stop_cm(state: MultiState, beta: float, m: int | None = None) -> bool:
    """Max rule: true iff ``max_l W^(l) >= log(beta * m)`` (non-strict).

    ``m`` defaults to the bank size; pass it explicitly to evaluate a
    single candidate against a larger bank's threshold.
    """
    if m is None:
        m = len(state.w)
    return max(state.w) >= math.log(beta * m)


def stop_sr(state: MultiState, beta: float, m: int | None = None) -> bool:
    """SR rule: true iff ``R_n >= beta * m``, compared in the log domain."""
    if m is None:
        m = len(state.w)
    return log_sr(state) >= math.log(beta * m)


def run_multi(xs: Iterable[float], pre: IpidLaw, posts: Sequence[IpidLaw], beta: float,
              horizon: int | None = None, record_trajectory: bool = False,
              phase_offset: int = 0) -> MultiRun:
    """Run both stopping rules over a stream, recording each one's first alarm.

    Continues until both rules have fired (or the stream/horizon ends) so
    the two stop times can be compared pathwise.
    """
    posts = tuple(posts)
    period = _bank_period(pre, posts)
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    state = multi_init(len(posts))
    rows = [] if record_trajectory else None
    t_cm = None
    t_sr = None
    argmax_at_cm = None
    log_sr_at_stop = None
    for x in xs:
        state = multi_step(state, x, pre, posts, phase_offset)
        if record_trajectory:
            phase = phase_of(state.n + phase_offset, period)
            rows.append((state.n, phase, float(x)) + state.w + state.log_r)
        if t_sr is None and stop_sr(state, beta):
            t_sr = state.n
            log_sr_at_stop = log_sr(state)
        if t_cm is None and stop_cm(state, beta):
            t_cm = state.n
            argmax_at_cm = max(range(len(state.w)), key=state.w.__getitem__)
        if t_cm is not None and t_sr is not None:
            break
        if horizon is not None and state.n >= horizon:
            break
    if state.n == 0:
        raise ValueError("empty observation stream")
    if argmax_at_cm is None:
        argmax_at_cm = max(range(len(state.w)), key=state.w.__getitem__)
    return MultiRun(
        stop_time_cm=t_cm,
        stop_time_sr=t_sr,
        n_seen=state.n,
        beta=beta,
        argmax_candidate=argmax_at_cm,
        log_sr_at_stop=log_sr_at_stop,
        final_state=state,
        trajectory=tuple(rows) if record_trajectory else None,
    )


@dataclass(frozen=True)
class MartingalePoint:
    """Empirical mean of ``R_n - n*M`` at one checkpoint."""

    n: int
    mean: float
    se: float

    @property
    def passed(self) -> bool:
        return abs(self.mean) <= 3.0 * self.se


@dataclass(frozen=True)
class MartingaleReport:
    points: tuple[MartingalePoint, ...]
    m: int
    paths: int

    @property
    def all_passed(self) -> bool:
        return all(p.passed for p in self.points)


def martingale_check(pre: IpidLaw, posts: Sequence[IpidLaw], n_points: Sequence[int],
                     paths: int, seed: int) -> MartingaleReport:
    """Empirical test that ``R_n - n*M`` is mean-zero under the no-change law.

    Simulates ``paths`` independent streams from the pre-change law (one
    derived random stream per path), evaluates ``R_n`` at each requested
    checkpoint, and reports the sample mean of ``R_n - n*M`` with its
    standard error.  A checkpoint passes when ``|mean| <= 3 * SE``.
    """
    posts = tuple(posts)
    m = len(posts)
    _bank_period(pre, posts)
    checkpoints = sorted(set(int(n) for n in n_points))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive time indices")
    n_max = checkpoints[-1]
    excess = np.empty((paths, len(checkpoints)))
    children = np.random.SeedSequence(seed).spawn(paths)
    for p in range(paths):
        rng = np.random.default_rng(children[p])
        xs = sample_law(pre, n_max, rng)
        zs = np.column_stack([llr_values(pre, post, xs) for post in posts])
        log_r = np.full(m, -np.inf)
        k = 0
        for n in range(1, n_max + 1):
            log_r = np.logaddexp(0.0, log_r) + zs[n - 1]
            if n == checkpoints[k]:
                r_n = np.exp(np.logaddexp.reduce(log_r))
                excess[p, k] = r_n - n * m
                k += 1
    points = []
    for k, n in enumerate(checkpoints):
        col = excess[:, k]
        se = float(np.std(col, ddof=1) / math.sqrt(paths))
        points.append(MartingalePoint(n=n, mean=float(col.mean()), se=se))
    return MartingaleReport(points=tuple(points), m=m, paths=paths)
