"""Synthetic stream generation and Monte Carlo performance estimation.

Two metrics drive the delay-vs-false-alarm trade-off curve:

* mean time to false alarm (MTFA): mean stopping time under pure
  pre-change data, censored at a horizon, so the estimate is a lower
  bound whenever any path is censored;
* worst-case detection delay: for each change phase nu in 1..T the
  detector statistic is reset to zero at the change and the mean number
  of post-change samples to alarm is estimated; the reported value is
  the maximum over nu.  Resetting to zero is the worst case for a
  reflected recursion, and by periodicity only the phase of the change
  point matters, so nu ranges over one period.

Every path gets its own random stream derived from the caller's seed,
so estimates are reproducible and order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IpidLaw, avg_kl, llr_values, sample_law, _check_same_period
from .detect import cusum_trajectory

__all__ = [
    "MtfaEstimate",
    "WaddEstimate",
    "PerfPoint",
    "generate",
    "estimate_mtfa",
    "estimate_wadd",
    "tradeoff_curve",
]

_Z95 = 1.96


@dataclass(frozen=True)
class MtfaEstimate:
    """Mean time to false alarm; a lower bound when censor_frac > 0."""

    value: float
    ci: float
    censor_frac: float
    paths: int
    horizon: int
    threshold: float

    @property
    def censored(self) -> bool:
        return self.censor_frac > 0.0


@dataclass(frozen=True)
class WaddEstimate:
    """Worst mean detection delay over change phases 1..T."""

    value: float
    ci: float
    worst_phase: int
    per_phase: tuple[float, ...]
    censor_frac: float
    paths: int
    horizon: int
    threshold: float


@dataclass(frozen=True)
class PerfPoint:
    """One threshold's point on the delay-vs-log-MTFA curve."""

    threshold: float
    mtfa: float
    mtfa_ci: float
    wadd: float
    wadd_ci: float
    theory_delay: float
    mtfa_censor_frac: float
    wadd_censor_frac: float


def _rng_children(seed: int | np.random.SeedSequence, count: int) -> list[np.random.Generator]:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in seed.spawn(count)]


def generate(pre: IpidLaw, post: IpidLaw, change_point: int | None, horizon: int,
             seed: int | np.random.Generator) -> np.ndarray:
    """Draw one stream: pre-law phases before the change, post-law from it on.

    ``change_point=None`` means the change never happens.  Sample n
    (1-based) keeps its absolute phase on both sides of the change.
    """
    _check_same_period(pre, post)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if change_point is not None and change_point < 1:
        raise ValueError(f"change point must be >= 1, got {change_point}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if change_point is None or change_point > horizon:
        return sample_law(pre, horizon, rng)
    head = sample_law(pre, change_point - 1, rng)
    tail = sample_law(post, horizon - change_point + 1, rng, start=change_point)
    return np.concatenate([head, tail])


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    half = _Z95 * float(values.std(ddof=1)) / math.sqrt(values.size)
    return mean, half


def estimate_mtfa(pre: IpidLaw, post: IpidLaw, threshold: float, paths: int,
                  seed: int | np.random.SeedSequence, horizon: int | None = None) -> MtfaEstimate:
    """Monte Carlo mean stopping time with no change ever happening.

    Paths that never cross by the horizon are counted at the horizon and
    reported through ``censor_frac``; the default horizon 10 e^A keeps
    that fraction small at moderate thresholds.
    """
    _check_same_period(pre, post)
    if paths < 2:
        raise ValueError(f"need at least 2 paths, got {paths}")
    if horizon is None:
        horizon = math.ceil(10.0 * math.exp(threshold))
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    stops = np.empty(paths)
    censored = 0
    for rng, i in zip(_rng_children(seed, paths), range(paths)):
        xs = sample_law(pre, horizon, rng)
        w = cusum_trajectory(llr_values(pre, post, xs))
        hits = np.flatnonzero(w > threshold)
        if hits.size:
            stops[i] = hits[0] + 1.0
        else:
            stops[i] = horizon
            censored += 1
    mean, half = _mean_ci(stops)
    return MtfaEstimate(value=mean, ci=half, censor_frac=censored / paths,
                        paths=paths, horizon=horizon, threshold=threshold)


def estimate_wadd(pre: IpidLaw, post: IpidLaw, threshold: float, paths: int,
                  seed: int | np.random.SeedSequence, horizon: int | None = None) -> WaddEstimate:
    """Worst-case mean delay: reset to zero at the change, maximize over phase.

    The delay counts post-change samples through the alarm inclusive.
    Censored paths are counted at the horizon, so the estimate can only
    understate the true delay.
    """
    _check_same_period(pre, post)
    if paths < 2:
        raise ValueError(f"need at least 2 paths, got {paths}")
    info = avg_kl(pre, post)
    if horizon is None:
        if info <= 0.0:
            raise ValueError("laws coincide (zero information); give an explicit horizon")
        horizon = math.ceil(20.0 * threshold / info + 200.0)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    t = pre.period
    delays = np.empty((t, paths))
    censored = np.zeros(t, dtype=int)
    for rng, i in zip(_rng_children(seed, paths), range(paths)):
        for nu in range(1, t + 1):
            xs = sample_law(post, horizon, rng, start=nu)
            w = cusum_trajectory(llr_values(pre, post, xs, start=nu))
            hits = np.flatnonzero(w > threshold)
            if hits.size:
                delays[nu - 1, i] = hits[0] + 1.0
            else:
                delays[nu - 1, i] = horizon
                censored[nu - 1] += 1
    per_phase = delays.mean(axis=1)
    worst = int(per_phase.argmax())
    mean, half = _mean_ci(delays[worst])
    return WaddEstimate(value=mean, ci=half, worst_phase=worst + 1,
                        per_phase=tuple(float(v) for v in per_phase),
                        censor_frac=int(censored[worst]) / paths,
                        paths=paths, horizon=horizon, threshold=threshold)


def tradeoff_curve(pre: IpidLaw, post: IpidLaw, thresholds, paths: int,
                   seed: int | np.random.SeedSequence,
                   mtfa_horizon: int | None = None,
                   wadd_horizon: int | None = None) -> tuple[PerfPoint, ...]:
    """One PerfPoint per threshold, plus the theory line A / I."""
    thresholds = [float(a) for a in thresholds]
    if not thresholds:
        raise ValueError("need at least one threshold")
    info = avg_kl(pre, post)
    if info <= 0.0:
        raise ValueError("laws coincide (zero information); the theory line A / I is undefined")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    points = []
    for a, child in zip(thresholds, seed.spawn(len(thresholds))):
        mtfa_seed, wadd_seed = child.spawn(2)
        mtfa = estimate_mtfa(pre, post, a, paths, mtfa_seed, horizon=mtfa_horizon)
        wadd = estimate_wadd(pre, post, a, paths, wadd_seed, horizon=wadd_horizon)
        points.append(PerfPoint(
            threshold=a,
            mtfa=mtfa.value,
            mtfa_ci=mtfa.ci,
            wadd=wadd.value,
            wadd_ci=wadd.ci,
            theory_delay=a / info,
            mtfa_censor_frac=mtfa.censor_frac,
            wadd_censor_frac=wadd.censor_frac,
        ))
    return tuple(points)
