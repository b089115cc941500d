"""Fit piecewise-constant periodic parameters from training data.

A period of length T is split into E contiguous batches; the density
parameter is held constant inside each batch.  Estimates are per-batch
sample means taken over every full period in the training stream, which
is the maximum-likelihood fit for both supported families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Gaussian, IpidLaw, PhaseDensity, Poisson

__all__ = [
    "BatchSpec",
    "StepParams",
    "fit_step_params",
    "expand_to_law",
    "scale_post",
]


@dataclass(frozen=True)
class BatchSpec:
    """Partition of the phases 1..period into contiguous batches.

    ``boundaries`` are the right edges: 0 = N_0 < N_1 < ... < N_E = period,
    stored without the leading zero.  Batch e covers phases
    N_{e-1}+1 .. N_e.
    """

    period: int
    boundaries: tuple[int, ...]

    def __init__(self, period: int, boundaries: Sequence[int]):
        if period < 1:
            raise ValueError(f"period must be >= 1, got {period}")
        boundaries = tuple(int(b) for b in boundaries)
        if not boundaries:
            raise ValueError("need at least one batch")
        prev = 0
        for b in boundaries:
            if b <= prev:
                raise ValueError(f"boundaries must be strictly increasing, got {boundaries}")
            prev = b
        if boundaries[-1] != period:
            raise ValueError(
                f"last boundary must equal the period ({period}), got {boundaries[-1]}"
            )
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "boundaries", boundaries)

    @property
    def n_batches(self) -> int:
        return len(self.boundaries)

    def batch_lengths(self) -> tuple[int, ...]:
        prev = 0
        out = []
        for b in self.boundaries:
            out.append(b - prev)
            prev = b
        return tuple(out)

    def batch_of_phase(self, phase: int) -> int:
        """1-based batch index containing a 1-based phase."""
        if not 1 <= phase <= self.period:
            raise ValueError(f"phase must be in 1..{self.period}, got {phase}")
        for e, b in enumerate(self.boundaries, start=1):
            if phase <= b:
                return e
        raise AssertionError("unreachable")

    @classmethod
    def from_lengths(cls, period: int, lengths: Sequence[int]) -> "BatchSpec":
        """Build from batch lengths; a shortfall extends the last batch.

        Lengths summing past the period are rejected; summing short is
        allowed and the final batch absorbs the remaining phases, so
        ``from_lengths(24, [8, 8])`` gives batches of 8, 16.
        """
        lengths = [int(v) for v in lengths]
        if not lengths:
            raise ValueError("need at least one batch length")
        if any(v < 1 for v in lengths):
            raise ValueError(f"batch lengths must be >= 1, got {lengths}")
        total = sum(lengths)
        if total > period:
            raise ValueError(f"batch lengths sum to {total} > period {period}")
        bounds = list(np.cumsum(lengths))
        if bounds[-1] < period:
            bounds[-1] = period
        return cls(period, bounds)


@dataclass(frozen=True)
class StepParams:
    """Fitted per-batch densities, one per batch of the spec."""

    spec: BatchSpec
    values: tuple[PhaseDensity, ...]

    def __init__(self, spec: BatchSpec, values: Sequence[PhaseDensity]):
        values = tuple(values)
        if len(values) != spec.n_batches:
            raise ValueError(
                f"expected {spec.n_batches} batch densities, got {len(values)}"
            )
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", values)


def fit_step_params(samples: Sequence[float], spec: BatchSpec, family: str,
                    fit_variance: bool = False, rate_floor: float = 0.5,
                    variance_floor: float = 1e-6) -> StepParams:
    """Estimate per-batch densities from a stream of full training periods.

    ``samples`` must hold a whole number of periods; sample n is assigned
    to phase ((n-1) mod T) + 1 and pooled with every other sample in the
    same batch.  Poisson batches whose pooled count is zero fall back to
    ``rate_floor`` so the fitted law keeps full support.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.ndim != 1:
        raise ValueError(f"samples must be one-dimensional, got shape {xs.shape}")
    t = spec.period
    if xs.size == 0 or xs.size % t != 0:
        raise ValueError(
            f"need a positive whole number of periods: {xs.size} samples, period {t}"
        )
    if family == "poisson":
        bad = np.flatnonzero((xs < 0) | (xs != np.floor(xs)))
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"sample {i + 1} is not a nonnegative integer: {xs[i]!r}"
            )
    elif family != "gaussian":
        raise ValueError(f"unknown family: {family!r}")
    by_phase = xs.reshape(-1, t)
    values = []
    prev = 0
    for b in spec.boundaries:
        pooled = by_phase[:, prev:b].ravel()
        mean = float(pooled.mean())
        if family == "poisson":
            rate = mean if mean > 0.0 else rate_floor
            values.append(Poisson(rate=rate))
        else:
            if fit_variance:
                var = max(float(pooled.var(ddof=0)), variance_floor)
            else:
                var = 1.0
            values.append(Gaussian(mean=mean, variance=var))
        prev = b
    return StepParams(spec=spec, values=tuple(values))


def expand_to_law(params: StepParams) -> IpidLaw:
    """Unroll per-batch densities into a full per-phase law."""
    phases = []
    for length, dens in zip(params.spec.batch_lengths(), params.values):
        phases.extend([dens] * length)
    return IpidLaw(tuple(phases))


def scale_post(base: IpidLaw, factor: float) -> IpidLaw:
    """Post-change law with every phase intensity scaled by ``factor``.

    Poisson rates and Gaussian means are multiplied; Gaussian variances
    are kept, so a zero-mean baseline needs an additive shift instead.
    """
    if not factor > 0.0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    phases = []
    for dens in base.phases:
        if isinstance(dens, Poisson):
            phases.append(Poisson(rate=dens.rate * factor))
        else:
            phases.append(Gaussian(mean=dens.mean * factor, variance=dens.variance))
    return IpidLaw(tuple(phases))
