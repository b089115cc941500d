"""Parametric phase densities and periodic (i.p.i.d.) laws.

An i.p.i.d. process is a sequence of independent random variables whose
marginal density repeats with period ``T``: the sample at time ``n`` is
drawn from ``phases[phase_of(n, T)]``.  ``T = 1`` recovers the i.i.d. case.
A change point ``nu`` switches the process from a pre-change law
``(f_1, ..., f_T)`` to a post-change law ``(g_1, ..., g_T)`` from time
``nu`` onward.

Two parametric families ship: Gaussian (optionally unit variance) and
Poisson.  Log-likelihood ratios and Kullback-Leibler divergences are
closed-form, so the information number ``avg_kl`` is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Gaussian",
    "Poisson",
    "PhaseDensity",
    "IpidLaw",
    "ChangeConfig",
    "SupportError",
    "FamilyMismatchError",
    "PeriodMismatchError",
    "phase_of",
    "log_density",
    "llr",
    "llr_values",
    "kl_divergence",
    "avg_kl",
    "sample_law",
    "law_to_dict",
    "law_from_dict",
    "save_law",
    "load_law",
]

_LOG_2PI = math.log(2.0 * math.pi)


class SupportError(ValueError):
    """Observation outside the support of a density.

    ``index`` is the 0-based position of the offending sample when the
    error was raised while scanning a sequence, else ``None``.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class FamilyMismatchError(ValueError):
    """Likelihood ratio requested between different parametric families."""


class PeriodMismatchError(ValueError):
    """Operation on laws whose periods differ."""


@dataclass(frozen=True)
class Gaussian:
    """Normal density with the given mean and variance (default unit)."""

    mean: float
    variance: float = 1.0

    family = "gaussian"

    def __post_init__(self):
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be positive and finite, got {self.variance}")
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean}")

    def log_density(self, x: float) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise SupportError(f"Gaussian support is the real line, got {x}")
        return -0.5 * (_LOG_2PI + math.log(self.variance)) - (x - self.mean) ** 2 / (2.0 * self.variance)


@dataclass(frozen=True)
class Poisson:
    """Poisson mass function with the given rate; support is the counts."""

    rate: float

    family = "poisson"

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")

    def log_density(self, x: float) -> float:
        k = float(x)
        if k < 0 or k != math.floor(k) or not math.isfinite(k):
            raise SupportError(f"Poisson support is the nonnegative integers, got {x}")
        return -self.rate + k * math.log(self.rate) - math.lgamma(k + 1.0)


PhaseDensity = Union[Gaussian, Poisson]


def phase_of(n: int, period: int) -> int:
    """Phase (1-based) of absolute time ``n >= 1`` under the given period.

    Time 1 maps to phase 1 and time ``period + 1`` wraps back to phase 1.
    """
    return (n - 1) % period + 1


def log_density(d: PhaseDensity, x: float) -> float:
    """Natural log of the density/mass of ``d`` at ``x``."""
    return d.log_density(x)


def llr(f: PhaseDensity, g: PhaseDensity, x: float) -> float:
    """Log-likelihood ratio ``log g(x) - log f(x)``.

    ``f`` and ``g`` must belong to the same family so the supports agree.
    """
    if f.family != g.family:
        raise FamilyMismatchError(f"cannot form likelihood ratio of {g.family} against {f.family}")
    return g.log_density(x) - f.log_density(x)


def kl_divergence(g: PhaseDensity, f: PhaseDensity) -> float:
    """Kullback-Leibler divergence ``D(g || f)``, closed form.

    Gaussian: ``(mu_g - mu_f)^2 / (2 v_f) + (v_g/v_f - 1 - ln(v_g/v_f)) / 2``.
    Poisson:  ``r_g ln(r_g/r_f) + r_f - r_g``.
    """
    if isinstance(g, Gaussian) and isinstance(f, Gaussian):
        ratio = g.variance / f.variance
        return (g.mean - f.mean) ** 2 / (2.0 * f.variance) + 0.5 * (ratio - 1.0 - math.log(ratio))
    if isinstance(g, Poisson) and isinstance(f, Poisson):
        return g.rate * math.log(g.rate / f.rate) + f.rate - g.rate
    raise FamilyMismatchError(f"no closed-form divergence for {type(g).__name__} against {type(f).__name__}")


@dataclass(frozen=True)
class IpidLaw:
    """Periodic law: one phase density per position in the cycle.

    The density applied at absolute time ``n`` is
    ``phases[phase_of(n, period) - 1]``, so the law repeats with the
    period by construction.  All phases must share one family (the
    serialized form carries a single family tag).
    """

    phases: tuple[PhaseDensity, ...]

    def __init__(self, phases: Sequence[PhaseDensity]):
        phases = tuple(phases)
        if not phases:
            raise ValueError("a law needs at least one phase density")
        family = phases[0].family
        if any(d.family != family for d in phases):
            raise FamilyMismatchError("all phases of a law must share one family")
        object.__setattr__(self, "phases", phases)

    @property
    def period(self) -> int:
        return len(self.phases)

    @property
    def family(self) -> str:
        return self.phases[0].family

    def density_at(self, n: int) -> PhaseDensity:
        """Density in force at absolute time ``n >= 1``."""
        return self.phases[phase_of(n, self.period) - 1]


def _check_same_period(pre: IpidLaw, post: IpidLaw) -> int:
    if pre.period != post.period:
        raise PeriodMismatchError(f"period mismatch: {pre.period} vs {post.period}")
    return pre.period


def avg_kl(pre: IpidLaw, post: IpidLaw) -> float:
    """Information number: mean of the phase-wise divergences ``D(g_i || f_i)``.

    Positive whenever at least one phase of ``post`` differs from ``pre``;
    this is the constant that governs first-order detection delay.
    """
    period = _check_same_period(pre, post)
    return sum(kl_divergence(g, f) for f, g in zip(pre.phases, post.phases)) / period


@dataclass(frozen=True)
class ChangeConfig:
    """A validated change scenario: pre law, candidate post laws, change time.

    ``change_point=None`` means the change never happens.  Every post law
    must share the pre law's period and differ from it in at least one
    phase (equivalently have a positive information number).
    """

    pre: IpidLaw
    posts: tuple[IpidLaw, ...]
    change_point: int | None = None

    def __init__(self, pre: IpidLaw, posts: Sequence[IpidLaw], change_point: int | None = None):
        posts = tuple(posts)
        if not posts:
            raise ValueError("need at least one candidate post-change law")
        for post in posts:
            if avg_kl(pre, post) <= 0.0:
                raise ValueError("post-change law must differ from the pre-change law in some phase")
        if change_point is not None and change_point < 1:
            raise ValueError(f"change_point must be >= 1 or None, got {change_point}")
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "posts", posts)
        object.__setattr__(self, "change_point", change_point)

    @property
    def period(self) -> int:
        return self.pre.period


# -- vectorized likelihood ratios -------------------------------------------

def _phase_indices(start: int, count: int, period: int) -> np.ndarray:
    # 0-based phase index of absolute times start .. start+count-1
    return (start - 1 + np.arange(count)) % period


def _check_poisson_support(xs: np.ndarray) -> None:
    bad = (xs < 0) | (xs != np.floor(xs)) | ~np.isfinite(xs)
    if bad.any():
        i = int(np.argmax(bad))
        raise SupportError(
            f"Poisson support is the nonnegative integers, got {xs[i]} at sample index {i}",
            index=i,
        )


def llr_values(pre: IpidLaw, post: IpidLaw, xs, start: int = 1) -> np.ndarray:
    """Per-sample log-likelihood ratios for consecutive observations.

    ``xs[i]`` is the observation at absolute time ``start + i``; the
    matching phase densities of both laws are applied elementwise.
    """
    period = _check_same_period(pre, post)
    if pre.family != post.family:
        raise FamilyMismatchError(f"cannot form likelihood ratio of {post.family} against {pre.family}")
    xs = np.asarray(xs, dtype=float)
    idx = _phase_indices(start, xs.size, period)
    if pre.family == "gaussian":
        mf = np.array([d.mean for d in pre.phases])[idx]
        vf = np.array([d.variance for d in pre.phases])[idx]
        mg = np.array([d.mean for d in post.phases])[idx]
        vg = np.array([d.variance for d in post.phases])[idx]
        return 0.5 * np.log(vf / vg) - (xs - mg) ** 2 / (2.0 * vg) + (xs - mf) ** 2 / (2.0 * vf)
    _check_poisson_support(xs)
    rf = np.array([d.rate for d in pre.phases])[idx]
    rg = np.array([d.rate for d in post.phases])[idx]
    return xs * np.log(rg / rf) - (rg - rf)


def sample_law(law: IpidLaw, count: int, rng: np.random.Generator, start: int = 1) -> np.ndarray:
    """Draw ``count`` consecutive samples from the law, starting at time ``start``."""
    idx = _phase_indices(start, count, law.period)
    if law.family == "gaussian":
        means = np.array([d.mean for d in law.phases])[idx]
        stds = np.sqrt(np.array([d.variance for d in law.phases]))[idx]
        return rng.normal(loc=means, scale=stds)
    rates = np.array([d.rate for d in law.phases])[idx]
    return rng.poisson(lam=rates).astype(float)


# -- JSON serialization ------------------------------------------------------
#
# Schema (see README): {"period": T, "family": "gaussian" | "poisson",
# "params": [one record per phase]} with records {"mean": m, "variance": v}
# for Gaussian (variance optional, defaults to 1) and {"rate": r} for Poisson.

def law_to_dict(law: IpidLaw) -> dict:
    if law.family == "gaussian":
        params = [{"mean": d.mean, "variance": d.variance} for d in law.phases]
    else:
        params = [{"rate": d.rate} for d in law.phases]
    return {"period": law.period, "family": law.family, "params": params}


def law_from_dict(doc: dict) -> IpidLaw:
    try:
        family = doc["family"]
        period = doc["period"]
        params = doc["params"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"law document missing field: {exc}") from exc
    if family == "gaussian":
        phases = [Gaussian(mean=float(p["mean"]), variance=float(p.get("variance", 1.0))) for p in params]
    elif family == "poisson":
        phases = [Poisson(rate=float(p["rate"])) for p in params]
    else:
        raise ValueError(f"unknown family {family!r}")
    if len(phases) != period:
        raise ValueError(f"declared period {period} but {len(phases)} phase records")
    return IpidLaw(phases)


def save_law(law: IpidLaw, path) -> None:
    Path(path).write_text(json.dumps(law_to_dict(law), indent=2) + "\n")


def load_law(path) -> IpidLaw:
    return law_from_dict(json.loads(Path(path).read_text()))
