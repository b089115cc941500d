"""Multi-stream detection: M independent periodic streams, change in one.

Each stream carries its own pre/post law pair and its own reflected CUSUM
statistic ``D^(l)``, updated once per synchronous tick with that stream's
observation.  The max rule fires when ``max_l D^(l) >= log(beta * M)``;
the SR-type rule compares the summed per-stream SR components against
``beta * M`` in the log domain, exactly as in the candidate-bank case.
Stream updates are independent, so perturbing one stream's data never
moves another stream's statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import IpidLaw, llr, phase_of, _check_same_period

__all__ = [
    "StreamBank",
    "BankRun",
    "bank_init",
    "dist_step",
    "log_sr_total",
    "stop_dm",
    "stop_srd",
    "run_bank",
]


@dataclass(frozen=True)
class StreamBank:
    """Per-stream law pairs plus the current per-stream statistics."""

    streams: tuple[tuple[IpidLaw, IpidLaw], ...]
    n: int
    d: tuple[float, ...]
    log_s: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.streams)

    @property
    def period(self) -> int:
        return self.streams[0][0].period


@dataclass(frozen=True)
class BankRun:
    """First firing times of the max rule and SR rule over a tick sequence."""

    stop_time_dm: int | None
    stop_time_srd: int | None
    n_seen: int
    beta: float
    argmax_stream: int
    final_bank: StreamBank
    trajectory: tuple[tuple, ...] | None = None


def bank_init(streams: Sequence[tuple[IpidLaw, IpidLaw]]) -> StreamBank:
    """Build a bank from (pre, post) law pairs; all laws must share one period."""
    streams = tuple((pre, post) for pre, post in streams)
    if not streams:
        raise ValueError("need at least one stream")
    period = streams[0][0].period
    for pre, post in streams:
        _check_same_period(pre, post)
        if pre.period != period:
            raise ValueError("all streams must share the same period")
    m = len(streams)
    return StreamBank(streams=streams, n=0, d=(0.0,) * m, log_s=(-math.inf,) * m)


def dist_step(bank: StreamBank, xs: Sequence[float], phase_offset: int = 0) -> StreamBank:
    """Advance every stream with its own observation from one tick.

    Per-stream domain errors name the offending stream.  The update of
    stream ``l`` matches the single-stream recursion bit for bit.
    """
    if len(xs) != bank.m:
        raise ValueError(f"expected {bank.m} observations per tick, got {len(xs)}")
    phase = phase_of(bank.n + 1 + phase_offset, bank.period)
    d = []
    log_s = []
    for idx, ((pre, post), x) in enumerate(zip(bank.streams, xs)):
        try:
            z = llr(pre.phases[phase - 1], post.phases[phase - 1], x)
        except ValueError as exc:
            raise type(exc)(f"stream {idx + 1}: {exc}") from exc
        d.append(max(bank.d[idx], 0.0) + z)
        log_s.append(float(np.logaddexp(0.0, bank.log_s[idx])) + z)
    return StreamBank(streams=bank.streams, n=bank.n + 1, d=tuple(d), log_s=tuple(log_s))


def log_sr_total(bank: StreamBank) -> float:
    """log S_n: stabilized log-sum of the per-stream SR components."""
    return float(np.logaddexp.reduce(np.asarray(bank.log_s)))


def stop_dm(bank: StreamBank, beta: float, m: int | None = None) -> bool:
    """Max rule over streams: ``max_l D^(l) >= log(beta * m)`` (non-strict)."""
    if m is None:
        m = bank.m
    return max(bank.d) >= math.log(beta * m)


def stop_srd(bank: StreamBank, beta: float, m: int | None = None) -> bool:
    """SR rule over streams: ``S_n >= beta * m``, compared in the log domain."""
    if m is None:
        m = bank.m
    return log_sr_total(bank) >= math.log(beta * m)


def run_bank(streams: Sequence[tuple[IpidLaw, IpidLaw]], ticks: Iterable[Sequence[float]],
             beta: float, horizon: int | None = None, record_trajectory: bool = False,
             phase_offset: int = 0) -> BankRun:
    """Run both stopping rules over synchronous ticks of per-stream observations."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    bank = bank_init(streams)
    rows = [] if record_trajectory else None
    t_dm = None
    t_srd = None
    argmax_at_dm = None
    for xs in ticks:
        bank = dist_step(bank, xs, phase_offset)
        if record_trajectory:
            phase = phase_of(bank.n + phase_offset, bank.period)
            rows.append((bank.n, phase) + tuple(float(x) for x in xs) + bank.d + bank.log_s)
        if t_srd is None and stop_srd(bank, beta):
            t_srd = bank.n
        if t_dm is None and stop_dm(bank, beta):
            t_dm = bank.n
            argmax_at_dm = max(range(bank.m), key=bank.d.__getitem__)
        if t_dm is not None and t_srd is not None:
            break
        if horizon is not None and bank.n >= horizon:
            break
    if bank.n == 0:
        raise ValueError("empty tick stream")
    if argmax_at_dm is None:
        argmax_at_dm = max(range(bank.m), key=bank.d.__getitem__)
    return BankRun(
        stop_time_dm=t_dm,
        stop_time_srd=t_srd,
        n_seen=bank.n,
        beta=beta,
        argmax_stream=argmax_at_dm,
        final_bank=bank,
        trajectory=tuple(rows) if record_trajectory else None,
    )
