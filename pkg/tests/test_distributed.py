import math

import numpy as np
import pytest

from pcusum.detect import cusum_init, cusum_step
from pcusum.distributed import (
    bank_init,
    dist_step,
    log_sr_total,
    run_bank,
    stop_dm,
    stop_srd,
)
from pcusum.model import Gaussian, IpidLaw, Poisson, sample_law

PRE = IpidLaw((Gaussian(0.0, 1.0), Gaussian(0.0, 1.0)))
POST = IpidLaw((Gaussian(1.0, 1.0), Gaussian(0.5, 1.0)))
STREAMS = ((PRE, POST), (PRE, POST), (PRE, POST))


def test_bank_init_validation():
    bank = bank_init(STREAMS)
    assert bank.m == 3
    assert bank.period == 2
    assert bank.d == (0.0, 0.0, 0.0)
    assert bank.log_s == (-math.inf,) * 3
    with pytest.raises(ValueError):
        bank_init([])
    with pytest.raises(ValueError):
        bank_init([(PRE, POST), (IpidLaw((Gaussian(0.0, 1.0),)), IpidLaw((Gaussian(1.0, 1.0),)))])


def test_dist_step_matches_single_stream_bitwise():
    """Each stream's statistic is the single-stream recursion, bit for bit."""
    rng = np.random.default_rng(31)
    ticks = np.column_stack([sample_law(POST, 50, rng) for _ in range(3)])
    bank = bank_init(STREAMS)
    singles = [cusum_init() for _ in range(3)]
    for row in ticks:
        bank = dist_step(bank, row)
        for j in range(3):
            singles[j] = cusum_step(singles[j], row[j], PRE, POST)
            assert bank.d[j] == singles[j].w


def test_dist_step_wrong_width():
    bank = bank_init(STREAMS)
    with pytest.raises(ValueError):
        dist_step(bank, [0.1, 0.2])


def test_dist_step_error_names_stream():
    poisson_pair = (IpidLaw((Poisson(2.0), Poisson(5.0))), IpidLaw((Poisson(6.0), Poisson(15.0))))
    bank = bank_init((poisson_pair, poisson_pair))
    with pytest.raises(ValueError, match="stream 2"):
        dist_step(bank, [1.0, 2.5])


def test_streams_are_independent_under_perturbation():
    rng = np.random.default_rng(4)
    ticks = np.column_stack([sample_law(PRE, 40, rng) for _ in range(3)])
    bumped = ticks.copy()
    bumped[:, 1] += 2.0  # perturb stream 2 only
    bank_a = bank_init(STREAMS)
    bank_b = bank_init(STREAMS)
    for row_a, row_b in zip(ticks, bumped):
        bank_a = dist_step(bank_a, row_a)
        bank_b = dist_step(bank_b, row_b)
        for j in (0, 2):
            assert bank_a.d[j] == bank_b.d[j]
            assert bank_a.log_s[j] == bank_b.log_s[j]
    assert bank_a.d[1] != bank_b.d[1]


def test_stop_rules_non_strict():
    from pcusum.distributed import StreamBank
    # beta * m = 1 puts the log threshold at exactly 0.0
    bank = StreamBank(streams=STREAMS, n=3, d=(0.0, -5.0, -5.0), log_s=(-1.0, -1.0, -1.0))
    assert stop_dm(bank, beta=1.0 / 3.0)
    below = StreamBank(streams=STREAMS, n=3, d=(-1e-12, -5.0, -5.0), log_s=(-1.0, -1.0, -1.0))
    assert not stop_dm(below, beta=1.0 / 3.0)
    one = StreamBank(streams=STREAMS[:1], n=1, d=(0.0,), log_s=(0.0,))
    assert stop_srd(one, beta=1.0)


def test_run_bank_finds_changed_stream():
    rng = np.random.default_rng(6)
    cols = [sample_law(PRE, 120, rng) for _ in range(3)]
    cols[2] = np.concatenate([cols[2][:20], sample_law(POST, 100, rng, start=21)])
    ticks = np.column_stack(cols)
    run = run_bank(STREAMS, ticks, beta=40.0, record_trajectory=True)
    assert run.stop_time_dm is not None
    assert run.stop_time_dm > 20
    assert run.argmax_stream == 2
    assert run.stop_time_srd is not None
    assert run.stop_time_srd <= run.stop_time_dm
    assert all(len(row) == 2 + 3 * 3 for row in run.trajectory)


def test_run_bank_no_change_censors():
    rng = np.random.default_rng(60)
    ticks = np.column_stack([sample_law(PRE, 60, rng) for _ in range(3)])
    run = run_bank(STREAMS, ticks, beta=1e8)
    assert run.stop_time_dm is None
    assert run.stop_time_srd is None
    assert run.n_seen == 60
    assert math.isfinite(log_sr_total(run.final_bank))
    with pytest.raises(ValueError):
        run_bank(STREAMS, [], beta=10.0)
    with pytest.raises(ValueError):
        run_bank(STREAMS, ticks, beta=-1.0)
