import numpy as np
import pytest

from pcusum.detect import run_detector
from pcusum.model import Gaussian, IpidLaw, sample_law
from pcusum.report import plot_curve, plot_trajectory, write_curve, write_trajectory
from pcusum.sim import PerfPoint

PRE = IpidLaw((Gaussian(0.0, 1.0), Gaussian(0.0, 1.0)))
POST = IpidLaw((Gaussian(1.0, 1.0), Gaussian(0.5, 1.0)))


def _run(record=True):
    xs = sample_law(POST, 120, np.random.default_rng(3))
    return run_detector(xs, PRE, POST, threshold=4.0, record_trajectory=record)


def test_write_trajectory_round_trips_floats(tmp_path):
    run = _run()
    path = tmp_path / "traj.csv"
    write_trajectory(path, run)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,phase,x,Z,W"
    assert len(lines) == len(run.trajectory) + 1
    # repr formatting: parsing the last W back gives the exact float
    last_w = float(lines[-1].split(",")[4])
    assert last_w == run.trajectory[-1].w


def test_write_requires_recorded_trajectory(tmp_path):
    run = _run(record=False)
    with pytest.raises(ValueError):
        write_trajectory(tmp_path / "traj.csv", run)


def test_write_curve_censoring_column(tmp_path):
    points = [
        PerfPoint(threshold=3.0, mtfa=100.0, mtfa_ci=5.0, wadd=11.0, wadd_ci=0.5,
                  theory_delay=9.6, mtfa_censor_frac=0.0, wadd_censor_frac=0.02),
        PerfPoint(threshold=4.0, mtfa=260.0, mtfa_ci=12.0, wadd=14.0, wadd_ci=0.6,
                  theory_delay=12.8, mtfa_censor_frac=0.1, wadd_censor_frac=0.0),
    ]
    path = tmp_path / "curve.csv"
    write_curve(path, points)
    lines = path.read_text().splitlines()
    assert lines[0] == "A,log_mtfa_est,mtfa_ci,wadd_est,wadd_ci,theory_delay,censor_frac"
    # the larger of the two censoring fractions is reported
    assert lines[1].split(",")[-1] == "0.02"
    assert lines[2].split(",")[-1] == "0.1"


def test_figures_render_to_files(tmp_path):
    run = _run()
    fig_a = tmp_path / "traj.png"
    plot_trajectory(fig_a, run)
    assert fig_a.stat().st_size > 0
    points = [PerfPoint(3.0, 100.0, 5.0, 11.0, 0.5, 9.6, 0.0, 0.0),
              PerfPoint(4.0, 260.0, 12.0, 14.0, 0.6, 12.8, 0.0, 0.0)]
    fig_b = tmp_path / "curve.png"
    plot_curve(fig_b, points)
    assert fig_b.stat().st_size > 0
