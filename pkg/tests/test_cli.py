import io
import json
import math

import numpy as np
import pytest

from pcusum.cli import EXIT_ALARM, EXIT_ERROR, EXIT_NO_ALARM, main
from pcusum.model import load_law

GAUSS_PRE = {"period": 2, "family": "gaussian",
             "params": [{"mean": 0.0, "variance": 1.0}, {"mean": 0.0, "variance": 1.0}]}
GAUSS_POST = {"period": 2, "family": "gaussian",
              "params": [{"mean": 1.0, "variance": 1.0}, {"mean": 0.5, "variance": 1.0}]}


def _write_csv(path, values, header=None, with_index=True):
    with open(path, "w") as fh:
        if header:
            fh.write(header + "\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{v}\n" if with_index else f"{v}\n")


def _write_laws(tmp_path):
    pre = tmp_path / "pre.json"
    post = tmp_path / "post.json"
    pre.write_text(json.dumps(GAUSS_PRE))
    post.write_text(json.dumps(GAUSS_POST))
    return str(pre), str(post)


def test_fit_writes_expected_law(tmp_path):
    data = tmp_path / "train.csv"
    _write_csv(data, [1, 3, 10, 14], header="index,value")
    out = tmp_path / "fitted.json"
    code = main(["fit", "--data", str(data), "--period", "4", "--batches", "2,2",
                 "--family", "poisson", "--post-scale", "--out", str(out)])
    assert code == EXIT_NO_ALARM
    law = load_law(out)
    assert [d.rate for d in law.phases] == [2.0, 2.0, 12.0, 12.0]
    post = load_law(tmp_path / "fitted_post.json")
    assert [d.rate for d in post.phases] == [6.0, 6.0, 36.0, 36.0]


def test_fit_default_singleton_batches(tmp_path):
    data = tmp_path / "train.csv"
    _write_csv(data, [2, 4, 6], with_index=False)
    out = tmp_path / "law.json"
    assert main(["fit", "--data", str(data), "--period", "3",
                 "--family", "poisson", "--out", str(out)]) == EXIT_NO_ALARM
    assert [d.rate for d in load_law(out).phases] == [2.0, 4.0, 6.0]


def test_fit_non_integer_count_reports_row(tmp_path, capsys):
    data = tmp_path / "train.csv"
    _write_csv(data, [1, 2.5, 3, 4], header="index,value")
    code = main(["fit", "--data", str(data), "--period", "4", "--family", "poisson",
                 "--out", str(tmp_path / "law.json")])
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "row 3" in err  # header is row 1, offending count on row 3


def test_detect_alarm_and_artifacts(tmp_path):
    pre, post = _write_laws(tmp_path)
    rng = np.random.default_rng(8)
    xs = np.concatenate([rng.normal(0, 1, 30), rng.normal(1.0, 1, 60)])
    data = tmp_path / "day.csv"
    _write_csv(data, [repr(float(v)) for v in xs])
    out = tmp_path / "traj.csv"
    code = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                 "--threshold", "5", "--out", str(out)])
    assert code == EXIT_ALARM
    lines = out.read_text().splitlines()
    assert lines[0] == "n,phase,x,Z,W"
    assert (tmp_path / "traj.png").exists()


def test_detect_no_alarm_exit_zero(tmp_path):
    pre, post = _write_laws(tmp_path)
    rng = np.random.default_rng(9)
    data = tmp_path / "null.csv"
    _write_csv(data, [repr(float(v)) for v in rng.normal(0, 1, 80)])
    out = tmp_path / "traj.csv"
    code = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                 "--threshold", "20", "--out", str(out), "--no-figure"])
    assert code == EXIT_NO_ALARM
    assert not (tmp_path / "traj.png").exists()


def test_detect_beta_equals_log_threshold(tmp_path):
    pre, post = _write_laws(tmp_path)
    rng = np.random.default_rng(10)
    data = tmp_path / "day.csv"
    _write_csv(data, [repr(float(v)) for v in rng.normal(0.8, 1, 100)])
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    code_a = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                   "--threshold", str(math.log(150.0)), "--out", str(out_a), "--no-figure"])
    code_b = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                   "--beta", "150", "--out", str(out_b), "--no-figure"])
    assert code_a == code_b
    assert out_a.read_bytes() == out_b.read_bytes()


def test_detect_reads_stdin(tmp_path, monkeypatch):
    pre, post = _write_laws(tmp_path)
    monkeypatch.setattr("sys.stdin", io.StringIO("1,2.0\n2,2.0\n3,2.0\n"))
    out = tmp_path / "traj.csv"
    code = main(["detect", "--pre", pre, "--post", post, "--data", "-",
                 "--threshold", "1", "--out", str(out), "--no-figure"])
    assert code == EXIT_ALARM


def test_detect_missing_file_is_error(tmp_path, capsys):
    pre, post = _write_laws(tmp_path)
    code = main(["detect", "--pre", pre, "--post", post, "--data",
                 str(tmp_path / "nope.csv"), "--threshold", "3"])
    assert code == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_detect_bad_cell_reports_row(tmp_path, capsys):
    pre, post = _write_laws(tmp_path)
    data = tmp_path / "day.csv"
    data.write_text("index,value\n1,0.5\n2,oops\n")
    code = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                 "--threshold", "3", "--out", str(tmp_path / "t.csv")])
    assert code == EXIT_ERROR
    assert "row 3" in capsys.readouterr().err


def test_multi_subcommand(tmp_path):
    pre, _ = _write_laws(tmp_path)
    bank = tmp_path / "bank.json"
    down = {"period": 2, "family": "gaussian",
            "params": [{"mean": -1.0, "variance": 1.0}, {"mean": -0.5, "variance": 1.0}]}
    bank.write_text(json.dumps([GAUSS_POST, down]))
    rng = np.random.default_rng(12)
    xs = np.concatenate([rng.normal(0, 1, 20), rng.normal(1.0, 1, 80)])
    data = tmp_path / "day.csv"
    _write_csv(data, [repr(float(v)) for v in xs])
    out = tmp_path / "multi.csv"
    code = main(["multi", "--pre", pre, "--posts", str(bank), "--data", str(data),
                 "--beta", "50", "--out", str(out)])
    assert code == EXIT_ALARM
    header = out.read_text().splitlines()[0]
    assert header == "n,phase,x,W1,W2,logR1,logR2"
    assert (tmp_path / "multi.png").exists()
    # sr rule never fires later than the max rule, so it also alarms here
    assert main(["multi", "--pre", pre, "--posts", str(bank), "--data", str(data),
                 "--beta", "50", "--rule", "sr", "--out", str(out),
                 "--no-figure"]) == EXIT_ALARM


def test_distributed_subcommand(tmp_path):
    bank = tmp_path / "streams.json"
    bank.write_text(json.dumps([{"pre": GAUSS_PRE, "post": GAUSS_POST}] * 3))
    rng = np.random.default_rng(14)
    wide = rng.normal(0, 1, size=(90, 3))
    wide[25:, 1] += 1.0  # change in stream 2
    data = tmp_path / "wide.csv"
    with open(data, "w") as fh:
        fh.write("tick,s1,s2,s3\n")
        for i, row in enumerate(wide, start=1):
            fh.write(",".join([str(i)] + [repr(float(v)) for v in row]) + "\n")
    out = tmp_path / "bank.csv"
    code = main(["distributed", "--bank", str(bank), "--data", str(data),
                 "--beta", "50", "--out", str(out)])
    assert code == EXIT_ALARM
    header = out.read_text().splitlines()[0]
    assert header == "n,phase,x1,x2,x3,D1,D2,D3,logS1,logS2,logS3"


def test_distributed_column_mismatch(tmp_path, capsys):
    bank = tmp_path / "streams.json"
    bank.write_text(json.dumps([{"pre": GAUSS_PRE, "post": GAUSS_POST}] * 3))
    data = tmp_path / "wide.csv"
    data.write_text("1,0.1,0.2\n")  # tick + 2 streams, bank has 3
    code = main(["distributed", "--bank", str(bank), "--data", str(data), "--beta", "10"])
    assert code == EXIT_ERROR
    assert "row 1" in capsys.readouterr().err


def test_simulate_demo_reproducible(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args = ["simulate", "--threshold", "6", "--change-point", "50",
            "--horizon", "200", "--seed", "31"]
    code_a = main(args + ["--out", str(out_a), "--no-figure"])
    code_b = main(args + ["--out", str(out_b), "--no-figure"])
    assert code_a == code_b == EXIT_ALARM
    assert out_a.read_bytes() == out_b.read_bytes()


def test_simulate_requires_seed(capsys):
    assert main(["simulate", "--threshold", "6"]) == EXIT_ERROR
    assert "--seed" in capsys.readouterr().err


def test_simulate_never_change_no_alarm(tmp_path):
    out = tmp_path / "null.csv"
    code = main(["simulate", "--threshold", "12", "--horizon", "150",
                 "--seed", "7", "--out", str(out), "--no-figure"])
    assert code == EXIT_NO_ALARM
    assert out.exists()


def test_curve_demo(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(["curve", "--thresholds", "2,3", "--paths", "60",
                 "--seed", "41", "--out", str(out)])
    assert code == EXIT_NO_ALARM
    lines = out.read_text().splitlines()
    assert lines[0] == "A,log_mtfa_est,mtfa_ci,wadd_est,wadd_ci,theory_delay,censor_frac"
    assert len(lines) == 3
    assert (tmp_path / "curve.png").exists()
    rerun = tmp_path / "curve2.csv"
    main(["curve", "--thresholds", "2,3", "--paths", "60",
          "--seed", "41", "--out", str(rerun), "--no-figure"])
    assert out.read_bytes() == rerun.read_bytes()


def test_threshold_and_beta_mutually_exclusive(tmp_path, capsys):
    pre, post = _write_laws(tmp_path)
    data = tmp_path / "d.csv"
    _write_csv(data, ["0.1", "0.2"])
    code = main(["detect", "--pre", pre, "--post", post, "--data", str(data),
                 "--threshold", "3", "--beta", "20"])
    assert code == EXIT_ERROR


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "fit" in capsys.readouterr().out
