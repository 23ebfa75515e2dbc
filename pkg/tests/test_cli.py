import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from nohsim.cli import main, parse_model, read_config, ConfigError
from nohsim.graph import generate_scale_free, save_edge_list
from nohsim.process import read_degree_csv, read_size_csv, read_snapshot_json
from nohsim.stats import REPORT_COLUMNS, read_histogram_csv, read_report_csv
from nohsim.theory import read_pmf_csv

SMALL = ["--n", "200", "--generator", "sw", "--k", "4", "--p", "0.3", "--t-lo", "300",
         "--t-hi", "600", "--burn-in", "300", "--sample-interval", "50",
         "--lambda", "0.01", "--mu", "0.005", "--replicas", "2"]


def files(d):
    out = {}
    for root, _, names in os.walk(d):
        for n in names:
            p = os.path.join(root, n)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, d)] = fh.read()
    return out


# --- theory -----------------------------------------------------------------

def test_theory_symmetric(capsys):
    assert main(["theory", "--n0", "1000", "--lambda", "0.005", "--mu", "0.005"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,prob,log_prob"
    assert len(out) == 1 + 1001 + 1
    assert out[-1] == "# E=500.0 D=250.0"


def test_theory_to_file(tmp_path, capsys):
    assert main(["theory", "--n0", "2000", "--lambda", "0.02", "--mu", "0.015",
                 "--out", str(tmp_path), "--rate-matrix"]) == 0
    line = capsys.readouterr().out.strip()
    e = float(line.split()[1].split("=")[1])
    assert round(e, 2) == 1142.86
    n, prob, _ = read_pmf_csv(tmp_path / "pmf.csv")
    assert len(n) == 2001 and abs(prob.sum() - 1) < 1e-10
    assert (tmp_path / "rate_matrix.csv").exists()


def test_theory_large_network_finite(tmp_path):
    assert main(["theory", "--n0", "334863", "--lambda", "0.01", "--mu", "0.013",
                 "--out", str(tmp_path)]) == 0
    _, _, logp = read_pmf_csv(tmp_path / "pmf.csv")
    assert len(logp) == 334864 and np.all(np.isfinite(logp))


def test_theory_invalid_params(capsys):
    assert main(["theory", "--n0", "10", "--lambda", "-1", "--mu", "0.1"]) == 1
    assert "lam" in capsys.readouterr().err


def test_rate_matrix_cap_is_config_error(tmp_path):
    assert main(["theory", "--n0", "5000", "--lambda", "1", "--mu", "1",
                 "--out", str(tmp_path), "--rate-matrix"]) == 1


# --- simulate ---------------------------------------------------------------

def test_simulate_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", *SMALL, "--snapshot-times", "100,450", "--seed", "3",
                 "--out", str(out)]) == 0
    names = files(out)
    assert {"sizes_r000.csv", "sizes_r001.csv", "online_degrees_r000.csv",
            "size_histogram.csv", "degree_histogram.csv", "summary.json"} <= set(names)
    assert os.path.join("snapshots", "r001_t450.json") in names
    sizes = read_size_csv(out / "sizes_r000.csv")
    assert sizes.t[0] == 0.0 and sizes.t[-1] == 600.0 and sizes.size[0] == 200
    degs = read_degree_csv(out / "online_degrees_r000.csv")
    assert [d[0] for d in degs] == [350.0, 400.0, 450.0, 500.0, 550.0, 600.0]
    snap = read_snapshot_json(out / "snapshots" / "r000_t100.json")
    assert snap["t"] == 100.0
    read_histogram_csv(out / "size_histogram.csv")
    summary = json.loads(names["summary.json"])
    assert summary["expected_size"] == pytest.approx(400 / 3)


def test_simulate_byte_identical_reruns(tmp_path):
    for d in ("a", "b"):
        assert main(["simulate", *SMALL, "--replicas", "1", "--seed", "9",
                     "--snapshot-times", "250", "--out", str(tmp_path / d)]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_simulate_workers_do_not_change_output(tmp_path):
    assert main(["simulate", *SMALL, "--seed", "2", "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", *SMALL, "--seed", "2", "--workers", "2",
                 "--out", str(tmp_path / "b")]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\ngenerator = sf\nn = 150\nm = 2\n"
                   "t_lo = 100\nt_hi = 200\nburn_in = 100\nsample_interval = 50\n"
                   "replicas = 1\nlambda = 0.02\nmu = 0.01\n")
    assert main(["simulate", "--config", str(cfg), "--n", "120",
                 "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["graph"] == {"description": "SF(m=2)", "n_vertices": 120,
                                "n_edges": 2 * 118 + 1}
    assert read_config(cfg)["lambda"] == "0.02"


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


@pytest.mark.parametrize("extra", [["--t-lo", "600"],            # zero-length window
                                   ["--k", "5"],                   # odd K
                                   ["--replicas", "0"],
                                   ["--lambda", "abc"],
                                   ["--initial-online", "2"]])
def test_simulate_config_errors(tmp_path, extra):
    assert main(["simulate", *SMALL, *extra, "--out", str(tmp_path / "o")]) == 1


def test_simulate_requires_out():
    assert main(["simulate", *SMALL]) == 1


def test_simulate_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", *SMALL, "--out", str(blocker / "sub")]) == 2


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nohsim", "theory", "--n0", "2",
                        "--lambda", "1", "--mu", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[1].startswith("0,0.25,")


# --- fit / compare ----------------------------------------------------------

@pytest.fixture
def target(tmp_path):
    path = tmp_path / "target.txt"
    save_edge_list(generate_scale_free(300, 3, seed=5), path)
    return path


FAST = ["--t-lo", "200", "--t-hi", "400", "--burn-in", "200", "--sample-interval", "50",
        "--replicas", "2"]


def test_fit_identity_model(target, capsys):
    # vertices almost never hidden: the online degrees reproduce the target
    assert main(["fit", str(target), "--lambda-grid", "1", "--mu-grid", "0.0001", *FAST]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert tuple(rows[0]) == ("lambda", "mu") + REPORT_COLUMNS
    assert rows[1][2] == "NOH(lambda=1, mu=0.0001)"
    kl = float(rows[1][3])
    assert kl < 0.01


def test_fit_ranking_is_sorted(target, capsys, tmp_path):
    assert main(["fit", str(target), "--lambda-grid", "0.01,1", "--mu-grid", "0.0001,0.02",
                 *FAST, "--out", str(tmp_path / "f")]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))[1:]
    kls = [float(r[3]) for r in rows]
    assert kls == sorted(kls) and len(rows) == 4
    assert (rows[0][0], rows[0][1]) == ("1.0", "0.0001")
    back = read_report_csv(tmp_path / "f" / "fit_report.csv")
    assert [round(r.kl, 4) for r in back] == kls


def test_fit_errors(target, tmp_path):
    assert main(["fit", str(target), "--lambda-grid", "", "--mu-grid", "0.1", *FAST]) == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 two\n")
    assert main(["fit", str(bad), "--lambda-grid", "0.1", "--mu-grid", "0.1", *FAST]) == 2
    assert main(["fit", str(tmp_path / "missing.txt"), "--lambda-grid", "0.1",
                 "--mu-grid", "0.1", *FAST]) == 2


def test_compare_single_model(target, capsys, tmp_path):
    assert main(["compare", str(target), "--model", "sf m=3", *FAST,
                 "--out", str(tmp_path / "c")]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert [r[0] for r in rows[1:]] == ["SF(m=3)", "Real"]
    reps = read_report_csv(tmp_path / "c" / "compare_report.csv")
    assert len(reps) == 2 and reps[1].kl is None


def test_compare_noh_and_synthetic_target(capsys):
    assert main(["compare", "--target", "nve n=400 nve_mu=1 nve_sigma=0.5",
                 "--model", "noh sf m=auto lambda=0.01 mu=0.013", *FAST]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[1][0].startswith("NOH(lambda=0.01, mu=0.013) on SF(m=")
    assert rows[2][0] == "Target NVE(mu=1, sigma=0.5)"
    assert len(rows[1]) == len(REPORT_COLUMNS)


def test_compare_rejects_odd_k(target, capsys):
    assert main(["compare", str(target), "--model", "sw k=5 p=0.4", *FAST]) == 1
    assert "even" in capsys.readouterr().err


def test_compare_requires_model(target):
    assert main(["compare", str(target), *FAST]) == 1


def test_parse_model():
    spec = parse_model("noh sf m=auto lambda=0.01 mu=0.013")
    assert spec.kind == "sf" and spec.params == {"m": "auto"}
    assert math.isclose(spec.noh.lam, 0.01) and math.isclose(spec.noh.mu, 0.013)
    assert parse_model("sw k=4 p=0.4").params == {"k": 4, "p": 0.4}
    for bad in ("", "er n=5", "sf m", "sf lambda=0.1", "noh sf m=5 lambda=0.1", "sf q=1"):
        with pytest.raises(ConfigError):
            parse_model(bad)
