import csv
import subprocess
import sys

import numpy as np
import pytest

from aoisched.cli import main
from aoisched.policy_io import load_policy_bin

# small scenario so CLI solves finish in well under a second
CONFIG = """
delta_max = 6
battery_levels = 5
snr_db = 50
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(CONFIG)
    return str(path)


@pytest.fixture()
def solved_dir(tmp_path, config_file):
    out = tmp_path / "solve"
    rc = main(["solve", "--config", config_file, "--out", str(out), "--quiet"])
    assert rc == 0
    return out


def read_data_lines(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    data = [l for l in lines if not l.startswith("#")]
    return meta, data


def test_solve_writes_artifacts(solved_dir, small_kernel):
    for name in ("policy.bin", "policy.csv", "value.csv", "solvelog.csv"):
        assert (solved_dir / name).exists(), name
    policy = load_policy_bin(solved_dir / "policy.bin")
    assert len(policy) == small_kernel.n_states
    meta, data = read_data_lines(solved_dir / "policy.csv")
    assert any(l.startswith("# command: aoisched solve") for l in meta)
    assert any(l.startswith("# config: ") for l in meta)
    assert any(l.startswith("# content-sha1: ") for l in meta)
    assert data[0] == "state_index,delta1,delta2,e1,e2,action_code,scheme,action"
    assert len(data) == small_kernel.n_states + 1
    # solve log ends converged
    _, log = read_data_lines(solved_dir / "solvelog.csv")
    assert log[-1].startswith("improve")
    assert log[-1].endswith(",0")
    residuals = [float(l.split(",")[2]) for l in log if l.startswith("eval")]
    assert residuals[-1] < 1e-3


def test_solve_preset_restricts_codes(tmp_path, config_file):
    out = tmp_path / "wetoma"
    rc = main(["solve", "--config", config_file, "--out", str(out),
               "--preset", "wet-oma", "--quiet"])
    assert rc == 0
    policy = load_policy_bin(out / "policy.bin")
    assert set(np.unique(policy)) <= {0, 1, 2}


def test_solve_unwritable_dir(config_file):
    rc = main(["solve", "--config", config_file, "--out", "/proc/nope", "--quiet"])
    assert rc == 2


def test_solve_bad_config(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("gamma = 1.0\n")
    rc = main(["solve", "--config", str(bad), "--out", str(tmp_path / "x"), "--quiet"])
    assert rc == 2


def test_solve_determinism(tmp_path, config_file):
    out = tmp_path / "det"
    argv = ["solve", "--config", config_file, "--out", str(out), "--seed", "7", "--quiet"]
    assert main(argv) == 0
    first = {n: (out / n).read_bytes() for n in
             ("policy.bin", "policy.csv", "value.csv", "solvelog.csv")}
    assert main(argv) == 0
    for name, blob in first.items():
        assert (out / name).read_bytes() == blob, name


def test_export_policy_grid(tmp_path, config_file, solved_dir, small_kernel):
    out = tmp_path / "grid.csv"
    rc = main(["export-policy", "--config", config_file,
               "--policy", str(solved_dir / "policy.bin"),
               "--e1", "0", "--e2", "0", "--out", str(out), "--quiet"])
    assert rc == 0
    _, data = read_data_lines(out)
    assert data[0] == "delta1,delta2,scheme_code,action"
    rows = [l.split(",") for l in data[1:]]
    dmax = small_kernel.params.delta_max
    assert len(rows) == dmax * dmax
    # empty batteries leave WET (grid code 3) as the only feasible scheme
    assert {r[2] for r in rows} == {"3"}


def test_export_policy_out_of_range_slice(tmp_path, config_file, solved_dir):
    rc = main(["export-policy", "--config", config_file,
               "--policy", str(solved_dir / "policy.bin"),
               "--e1", "0", "--e2", "99", "--out", str(tmp_path / "g.csv"), "--quiet"])
    assert rc == 2


def test_simulate_happy_path(tmp_path, config_file, solved_dir):
    out = tmp_path / "report.csv"
    rc = main(["simulate", "--config", config_file,
               "--policy", str(solved_dir / "policy.bin"),
               "--s0", "1,1,5,5", "--horizon", "100", "--episodes", "10",
               "--seed", "3", "--out", str(out), "--quiet"])
    assert rc == 0
    _, data = read_data_lines(out)
    header = data[0].split(",")
    values = data[1].split(",")
    row = dict(zip(header, values))
    assert 1.0 <= float(row["ewsaoi_mean"]) <= 6.0
    assert float(row["stderr"]) >= 0.0
    assert float(row["ci_low"]) <= float(row["ewsaoi_mean"]) <= float(row["ci_high"])


def test_simulate_malformed_s0(tmp_path, config_file, solved_dir):
    rc = main(["simulate", "--config", config_file,
               "--policy", str(solved_dir / "policy.bin"),
               "--s0", "1,1,5", "--out", str(tmp_path / "r.csv"), "--quiet"])
    assert rc == 2
    rc = main(["simulate", "--config", config_file,
               "--policy", str(solved_dir / "policy.bin"),
               "--s0", "0,1,5,5", "--out", str(tmp_path / "r.csv"), "--quiet"])
    assert rc == 2


def test_simulate_determinism_and_trace(tmp_path, config_file, solved_dir):
    out = tmp_path / "rep.csv"
    trace = tmp_path / "trace.csv"
    argv = ["simulate", "--config", config_file,
            "--policy", str(solved_dir / "policy.bin"),
            "--s0", "1,1,5,5", "--horizon", "50", "--episodes", "5",
            "--seed", "11", "--out", str(out), "--trace-out", str(trace), "--quiet"]
    assert main(argv) == 0
    blob = out.read_bytes()
    tblob = trace.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == blob
    assert trace.read_bytes() == tblob
    _, data = read_data_lines(trace)
    assert data[0] == "t,delta1,delta2,e1,e2,action_code,succ1,succ2"
    assert len(data) == 51


def test_sweep_single_cell(tmp_path, config_file):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", "--config", config_file, "--presets", "wet-oma",
               "--snrs", "50", "--s0", "1,1,5,5", "--horizon", "50",
               "--episodes", "5", "--out", str(out), "--quiet"])
    assert rc == 0
    _, data = read_data_lines(out)
    assert data[0] == "snr_db,preset,ewsaoi_mean,stderr"
    assert len(data) == 2
    assert data[1].startswith("50.0,wet-oma,")


def test_sweep_deduplicates_snrs(tmp_path, config_file, capsys):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", "--config", config_file, "--presets", "wet-oma",
               "--snrs", "50,50", "--s0", "1,1,5,5", "--horizon", "20",
               "--episodes", "2", "--out", str(out)])
    assert rc == 0
    _, data = read_data_lines(out)
    assert len(data) == 2
    assert "duplicate" in capsys.readouterr().err


def test_sweep_unknown_preset(tmp_path, config_file):
    rc = main(["sweep", "--config", config_file, "--presets", "wet-magic",
               "--snrs", "50", "--s0", "1,1,5,5", "--out", str(tmp_path / "s.csv"),
               "--quiet"])
    assert rc == 2


def test_validate_outage_table(tmp_path, config_file):
    out = tmp_path / "outage.csv"
    rc = main(["validate-outage", "--config", config_file, "--samples", "20000",
               "--seed", "2", "--out", str(out), "--quiet"])
    assert rc == 0
    _, data = read_data_lines(out)
    rows = list(csv.reader(data))
    assert rows[0][:4] == ["scheme", "action", "device", "analytic"]
    rows = rows[1:]
    # 2 OMA + 2 WET+OMA + 2 per NOMA split
    assert len(rows) == 4 + 2 * 9
    noma_rows = [r for r in rows if r[0] == "noma"]
    assert all(r[7] != "" for r in noma_rows)  # instantaneous-order column
    oma_rows = [r for r in rows if r[0] in ("oma", "wet+oma")]
    assert all(r[6] == "1" for r in oma_rows)  # pass at 4 stderr


def test_validate_outage_minimum_samples(tmp_path, config_file):
    rc = main(["validate-outage", "--config", config_file, "--samples", "500",
               "--out", str(tmp_path / "o.csv"), "--quiet"])
    assert rc == 2


def test_export_kernel(tmp_path, config_file, small_kernel):
    out = tmp_path / "kernel.csv"
    rc = main(["export-kernel", "--config", config_file, "--out", str(out), "--quiet"])
    assert rc == 0
    _, data = read_data_lines(out)
    assert data[0] == "state_index,action_code,next_state_index,probability"
    # per-pair sums reach 1 within 1e-12
    sums = {}
    for line in data[1:]:
        s, a, _, p = line.split(",")
        sums[(s, a)] = sums.get((s, a), 0.0) + float(p)
    assert len(sums) == int(small_kernel.feasible.sum())
    assert max(abs(v - 1.0) for v in sums.values()) <= 1e-12


def test_console_entry_point(tmp_path, config_file):
    out = tmp_path / "ep"
    proc = subprocess.run(
        [sys.executable, "-m", "aoisched", "solve", "--config", config_file,
         "--out", str(out), "--quiet"],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert (out / "policy.bin").exists()
