import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opendicke.cli import SWEEP_HEADER, RunConfig, run_cli


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def parse_csv(text):
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, value = line[2:].split(" = ", 1)
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


REF = ["--omega", "1", "--kappa", "1", "--delta-kappa", "0.5"]


def test_ep_check_exceptional():
    code, out, _ = run(["ep-check", *REF, "--delta", "ep", "--g", "critical"])
    assert code == 0
    meta, rows = parse_csv(out)
    assert rows[0]["defective"] == "true" and rows[0]["numerical_rank"] == "5"
    assert meta["delta_mode"] == "ep"
    assert float(meta["delta"]) == pytest.approx(1.5754525723006951, rel=1e-15)
    assert float(meta["g_c"]) == pytest.approx(1.0127947115923741, rel=1e-15)


def test_ep_check_json_non_exceptional():
    code, out, _ = run(["ep-check", *REF, "--delta", "1.0", "--format", "json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["rows"][0]["defective"] is False
    assert payload["meta"]["g"] == payload["meta"]["g_c"]


def test_report_non_exceptional():
    code, out, _ = run(["report", *REF, "--delta", "1.0", "--observables", "dn1,dn2,dnb"])
    assert code == 0
    meta, rows = parse_csv(out)
    assert meta["command"] == "report" and meta["delta_mode"] == "explicit"
    assert len(rows) == 6
    for row in rows:
        assert row["status"] == "fit"
        assert -1.1 <= float(row["exponent"]) <= -0.9


def test_fit_synthetic_cubic(tmp_path):
    eps = np.logspace(-3, -1, 9)
    path = tmp_path / "cube.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "y"])
        for e in eps:
            w.writerow([repr(float(e)), repr(float(e**3))])
    code, out, _ = run(["fit", "--input", str(path), "--column", "y"])
    assert code == 0
    _, rows = parse_csv(out)
    assert float(rows[0]["exponent"]) == pytest.approx(3.0, abs=1e-12)
    assert rows[0]["n_points"] == "9"


def test_sweep_then_refit(tmp_path):
    target = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", *REF, "--delta", "ep", "--points-per-decade", "10", "--out", str(target)])
    assert code == 0
    text = target.read_text()
    meta, rows = parse_csv(text)
    header = [line for line in text.splitlines() if not line.startswith("#")][0]
    assert header == ",".join(SWEEP_HEADER)
    assert len(rows) == 42 and all(r["status"] == "ok" for r in rows)
    assert {"omega", "kappa", "delta_kappa", "delta", "g_c", "version"} <= set(meta)
    code, out, _ = run(["fit", "--input", str(target), "--column", "dn1", "--phase", "normal"])
    assert code == 0
    _, fit = parse_csv(out)
    assert float(fit[0]["exponent"]) == pytest.approx(-2.0, abs=0.15)
    assert fit[0]["n_points"] == "21"


def test_sweep_failed_rows_have_empty_cells():
    code, out, _ = run(["sweep", *REF, "--delta", "ep", "--side", "superradiant",
                        "--eps-min", "0.1", "--eps-max", "1", "--points-per-decade", "5"])
    assert code == 0
    _, rows = parse_csv(out)
    bad = [r for r in rows if r["status"] != "ok"]
    assert bad
    assert all(r["adr"] == "" and r["dn1"] == "" for r in bad)


def test_spectrum_rows():
    code, out, _ = run(["spectrum", *REF, "--delta", "ep", "--side", "normal", "--points-per-decade", "5"])
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 11
    first = rows[0]
    assert float(first["im1"]) == pytest.approx(-float(first["im2"]))
    assert float(first["adr"]) == pytest.approx(-float(first["re1"]))


def test_noise_rows():
    code, out, _ = run(["noise", *REF, "--delta", "1.0", "--g", "critical", "--freq-points-per-decade", "5"])
    assert code == 0
    _, rows = parse_csv(out)
    omega = np.array([float(r["omega"]) for r in rows])
    s11 = np.array([float(r["s11"]) for r in rows])
    slope = np.polyfit(np.log(omega), np.log(s11), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.2)


def test_domain_error_exit_code():
    code, out, err = run(["ep-check", "--kappa", "0.5", "--delta-kappa", "1.0", "--delta", "1"])
    assert code == 1 and out == ""
    assert "delta_kappa" in err


def test_bad_frequency_window_exit_code():
    code, out, err = run(["noise", *REF, "--freq-min", "0", "--g", "critical"])
    assert code == 1 and out == ""
    assert "freq_min" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["report", "--no-such-flag"],
        ["report", "--omega", "abc"],
        ["report", "--format", "xml"],
        ["fit", "--column", "y"],
    ],
)
def test_usage_errors_exit_2(argv):
    code, _, _ = run(argv)
    assert code == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reference\nomega = 1\nkappa = 1\ndelta_kappa = 0.5\ndelta = 1.0\n")
    code, out, _ = run(["ep-check", "--config", str(cfg)])
    assert code == 0
    assert parse_csv(out)[1][0]["defective"] == "false"
    code, out, _ = run(["ep-check", "--config", str(cfg), "--delta", "ep"])
    assert parse_csv(out)[1][0]["defective"] == "true"


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("omegaa = 1\n")
    code, _, err = run(["report", "--config", str(cfg)])
    assert code == 2 and "omegaa" in err


def test_byte_identical_runs(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path, workers in zip(paths, ("1", "4")):
        assert run(["report", *REF, "--delta", "ep", "--workers", workers, "--out", str(path)])[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opendicke", "ep-check", "--g", "critical"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "2,5,1,true" in proc.stdout


finite = st.floats(1e-6, 1e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    omega=finite,
    kappa=finite,
    delta=st.just("ep") | finite,
    g=st.just("critical") | finite,
    side=st.sampled_from(["normal", "superradiant", "both"]),
    ppd=st.integers(5, 50),
    fmt=st.sampled_from(["csv", "json"]),
    out=st.none() | st.text("abcxyz_./", min_size=1, max_size=12),
    slow_tol=st.none() | finite,
)
def test_config_round_trip(omega, kappa, delta, g, side, ppd, fmt, out, slow_tol):
    cfg = RunConfig(omega=omega, kappa=kappa, delta=delta, g=g, side=side,
                    points_per_decade=ppd, format=fmt, out=out, slow_tol=slow_tol)
    assert RunConfig.parse(cfg.serialize()) == cfg
