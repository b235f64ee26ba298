import json

import numpy as np
import pytest

from nlhrv.cli import main


def test_seed_is_required(capsys):
    with pytest.raises(SystemExit) as info:
        main(["synth", "--kind", "ar1"])
    assert info.value.code == 2
    assert "--seed" in capsys.readouterr().err


def test_synth_analyze_calibrate_surrogate(tmp_path):
    rr = tmp_path / "x.txt"
    assert main(["synth", "--kind", "ar1", "--phi", "0.5", "--n", "320", "--seed", "4", "-o", str(rr)]) == 0
    lines = rr.read_text().splitlines()
    assert lines[0].startswith("#") and lines[1] == "rr_ms" and len(lines) == 322
    vals = np.array([float(v) for v in lines[2:]])
    assert vals.mean() == pytest.approx(800) and vals.std(ddof=1) == pytest.approx(50)

    out = tmp_path / "a.json"
    args = ["analyze", str(rr), "--seed", "9", "--ns", "20", "--n-phi", "50", "--reps", "5", "-o", str(out)]
    assert main(args) == 0
    doc = json.loads(out.read_text())
    assert set(doc["subject"]["results"]) == {"NCI", "IS", "GLC"}
    assert doc["params"]["n_s"] == 20 and doc["config"]["window_len"] == 300
    first = out.read_bytes()
    assert main(args) == 0 and out.read_bytes() == first

    table = tmp_path / "c.txt"
    assert main(["calibrate", str(rr), "--seed", "1", "--n-phi", "50", "--reps", "5", "-o", str(table)]) == 0
    assert table.read_text().startswith("# bin_center c_value\n")

    sdir = tmp_path / "surr"
    assert main(["surrogate", str(rr), "--seed", "1", "--ns", "3", "-o", str(sdir)]) == 0
    assert json.loads((sdir / "manifest.json").read_text())["n_s"] == 3


def test_analyze_reports_skip(tmp_path, capsys):
    rr = tmp_path / "short.txt"
    main(["synth", "--kind", "white_gaussian", "--n", "100", "--seed", "1", "-o", str(rr)])
    assert main(["analyze", str(rr), "--seed", "1"]) == 1
    assert "insufficient data" in capsys.readouterr().out


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("800\nabc\n")
    assert main(["analyze", str(bad), "--seed", "1"]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["synth", "--kind", "ar1", "--seed", "1", "--offset", "0"]) == 1


def test_cohort_command(tmp_path, fixtures_dir):
    out = tmp_path / "rep"
    args = ["cohort", str(fixtures_dir / "manifest.csv"), "--seed", "5", "--ns", "20",
            "--n-phi", "50", "--reps", "5", "-o", str(out)]
    assert main(args) == 0
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "subject,group,condition,measure,value,delta,rejected,seed"
    assert len(rows) == 1 + 24 * 3
