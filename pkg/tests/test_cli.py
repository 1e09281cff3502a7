import csv
import json

import pytest

from dmfpo import cli, svg


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_validate_a(tmp_path):
    out = str(tmp_path / "a")
    assert cli.main(["validate", "--decomp", "A", "--grid", "31x31", "--out", out]) == 0
    data = rows(out + ".csv")
    assert len(data) == 961 and set(data[0]) == {"gamma", "tau", "fidelity"}
    assert min(float(r["fidelity"]) for r in data) >= 0.999
    text = (tmp_path / "a.svg").read_text(encoding="utf-8")
    assert text.startswith("<?xml") and text.rstrip().endswith("</svg>")
    embedded = svg.embedded_rows(text)
    assert embedded == [(float(r["gamma"]), float(r["tau"]), float(r["fidelity"])) for r in data]


def test_validate_is_byte_identical(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert cli.main(["validate", "--decomp", "B", "--grid", "5x7", "--out", out]) == 0
    assert open(a + ".csv", "rb").read() == open(b + ".csv", "rb").read()
    assert open(a + ".svg", "rb").read() == open(b + ".svg", "rb").read()


def test_validate_single_point(tmp_path):
    out = str(tmp_path / "p")
    args = ["validate", "--decomp", "A", "--grid", "1x1", "--gamma", "0", "--tau", "0", "--out", out]
    assert cli.main(args) == 0
    (row,) = rows(out + ".csv")
    assert float(row["fidelity"]) >= 0.999


def test_validate_threshold_failure(tmp_path):
    assert cli.main(["validate", "--grid", "3x3", "--threshold", "1.1",
                     "--out", str(tmp_path / "x")]) == 2


def test_validate_full_beyond_one(tmp_path):
    assert cli.main(["validate", "--decomp", "full", "--grid", "4x4", "--gamma", "1:3",
                     "--out", str(tmp_path / "f")]) == 0


def test_validate_input_errors(tmp_path, capsys):
    assert cli.main(["validate", "--gamma", "0:2", "--grid", "3x3",
                     "--out", str(tmp_path / "x")]) == 1
    assert "valid for gamma" in capsys.readouterr().err
    assert cli.main(["validate", "--grid", "1x3", "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit):
        cli.main(["validate", "--grid", "31by31"])


def test_validate_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["validate", "--grid", "2x2", "--out", str(blocker / "sub" / "x")]) == 1


def test_optimize_fit_pipeline(tmp_path):
    angles = tmp_path / "angles.csv"
    assert cli.main(["optimize", "--grid", "5x5", "--out", str(angles)]) == 0
    first = angles.read_bytes()
    assert cli.main(["optimize", "--grid", "5x5", "--out", str(angles)]) == 0
    assert angles.read_bytes() == first
    data = rows(angles)
    assert min(float(r["fidelity"]) for r in data) >= 0.9999
    surf = tmp_path / "surf.csv"
    seqfile = tmp_path / "fit.seq"
    assert cli.main(["fit", "--table", str(angles), "--out", str(surf), "--sequence", str(seqfile),
                     "--grid", "31x31"]) == 0
    assert {r["slot"] for r in rows(surf)} == {"theta1", "theta2"}
    assert seqfile.read_text().count("SQR") == 7


def test_optimize_nodes_file(tmp_path):
    nodes = tmp_path / "nodes.csv"
    nodes.write_text("gamma,tau\n0.2,3.0\n0.7,11.0\n")
    out = tmp_path / "a.csv"
    assert cli.main(["optimize", "--nodes", str(nodes), "--out", str(out)]) == 0
    assert {(r["gamma"], r["tau"]) for r in rows(out)} == {("0.2", "3.0"), ("0.7", "11.0")}


def test_optimize_bad_config(tmp_path):
    cfg = tmp_path / "ga.json"
    cfg.write_text(json.dumps({"population": 1}))
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 1


def test_optimize_unconverged_exit(tmp_path):
    cfg = tmp_path / "ga.json"
    cfg.write_text(json.dumps({"max_generations": 1, "population": 4, "elitism": 1}))
    assert cli.main(["optimize", "--config", str(cfg), "--grid", "2x2",
                     "--out", str(tmp_path / "a.csv")]) == 3


def test_dynamics_three_gammas(tmp_path):
    out = tmp_path / "dyn"
    assert cli.main(["dynamics", "--gamma", "0.33,0.66,0.99", "--n", "16", "--out", str(out)]) == 0
    csvs = sorted(p.name for p in out.glob("trajectory_*.csv"))
    assert len(csvs) == 3
    report = json.loads((out / "aed.json").read_text())
    assert report["schema"] == 1
    assert all(r["value_percent"] < 0.5 and r["n"] == 16 for r in report["dynamics"])
    data = rows(out / csvs[0])
    assert set(data[0]) == {"tau", "concurrence", "method", "gamma"}
    assert {r["method"] for r in data} == {"exact", "decomposition"}


def test_dynamics_preserve(tmp_path):
    out = tmp_path / "p"
    assert cli.main(["dynamics", "--gamma", "0.66", "--preserve", "on", "--method", "exact",
                     "--out", str(out)]) == 0
    data = rows(out / "preservation_gamma0.66.csv")
    full = [float(r["concurrence"]) for r in data[::2]]
    assert all(abs(c - 1) <= 1e-9 for c in full)


def test_dynamics_single_point(tmp_path):
    out = tmp_path / "one"
    assert cli.main(["dynamics", "--gamma", "0.5", "--n", "1", "--method", "exact",
                     "--out", str(out)]) == 0
    (row,) = rows(out / "trajectory_gamma0.5.csv")
    assert float(row["tau"]) == 0.0 and abs(float(row["concurrence"]) - 1) < 1e-12


def test_dynamics_physical_units(tmp_path):
    out = tmp_path / "hz"
    assert cli.main(["dynamics", "--gamma", "0.66", "--n", "3", "--method", "exact",
                     "--j-hz", "100", "--t-max", "0.001", "--out", str(out)]) == 0
    taus = [float(r["tau"]) for r in rows(out / "trajectory_gamma0.66.csv")]
    assert taus[-1] == pytest.approx(2 * 3.141592653589793 * 0.1)


def test_dynamics_bad_n(tmp_path):
    assert cli.main(["dynamics", "--n", "0", "--out", str(tmp_path / "d")]) == 1


def test_period(tmp_path, capsys):
    out = tmp_path / "period.csv"
    fit = tmp_path / "fit.json"
    assert cli.main(["period", "--n", "5", "--out", str(out), "--fit", str(fit)]) == 0
    data = rows(out)
    assert len(data) == 5
    assert all(float(r["rel_diff"]) <= 0.01 for r in data)
    report = json.loads(fit.read_text())
    assert report["schema"] == 1 and len(report["coefficients"]) == 4
    assert "cubic fit" in capsys.readouterr().out


def test_period_gamma_list(capsys):
    assert cli.main(["period", "--gamma", "0,1"]) == 0
    assert "8.88577" in capsys.readouterr().out
