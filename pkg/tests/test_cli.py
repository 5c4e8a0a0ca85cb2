import csv
import io
import json
import math

import pytest

from finitenet.cli import COLUMNS, SweepRequest, UsageError, main
from finitenet.metrics import NetworkModel, min_degree_dist


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("args, value", [
    (("--x", "0.5", "--y", "0.5", "--r", "0.2"), "0.1256637"),
    (("--x", "0", "--y", "0", "--r", "0.1"), "0.0078540"),
    (("--x", "0.05", "--y", "0.5", "--r", "0.1"), "0.0252741"),
])
def test_coverage(capsys, args, value):
    code, out, _ = run(capsys, "coverage", *args)
    assert code == 0
    assert f"F = {value}" in out


def test_coverage_effects(capsys):
    _, out, _ = run(capsys, "coverage", "--x", "0", "--y", "0", "--r", "0.1")
    assert "sides: 1, 2" in out and "vertices: 1" in out
    _, out, _ = run(capsys, "coverage", "--x", "0.5", "--y", "0.5", "--r", "0.2")
    assert "sides: none" in out and "vertices: none" in out


def test_coverage_bad_coordinate(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["coverage", "--x", "1.5", "--y", "0.5", "--r", "0.1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["coverage", "--x", "abc", "--y", "0.5", "--r", "0.1"])
    assert exc.value.code == 2


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "iso.csv"
    code, _, _ = run(capsys, "sweep", "--metric", "p_iso", "--n", "10,20", "--r-stop", "0.2",
                     "--r-step", "0.1", "--runs", "200", "--seed", "5", "--out", str(out))
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode("utf-8"))))
    assert list(rows[0].keys()) == list(COLUMNS)
    sources = {(r["metric"], r["source"]) for r in rows}
    assert sources == {("p_iso", "analytic"), ("p_iso", "simulated"), ("poisson_iso", "analytic")}
    assert len(rows) == 2 * 3 * 3
    keys = [(r["metric"], int(r["N"]), r["k"], float(r["r0"])) for r in rows]
    assert keys == sorted(keys)


def test_sweep_is_byte_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        main(["sweep", "--metric", "min_degree+kcon", "--n", "10", "--k", "1,2,3",
              "--r-start", "0.3", "--r-stop", "0.5", "--r-step", "0.1", "--runs", "300",
              "--seed", "11", "--out", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.DictReader(io.StringIO(paths[0].read_text())))
    assert {(r["metric"], r["k"]) for r in rows} >= {("kcon", "3"), ("min_degree", "1")}
    row = [r for r in rows if r["metric"] == "min_degree" and r["source"] == "analytic"
           and r["k"] == "2" and r["r0"] == "0.4"][0]
    assert float(row["value"]) == pytest.approx(min_degree_dist(NetworkModel(10, 0.4), 2),
                                                rel=1e-8)
    assert len(row["value"].replace("0.", "").lstrip("0")) <= 9


def test_sweep_json_round_trip(capsys):
    code, out, _ = run(capsys, "sweep", "--metric", "mean_degree,hd_approx", "--n", "5",
                       "--r-stop", "0.2", "--r-step", "0.1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert all(set(d) == set(COLUMNS) for d in data)
    assert {d["metric"] for d in data} == {"mean_degree", "hd_approx"}
    assert all(d["k"] is None and d["stderr"] is None for d in data)


def test_sweep_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--n", ""])
    assert exc.value.code == 2
    assert main(["sweep", "--n", "10", "--r-step", "0"]) == 2
    assert main(["sweep", "--n", "10", "--r-stop", "2.0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--n", "10", "--metric", "bogus"])
    assert exc.value.code == 2


def test_sweep_request_grid():
    req = SweepRequest(("p_iso",), (10,), (1,), 0.0, 0.6, 0.02, 0, 0)
    grid = req.grid()
    assert len(grid) == 31 and grid[-1] == 0.6
    with pytest.raises(UsageError):
        SweepRequest(("p_iso",), (), (1,), 0.0, 0.6, 0.02, 0, 0)


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--n", "10", "--r-stop", "0.1", "--r-step", "0.1",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code != 0 and "error" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "10", "--r", "0.3", "--k", "1,2",
                       "--kcon", "--runs", "500", "--seed", "3", "--format", "json")
    assert code == 0
    metrics = {(d["metric"], d["k"]) for d in json.loads(out)}
    assert metrics == {("p_iso", None), ("min_degree", 1), ("min_degree", 2),
                       ("kcon", 1), ("kcon", 2)}


def test_critical_range(capsys):
    code, out, _ = run(capsys, "critical", "--n", "50", "--k", "1", "--target", "0.99")
    assert code == 0
    r = float(out.split("r0_critical = ")[1].split()[0])
    achieved = float(out.split(": ")[1].split()[0])
    assert achieved >= 0.99
    assert min_degree_dist(NetworkModel(50, r), 1) >= 0.99


def test_critical_nodes_and_verification(capsys):
    code, out, _ = run(capsys, "critical", "--r", "1.5", "--k", "1", "--target", "0.9",
                       "--verify-runs", "100")
    assert code == 0
    assert "N_critical = 2" in out
    assert "simulated P_1-con: 1" in out


def test_critical_errors(capsys):
    code, _, err = run(capsys, "critical", "--n", "1", "--k", "1", "--target", "0.9")
    assert code == 2 and "N >= k + 1" in err
    code, _, err = run(capsys, "critical", "--r", "0", "--k", "1", "--target", "0.9")
    assert code == 2 and "isolated" in err
    assert run(capsys, "critical", "--k", "1", "--target", "0.9")[0] == 2


def test_partition_check(capsys):
    code, out, _ = run(capsys, "partition-check", "--r", "0.75")
    assert code == 0
    assert "case 5" in out and out.count("  R") == 7


def test_strict_escalates_accuracy_warning(capsys, monkeypatch):
    import finitenet.metrics as metrics
    from finitenet.quadrature import IntegrationSettings
    tight = IntegrationSettings(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
    monkeypatch.setattr(metrics, "DEFAULT_SETTINGS", tight)
    orig = metrics.p_isolation
    monkeypatch.setattr(metrics, "p_isolation",
                        lambda model, settings=tight, with_error=False: orig(model, settings))
    args = ["sweep", "--n", "10", "--r-start", "0.3", "--r-stop", "0.3", "--r-step", "0.1"]
    assert main(args) == 0
    assert main(["--strict"] + args) == 3
