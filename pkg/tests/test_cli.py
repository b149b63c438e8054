import csv
import json
import math

import pytest

from jtongues import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(autouse=True)
def _no_env_threads(monkeypatch):
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_rotnum(capsys):
    assert run("rotnum", "--a", 2, "--b", 0, "--mu", 1, "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rho"] == pytest.approx(math.sqrt(3), abs=1e-9)
    assert run("rotnum", "--a", 0.5, "--b", 0, "--mu", 1, "--json") == 0
    assert json.loads(capsys.readouterr().out)["rho"] == 0.0
    assert run("rotnum", "--a", 0.5, "--b", 0.5, "--mu", 1, "--method", "direct", "--json") == 0
    assert abs(json.loads(capsys.readouterr().out)["rho"]) < 1e-3


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("rotnum", "--a", "x", "--b", 0, "--mu", 1)
    assert exc.value.code == 1
    assert run("rotnum", "--a", 1, "--b", 0, "--mu", 0) == 1
    assert run("sweep", "--a-range", 1, 1, "--b-range", 0, 1, "--grid", 3, 3, "--mu", 1,
               "--out", tmp_path / "s.csv") == 1
    assert run("sweep", "--a-range", 0, 1, "--b-range", 0, 1, "--grid", 1, 3, "--mu", 1,
               "--out", tmp_path / "s.csv") == 1
    assert run("trace", "--mu", 1, "--out", tmp_path / "t.csv") == 1


def test_numeric_failure_exit_code(tmp_path):
    rc = run("rotnum", "--a", 0.5, "--b", 1, "--mu", 0.001, "--min-step", 0.05, "--max-step", 0.1)
    assert rc == 2


def test_io_error_leaves_nothing(tmp_path):
    out = tmp_path / "missing" / "s.csv"
    assert run("slowcurve", "--a", 1, "--b", 1, "--out", out) == 3
    assert not out.exists()


def test_sweep_closed_form_and_manifest(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--a-range", 1.5, 3, "--b-range", 0, 1, "--grid", 3, 3, "--mu", 1,
               "--out", out, "--threads", 1) == 0
    rows = read_csv(out)
    assert len(rows) == 9
    assert [float(r["a"]) for r in rows[:3]] == [1.5, 1.5, 1.5]
    for r in rows:
        if float(r["b"]) == 0.0:
            a = float(r["a"])
            assert float(r["rho"]) == pytest.approx(math.sqrt(a * a - 1), abs=1e-9)
        if r["class"] == "hyperbolic":
            assert float(r["rho"]) == round(float(r["rho"]))
    man = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert man["command"] == "sweep" and man["integrator"]["rel_tol"] == 1e-10
    assert len(man["sha256"]) == 64


def test_sweep_config_file(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"a_range": [0, 2], "b_range": [0, 2], "grid": [2, 2], "mu": 1.0}))
    assert run("sweep", "--config", cfg, "--out", tmp_path / "s.csv") == 0
    assert len(read_csv(tmp_path / "s.csv")) == 4
    # explicit flags win over the file
    assert run("sweep", "--config", cfg, "--grid", 3, 2, "--out", tmp_path / "s2.csv") == 0
    assert len(read_csv(tmp_path / "s2.csv")) == 6


def test_threads_env_overrides_flag(monkeypatch):
    assert cli.worker_count(3) == 3
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.worker_count(3) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "two")
    with pytest.raises(cli.UsageError):
        cli.worker_count(None)


def test_fan_out_order():
    assert cli.fan_out(abs, list(range(-7, 3)), 3) == [abs(i) for i in range(-7, 3)]


def test_trace_and_rerun(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert run("trace", "--k", "0-1", "--side", "pi", "--mu", 1, "--b-max", 0.5, "--h", 0.05,
               "--out", out) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["k", "side", "b", "a", "residual", "method", "direction"]
    first = [r for r in rows if r["b"] == "0"]
    assert [(r["k"], float(r["a"])) for r in first] == [("0", 1.0), ("1", pytest.approx(math.sqrt(2)))]
    assert run("rerun", str(out) + ".manifest.json", "--out", tmp_path / "t2.csv") == 0
    assert "identical" in capsys.readouterr().out
    assert (tmp_path / "t2.csv").read_bytes() == out.read_bytes()


def test_bridges_and_empty(tmp_path):
    out = tmp_path / "b.csv"
    assert run("bridges", "--k", 1, "--mu", 1, "--b-max", 5, "--h", 0.02, "--out", out) == 0
    rows = read_csv(out)
    assert len(rows) == 1 and abs(float(rows[0]["a_star"]) - 1) < 1e-6
    assert run("bridges", "--k", 1, "--mu", 1, "--b-max", 1, "--h", 0.05, "--out", out) == 0
    assert out.read_text(encoding="utf-8").strip() == "k,b_star,a_star,residual_0,residual_pi"


def test_bessel(tmp_path):
    out = tmp_path / "j.csv"
    assert run("bessel", "--k", 0, "--mu", 1, "--b-range", 20, 60, "--n-points", 5, "--out", out) == 0
    rows = read_csv(out)
    assert len(rows) == 5 and all(float(r["parity_defect"]) < 1e-12 for r in rows)
    man = json.loads((tmp_path / "j.csv.manifest.json").read_text())
    assert man["exponent"] < 0


@pytest.mark.parametrize("a,b,region,n_comp,n_fold", [(3, 1, "A", 0, 0), (1, 1, "B", 1, 2), (0, 2, "C", 2, 4)])
def test_slowcurve(tmp_path, a, b, region, n_comp, n_fold):
    out = tmp_path / "c.csv"
    assert run("slowcurve", "--a", a, "--b", b, "--out", out) == 0
    rows = read_csv(out)
    folds = [r for r in rows if r["kind"] == "fold"]
    comps = {r["index"] for r in rows if r["kind"] == "component"}
    assert (len(comps), len(folds)) == (n_comp, n_fold)
    assert all(r["region"] == region for r in rows)
    assert all(float(r["residual"]) < 1e-10 for r in folds)


def test_csv_format(tmp_path):
    out = tmp_path / "s.csv"
    run("sweep", "--a-range", 0.1, 1.3, "--b-range", 0, 1, "--grid", 2, 2, "--mu", 0.7, "--out", out)
    text = out.read_bytes().decode("utf-8")
    assert text.splitlines()[0] == "a,b,rho,class,fit_residual"
    # 17 significant digits round-trip exactly
    assert "0.10000000000000001" in text
