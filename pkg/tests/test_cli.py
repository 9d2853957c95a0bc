import csv
import io
import json
import math
import subprocess
import sys

import pytest

from strongtherm import cli, report


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def zeta_rows(out):
    rows = {}
    for line in out.splitlines()[1:]:
        parts = line.split()
        rows.setdefault(parts[0], []).append((float(parts[1]), parts[-1]))
    return rows


class TestZeta:
    def test_origin(self, capsys):
        code, out, _ = run(capsys, "zeta", "--s", "0", "--nu", "1")
        assert code == 0
        value, route = zeta_rows(out)["zeta(0.0)"][0]
        assert value == 0.0
        assert route == "ClosedForm"

    def test_ds0(self, capsys):
        code, out, _ = run(capsys, "zeta", "--ds0", "--nu", "1")
        assert code == 0
        assert zeta_rows(out)["dzeta/ds(0)"][0][0] == pytest.approx(-6.2794469300261163, abs=1e-13)

    def test_both_routes(self, capsys):
        code, out, _ = run(capsys, "zeta", "--s", "0.75", "--nu", "1", "--route", "both")
        assert code == 0
        rows = zeta_rows(out)["zeta(0.75)"]
        assert [r[1] for r in rows] == ["DirectSeries", "IntegralContinuation"]
        assert abs(rows[0][0] - rows[1][0]) <= 1e-10

    def test_operator_form(self, capsys):
        code, out, _ = run(capsys, "zeta", "--ds0", "--beta", "2", "--omega", "3")
        assert code == 0
        assert zeta_rows(out)["half_operator_zeta_prime(0)"][0][0] == pytest.approx(
            -2.99751817063104047, abs=1e-14)

    @pytest.mark.parametrize("argv", [
        ("zeta", "--s", "0.5", "--nu", "1"),
        ("zeta", "--s", "1", "--nu", "-1"),
        ("zeta", "--s", "2", "--nu", "1", "--route", "continued"),
        ("zeta", "--nu", "1"),
        ("zeta", "--s", "2"),
    ])
    def test_domain_exit(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2
        assert "error" in err

    def test_bad_flag(self, capsys):
        assert run(capsys, "zeta", "--bogus")[0] == 2


class TestThermo:
    def test_strong_paper(self, capsys):
        code, out, _ = run(capsys, "thermo", "--beta", "1", "--omega", "1", "--lambda", "1",
                           "--method", "strong", "--mode", "paper")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1
        assert tuple(rows[0]) == report.CSV_COLUMNS
        assert float(rows[0]["lnZ"]) == pytest.approx(0.497846865955182407, abs=1e-15)

    def test_oracle_matches_free_at_zero_coupling(self, capsys):
        _, oracle_out, _ = run(capsys, "thermo", "--lambda", "0", "--method", "oracle")
        _, free_out, _ = run(capsys, "thermo", "--lambda", "0", "--method", "free")
        a = float(next(csv.DictReader(io.StringIO(oracle_out)))["lnZ"])
        b = float(next(csv.DictReader(io.StringIO(free_out)))["lnZ"])
        assert abs(a - b) <= 1e-8

    def test_config_matches_flags(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep\nbeta = 0.5,1\nomega = 1\nlambda = 1, 10  # two couplings\n"
            "method = strong,free\nmode = both\n", encoding="utf-8")
        a_path, b_path = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "thermo", "--config", str(cfg), "-o", str(a_path))[0] == 0
        assert run(capsys, "thermo", "--beta", "0.5,1", "--omega", "1", "--lambda", "1,10",
                   "--method", "strong,free", "--mode", "both", "-o", str(b_path))[0] == 0
        assert a_path.read_bytes() == b_path.read_bytes()

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda = 1\nmethod = strong\nmode = paper\n", encoding="utf-8")
        _, out, _ = run(capsys, "thermo", "--config", str(cfg), "--lambda", "4")
        assert float(next(csv.DictReader(io.StringIO(out)))["lnZ"]) == pytest.approx(
            0.497846865955182407 / 2, abs=1e-15)

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("temperature = 3\n", encoding="utf-8")
        code, _, err = run(capsys, "thermo", "--config", str(cfg))
        assert code == 2
        assert "unknown key" in err

    def test_missing_config(self, capsys, tmp_path):
        assert run(capsys, "thermo", "--config", str(tmp_path / "none.cfg"))[0] == 2

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "thermo", "--omega", "-1", "--method", "free")
        assert code == 2

    def test_oracle_convergence_exit(self, capsys):
        code, out, _ = run(capsys, "thermo", "--lambda", "50", "--beta", "0.05",
                           "--method", "oracle,free", "--basis-size", "8", "--basis-frequency", "1")
        assert code == 3
        assert "status=failed" in out

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "thermo", "--method", "free", "--format", "json")
        assert code == 0
        assert json.loads(out)["schema_version"] == 1


class TestCompare:
    def test_strong_point(self, capsys):
        code, out, _ = run(capsys, "compare", "--beta", "1", "--omega", "1", "--lambda", "100")
        assert code == 0
        inputs, reps = report.from_json(out)
        rep = reps[0]
        assert rep.result("strong:PaperEq45").ok and rep.result("strong:DerivedSeries").ok
        assert rep.result("oracle").ok
        assert any({m.a, m.b} == {"strong:PaperEq45", "oracle"} for m in rep.metrics)
        assert inputs["lambda"] == [100.0]

    def test_round_trip(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        assert run(capsys, "compare", "--lambda", "0.01,1", "-o", str(path))[0] == 0
        text = path.read_text(encoding="utf-8")
        inputs, reps = report.from_json(text)
        assert report.to_json(reps, inputs) == text

    @pytest.mark.parametrize("methods", ["", ","])
    def test_empty_methods(self, capsys, methods):
        code, _, err = run(capsys, "compare", "--method", methods)
        assert code == 2
        assert "empty" in err

    def test_plotdata(self, capsys):
        code, out, _ = run(capsys, "compare", "--lambda", "1,100", "--emit", "plotdata",
                           "--method", "strong,oracle")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert tuple(rows[0]) == report.PLOT_COLUMNS
        assert [float(r["lambda"]) for r in rows] == [1.0, 100.0]
        assert all(math.isfinite(float(r["lnZ_oracle"])) for r in rows)

    def test_deterministic(self, capsys):
        argv = ("compare", "--beta", "0.5,1", "--lambda", "0.1,10", "--threads", "4")
        first = run(capsys, *argv)[1]
        second = run(capsys, *argv)[1]
        assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "strongtherm", "zeta", "--s", "0.5", "--nu", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
    assert "pole" in proc.stderr
