import subprocess
import sys

import numpy as np
import pytest

from localent import cli, derivative_block, make_system, negativity_coeffs, thermal_state
from localent.errors import ParameterError
from localent.local_measures import local_density_report
from localent.validation import parse_sizes


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0] == cli.UNITS
    return lines[1].split(","), [list(map(float, l.split(","))) for l in lines[2:]]


def key_values(text):
    return {k.strip(): v.strip() for k, _, v in (l.partition("=") for l in text.splitlines() if "=" in l)}


class TestParseSizes:
    def test_log(self):
        s = parse_sizes("0.05:8:log24")
        assert len(s) == 24 and s[0] == pytest.approx(0.05) and s[-1] == pytest.approx(8)
        assert np.allclose(np.diff(np.log(s)), np.log(160) / 23)

    def test_lin_and_list(self):
        np.testing.assert_allclose(parse_sizes("0:1:lin5"), [0, 0.25, 0.5, 0.75, 1])
        np.testing.assert_allclose(parse_sizes("0.1,0.4"), [0.1, 0.4])

    def test_bad(self):
        with pytest.raises(ValueError):
            parse_sizes("0:1:cubic3")


class TestConfig:
    def test_defaults(self):
        cfg = cli.parse_config(["density"])
        assert (cfg.m, cfg.omega, cfg.center) == (1.0, 1.0, (0.0, 0.0))

    def test_file_and_precedence(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("# test\nalpha = 2.5\ncenter = 0.3,-0.2  # comment\nmode = thermal\ntemp = 0.4\n")
        cfg = cli.parse_config(["density", "--config", str(f)])
        assert cfg.alpha == 2.5 and cfg.center == (0.3, -0.2) and cfg.temp == 0.4
        assert cli.parse_config(["density", "--config", str(f), "--alpha", "1"]).alpha == 1.0

    def test_hyphenated_key(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("grid-n = 64\nsizes = 0.1,0.2\n")
        cfg = cli.parse_config(["fig1", "--config", str(f)])
        assert cfg.grid_n == 64 and cfg.sizes == [0.1, 0.2]

    def test_unknown_key(self, tmp_path, capsys):
        f = tmp_path / "run.cfg"
        f.write_text("alpah = 2\n")
        code, _, err = run(["density", "--config", str(f)], capsys)
        assert code == 2 and "alpah" in err and err.count("\n") == 1

    def test_malformed_line(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("alpha 2\n")
        with pytest.raises(ParameterError):
            cli.parse_config(["density", "--config", str(f)])


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["density", "--alpha", "-1"],
        ["density", "--alpha", "x"],
        ["fig2", "--tmin", "0"],
        ["density", "--jobs", "0"],
        ["nonsense"],
    ])
    def test_parameter_errors(self, argv, capsys):
        code, out, err = run(argv, capsys)
        assert code == 2 and out == "" and err.count("\n") == 1

    def test_budget(self, capsys):
        code, _, err = run(["fig1", "--grid-n", "5000", "--sizes", "1"], capsys)
        assert code == 4 and err.count("\n") == 1

    def test_region_too_large(self, capsys):
        code, _, err = run(["extract", "--a", "2"], capsys)
        assert code == 2 and err.count("\n") == 1

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "localent", "density", "--alpha", "-1"],
                             capture_output=True, text=True)
        assert res.returncode == 2 and len(res.stderr.splitlines()) == 1


class TestCommands:
    def test_density_matches_library(self, capsys):
        code, out, _ = run(["density", "--mode", "thermal", "--alpha", "2", "--temp", "0.5",
                            "--center", "0.3,-0.2"], capsys)
        assert code == 0
        kv = key_values(out)
        st = thermal_state(make_system(1, 1, 2), 0.5)
        rep = local_density_report(st, (0.3, -0.2))
        k = negativity_coeffs(derivative_block(st, (0.3, -0.2)))
        for key, ref in [("c", rep.c), ("n", rep.n), ("D1", k.D1), ("D2", k.D2), ("C1", k.C1),
                         ("optimal_a_over_b", rep.optimal_ratio)]:
            assert float(kv[key]) == pytest.approx(ref, rel=1e-9)

    def test_density_position_independent(self, capsys):
        args = ["density", "--mode", "thermal", "--alpha", "2", "--temp", "0.5"]
        a = key_values(run(args, capsys)[1])
        b = key_values(run(args + ["--center", "0.3,-0.2"], capsys)[1])
        for key in ("c", "n"):
            assert float(a[key]) == pytest.approx(float(b[key]), rel=1e-8)

    def test_density_pure_ratio(self, capsys):
        kv = key_values(run(["density", "--alpha", "10"], capsys)[1])
        assert kv["optimal_a_over_b"] == "nan"
        assert float(kv["c"]) == pytest.approx(2 * float(kv["n"]), rel=1e-8)

    def test_fig1(self, tmp_path, capsys):
        out = tmp_path / "fig1.csv"
        assert run(["fig1", "--alpha", "10", "--sizes", "0.05:8:log24", "--out", str(out)], capsys)[0] == 0
        header, rows = csv_rows(out.read_text())
        assert header == ["two_a", "S_full_bits", "S_twolevel_bits", "c_estimate"]
        assert len(rows) == 24
        S = [r[1] for r in rows]
        assert all(np.diff(S) >= 0)

    def test_fig2(self, capsys):
        code, out, _ = run(["fig2", "--alphas", "0.5,2", "--tmin", "0.1", "--tmax", "0.5", "--dt", "0.1"], capsys)
        header, rows = csv_rows(out)
        assert code == 0 and header == ["T", "alpha", "n_local", "c_local", "N_global"]
        assert len(rows) == 10
        assert [r[1] for r in rows] == [0.5] * 5 + [2.0] * 5
        for T, _, n, c, ng in rows:
            assert c == pytest.approx(2 * n, rel=1e-5, abs=1e-9)

    def test_float_format(self, capsys):
        out = run(["fig2", "--alphas", "2", "--tmin", "0.3", "--tmax", "0.3"], capsys)[1]
        assert out.splitlines()[2].split(",")[0] == "3.0000000000e-01"

    def test_reduce(self, capsys):
        code, out, _ = run(["reduce", "--alpha", "10", "--a", "0.05"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# two-qubit state")
        m = np.array([[complex(z) for z in l.split()] for l in lines[1:5]])
        assert abs(np.trace(m) - 1) <= 1e-9
        kv = key_values(out)
        assert float(kv["negativity"]) == pytest.approx(float(kv["concurrence"]) / 2, rel=1e-6)

    def test_extract(self, capsys):
        code, out, _ = run(["extract", "--alpha", "10", "--a", "0.05"], capsys)
        assert code == 0 and float(key_values(out)["relative_deviation"]) <= 0.01


class TestReproducibility:
    def test_byte_identical(self, tmp_path, capsys):
        args = ["fig2", "--alphas", "0.5,2", "--tmin", "0.05", "--tmax", "0.6", "--dt", "0.05"]
        paths = []
        for i, jobs in enumerate(("1", "1", "4")):
            p = tmp_path / f"run{i}.csv"
            assert run(args + ["--jobs", jobs, "--out", str(p)], capsys)[0] == 0
            paths.append(p.read_bytes())
        assert paths[0] == paths[1] == paths[2]

    def test_fig1_jobs(self, capsys):
        args = ["fig1", "--sizes", "0.1,1,4", "--grid-n", "96"]
        assert run(args, capsys)[1] == run(args + ["--jobs", "3"], capsys)[1]


def test_numerical_error_exit_code(monkeypatch, capsys):
    from localent.errors import ConsistencyError

    def boom(cfg):
        raise ConsistencyError("trace drifted")

    monkeypatch.setitem(cli.COMMANDS, "density", boom)
    code, _, err = run(["density"], capsys)
    assert code == 3 and err == "localent: error: trace drifted\n"
