import json
import math

import numpy as np
import pytest

from l1helmholtz import closed_form as cf
from l1helmholtz.cli import main
from l1helmholtz.grid import RadialGrid, RadialProfile
from l1helmholtz.io import dumps, read_profile_csv, write_profile_csv


class TestIO:
    def test_round_trip(self, tmp_path, minimizer4096):
        path = tmp_path / "p.csv"
        write_profile_csv(path, minimizer4096)
        back = read_profile_csv(path)
        assert back.grid == minimizer4096.grid
        np.testing.assert_array_equal(back.values, minimizer4096.values)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("x,y\n0,1\n1,0\n")
        with pytest.raises(ValueError):
            read_profile_csv(path)

    def test_nonuniform(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("r,value\n0,1\n0.3,1\n1,0\n")
        with pytest.raises(ValueError):
            read_profile_csv(path)

    def test_dumps_non_finite(self):
        assert json.loads(dumps({"a": float("nan"), "b": np.float64(2.0), "c": [np.int64(3)]})) == \
            {"a": None, "b": 2.0, "c": [3]}


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSolve:
    def test_outputs(self, tmp_path, capsys):
        code, out, _ = _run(capsys, "solve", "--beta", "1", "--out", str(tmp_path))
        assert code == 0
        rep = json.loads((tmp_path / "report.json").read_text())
        assert rep == json.loads(out)
        assert rep["mu"] * rep["R"] == pytest.approx(cf.geometry_constant(), rel=1e-12)
        assert rep["lambda"] < 0
        prof = read_profile_csv(tmp_path / "profile.csv")
        assert prof.grid.n == 4096

    @pytest.mark.parametrize("beta", ["0", "-1", "nan"])
    def test_bad_beta(self, capsys, beta):
        code, _, err = _run(capsys, "solve", "--beta", beta)
        assert code == 2 and "beta" in err

    def test_mesh_refinement(self, capsys):
        fs = []
        for n in ("4096", "8192"):
            _, out, _ = _run(capsys, "solve", "--beta", "1", "--n", n)
            fs.append(json.loads(out)["F_total"])
        assert abs(fs[1] - fs[0]) / fs[1] <= 1e-6

    def test_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"beta": 2.0, "n": 512}))
        code, out, _ = _run(capsys, "--config", str(cfg), "solve")
        assert code == 0
        rep = json.loads(out)
        assert rep["beta"] == 2.0 and rep["n"] == 512
        code, out, _ = _run(capsys, "--config", str(cfg), "solve", "--beta", "3")
        assert json.loads(out)["beta"] == 3.0

    def test_config_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        with pytest.raises(SystemExit) as exc:
            main(["--config", str(cfg), "solve", "--beta", "1"])
        assert exc.value.code == 2


class TestMinimize:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        runs = []
        for k in range(2):
            d = tmp_path / f"run{k}"
            code, _, _ = _run(capsys, "minimize", "--beta", "1", "--n", "300", "--seed", "3",
                              "--energy-tol", "1e-8", "--out", str(d))
            assert code == 0
            runs.append(d)
        for name in ("profile.csv", "energy.json", "trace.csv"):
            assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()
        rep = json.loads((runs[0] / "energy.json").read_text())
        assert rep["relerr_vs_closed_form"] < 1e-2
        header = (runs[0] / "trace.csv").read_text().splitlines()[0]
        assert header == "iter,total,kinetic,l1,l2err,tailmass"

    def test_zero_iters(self, capsys):
        code, _, _ = _run(capsys, "minimize", "--beta", "1", "--max-iters", "0")
        assert code == 2

    def test_degenerate_step_is_failure(self, capsys):
        code, _, err = _run(capsys, "minimize", "--beta", "1", "--n", "64", "--step", "100",
                            "--no-warm-start", "--max-iters", "10")
        assert code == 1 and "DegenerateProfileError" in err


class TestVerify:
    @pytest.mark.parametrize("beta", ["1", "3.7"])
    def test_passes(self, tmp_path, capsys, beta):
        out = tmp_path / "v.json"
        code, _, _ = _run(capsys, "verify", "--beta", beta, "--out", str(out))
        rep = json.loads(out.read_text())
        assert code == 0 and rep["all_passed"]
        assert set(rep["checks"]) >= {"unit_norm", "virial", "helmholtz_residual", "equimeasurability",
                                      "rearrangement_decreases_F", "nash_saturation"}

    def test_tampered_profile(self, tmp_path, capsys, minimizer4096):
        v = np.array(minimizer4096.values)
        v[100] *= 1.5
        path = tmp_path / "bad.csv"
        write_profile_csv(path, RadialProfile(minimizer4096.grid, v))
        code, out, _ = _run(capsys, "verify", "--beta", "1", "--profile", str(path))
        assert code == 1
        assert not json.loads(out)["all_passed"]

    def test_missing_profile(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "verify", "--beta", "1", "--profile", str(tmp_path / "nope.csv"))
        assert code == 1


class TestScan:
    def test_closed_form(self, tmp_path, capsys):
        out = tmp_path / "s.json"
        code, _, _ = _run(capsys, "scan", "--num", "5", "--no-nash", "--out", str(out))
        rep = json.loads(out.read_text())
        assert code == 0
        assert rep["exponents"]["F"] == pytest.approx(4 / 7, abs=1e-8)

    def test_too_few(self, capsys):
        code, _, _ = _run(capsys, "scan", "--num", "2")
        assert code == 2

    def test_short_span(self, capsys):
        code, _, _ = _run(capsys, "scan", "--beta-min", "1", "--beta-max", "2")
        assert code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()
