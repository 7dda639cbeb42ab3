"""Command-line interface: formats, exit codes, cleaning flags, atomicity."""

import json
import math
import os

import numpy as np
import pytest

import agof
from agof.cli import main


@pytest.fixture()
def datafile(tmp_path):
    def write(lines, name="data.csv"):
        path = tmp_path / name
        path.write_text("\n".join(str(v) for v in lines) + "\n")
        return str(path)
    return write


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


class TestFit:
    def test_exponential_mean(self, datafile, capsys):
        rc = main(["fit", "--family", "exponential", datafile([1, 2, 3])])
        assert rc == 0
        doc = _json_out(capsys)
        assert doc["theta"] == 2.0

    def test_normal(self, datafile, capsys):
        rc = main(["fit", "--family", "normal", datafile([0.0, 2.0])])
        assert rc == 0
        doc = _json_out(capsys)
        assert doc["mean"] == 1.0 and doc["sd"] == 1.0

    def test_mixture_with_k(self, datafile, capsys):
        rng = np.random.default_rng(3)
        vals = np.concatenate([rng.normal(-4, 1, 40), rng.normal(4, 1, 40)])
        rc = main(["fit", "--family", "gaussian_mixture", "--k", "2",
                   "--seed", "1", datafile(vals)])
        assert rc == 0
        doc = _json_out(capsys)
        assert doc["k"] == 2
        assert doc["means"][0] < doc["means"][1]

    def test_header_line_tolerated(self, datafile, capsys):
        rc = main(["fit", "--family", "exponential",
                   datafile(["value", 1, 2, 3])])
        assert rc == 0
        assert _json_out(capsys)["theta"] == 2.0

    def test_out_file(self, datafile, tmp_path):
        out = tmp_path / "fit.json"
        rc = main(["fit", "--family", "exponential", "--out", str(out),
                   datafile([1, 2, 3])])
        assert rc == 0
        assert json.loads(out.read_text())["theta"] == 2.0


class TestInputHandling:
    def test_malformed_line_is_reported_with_number(self, datafile, capsys):
        rc = main(["fit", "--family", "exponential",
                   datafile([1.0, "oops", 3.0])])
        assert rc == 2
        err = capsys.readouterr().err
        assert "error[INPUT]" in err
        assert ":2:" in err

    def test_missing_file(self, capsys):
        rc = main(["fit", "--family", "exponential", "/nonexistent/x.csv"])
        assert rc == 2
        assert "error[INPUT]" in capsys.readouterr().err

    def test_drop_nonfinite(self, datafile, capsys):
        path = datafile([1.0, "nan", 3.0])
        assert main(["fit", "--family", "exponential", path]) == 2
        capsys.readouterr()
        rc = main(["fit", "--family", "exponential", "--drop-nonfinite", path])
        assert rc == 0
        out = capsys.readouterr()
        assert json.loads(out.out)["theta"] == 2.0
        assert "dropped" in out.err

    def test_drop_nonpositive(self, datafile, capsys):
        path = datafile([-1.0, 0.0, 1.0, 3.0])
        assert main(["fit", "--family", "exponential", path]) == 2
        capsys.readouterr()
        rc = main(["fit", "--family", "exponential", "--drop-nonpositive", path])
        assert rc == 0
        out = capsys.readouterr()
        assert json.loads(out.out)["theta"] == 2.0
        assert "dropped" in out.err

    def test_empty_after_cleaning(self, datafile, capsys):
        rc = main(["fit", "--family", "exponential", "--drop-nonpositive",
                   datafile([-1.0, -2.0])])
        assert rc == 2


class TestDistanceAndOracle:
    def test_oracle_reference_value(self, capsys):
        rc = main(["oracle", "--f", "weibull:2,1",
                   "--g", "exponential:0.886227", "--p", "1"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "value,abs_error_bound"
        value = float(lines[1].split(",")[0])
        assert abs(value - 0.3002) < 0.001

    def test_distance_subcommand(self, datafile, capsys):
        rc = main(["distance", "--model", "exponential:2.0", "--p", "1",
                   datafile([1, 2, 3])])
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        value, bound = (float(v) for v in lines[1].split(","))
        assert value > 0 and bound <= 0.01 * max(value, 1e-12)

    def test_model_json_file(self, datafile, tmp_path, capsys):
        spec = tmp_path / "model.json"
        spec.write_text(agof.model_to_json(agof.exponential_model(2.0)))
        rc = main(["distance", "--model", f"@{spec}", "--p", "1",
                   datafile([1, 2, 3])])
        assert rc == 0

    def test_bad_model_spec(self, datafile, capsys):
        rc = main(["distance", "--model", "exponential:-1", "--p", "1",
                   datafile([1, 2, 3])])
        assert rc == 2
        assert "error[DOMAIN]" in capsys.readouterr().err

    def test_oracle_dirac_rejected(self, capsys):
        rc = main(["oracle", "--f", "dirac:1.0",
                   "--g", "exponential:1.0", "--p", "1"])
        assert rc == 2
        assert "error[UNSUPPORTED]" in capsys.readouterr().err


class TestTestSubcommand:
    def _run(self, path, out, extra=()):
        return main(["test", "--family", "exponential", "--p", "1",
                     "--epsilon", "0.4", "--alpha", "0.05",
                     "--method", "bootstrap2", "--B", "50", "--seed", "7",
                     "--out", str(out), path, *extra])

    def test_byte_identical_reruns(self, datafile, tmp_path):
        path = datafile(np.round(np.random.default_rng(1).exponential(2.0, 80), 6))
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert self._run(path, out1) == 0
        assert self._run(path, out2) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_report_shape(self, datafile, tmp_path):
        path = datafile(np.round(np.random.default_rng(2).exponential(1.0, 60), 6))
        out = tmp_path / "rep.json"
        assert self._run(path, out) == 0
        doc = json.loads(out.read_text())
        assert doc["kind"] == "agof"
        assert doc["reject_H0"] == (doc["config"]["epsilon"] > doc["min_margin"])
        assert doc["boot"]["B"] == 50

    def test_dual_flag(self, datafile, tmp_path):
        path = datafile(np.round(np.random.default_rng(3).exponential(1.0, 60), 6))
        out = tmp_path / "dual.json"
        assert self._run(path, out, extra=["--dual"]) == 0
        assert json.loads(out.read_text())["kind"] == "dual"

    def test_dump_norms(self, datafile, tmp_path):
        path = datafile(np.round(np.random.default_rng(4).exponential(1.0, 60), 6))
        out = tmp_path / "rep.json"
        norms = tmp_path / "norms.csv"
        assert self._run(path, out, extra=["--dump-norms", str(norms)]) == 0
        lines = norms.read_text().strip().split("\n")
        assert lines[0] == "norm"
        assert len(lines) == 51

    def test_seed_required(self, datafile, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["test", "--family", "exponential", "--p", "1",
                  "--epsilon", "0.4", "--method", "bootstrap2",
                  datafile([1, 2, 3])])
        assert exc.value.code == 2

    def test_numerical_failure_exit_code(self, datafile, capsys):
        # two-point sample degenerates half of all normal-family resamples
        rc = main(["test", "--family", "normal", "--p", "1",
                   "--epsilon", "0.4", "--alpha", "0.05",
                   "--method", "bootstrap2", "--B", "40", "--seed", "1",
                   datafile([1.0, 2.0])])
        assert rc == 3
        assert "error[BOOTSTRAP_DEGENERACY]" in capsys.readouterr().err


class TestMindist:
    def test_rows_per_k(self, tmp_path, capsys):
        rng = np.random.default_rng(11)
        vals = np.concatenate([rng.normal(0, 1, 60), rng.normal(5, 1, 40)])
        path = tmp_path / "mix.csv"
        path.write_text("\n".join(f"{v:.6f}" for v in vals) + "\n")
        rc = main(["mindist", "--family", "gaussian_mixture", "--kmax", "2",
                   "--p", "2", "--alpha", "0.05", "--B", "30", "--seed", "5",
                   "--restarts", "2", str(path)])
        assert rc == 0
        doc = _json_out(capsys)
        assert [row["k"] for row in doc["rows"]] == [1, 2]
        for row in doc["rows"]:
            for method in ("bootstrap1", "bootstrap2"):
                assert "eps_star" in row[method]
                assert 0.0 <= row[method]["improvement"] <= 1.0
        # more components cannot fit worse on the same data
        assert doc["rows"][1]["obs_norm"] <= doc["rows"][0]["obs_norm"] + 1e-9


class TestPowerSubcommand:
    def test_csv_shape(self, capsys):
        rc = main(["power", "--family", "exponential", "--true", "weibull:2,1",
                   "--p", "1", "--n", "30", "--alpha", "0.05",
                   "--eps-grid", "0.1,0.3,0.6", "--methods", "bootstrap2",
                   "--runs", "4", "--B", "30", "--seed", "2"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == ("method,epsilon,rejection_proportion,std_error,"
                            "runs,B,n,p,alpha,seed")
        assert len(lines) == 4

    def test_insufficient_args(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["power", "--family", "exponential", "--p", "1"])
        assert exc.value.code == 2


class TestOutputAtomicity:
    def test_no_partial_file_on_failure(self, datafile, tmp_path, capsys):
        out = tmp_path / "report.json"
        rc = main(["test", "--family", "normal", "--p", "1",
                   "--epsilon", "0.4", "--alpha", "0.05",
                   "--method", "bootstrap2", "--B", "40", "--seed", "1",
                   "--out", str(out), datafile([1.0, 2.0])])
        assert rc == 3
        assert not out.exists()
        assert list(tmp_path.glob("*.tmp*")) == []


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert agof.__version__ in capsys.readouterr().out
