import json

import numpy as np
import pytest

from lastpc.cli import main, read_table_csv
from lastpc.errors import InputError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def stack_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("stack")
    assert main(["synth", "hypsometric", str(path), "--seed", "0"]) == 0
    return path


class TestTabular:
    def test_builtin_solar(self, capsys):
        code, out, _ = run(capsys, "discover", "tabular", "--builtin", "solar", "--log-si")
        assert code == 0
        report = json.loads(out)
        w = report["spectrum"]["eigenvalues"]
        assert w[0] == pytest.approx(18.42139, rel=1e-3)
        assert w[1] == pytest.approx(2.509082, rel=1e-3)
        assert report["selected"]["index"] == 4
        assert report["selected"]["integerized"]["rounded"] == [3, 3, 0, 0, -4]

    def test_pivot_on_a_gives_kepler_constant(self, capsys):
        code, out, _ = run(capsys, "discover", "tabular", "--builtin", "solar", "--log-si",
                           "--pivot", "1")
        sel = json.loads(out)["selected"]
        assert sel["integerized"]["target"] == 3
        assert sel["constant"] == pytest.approx(87.45, abs=0.05)

    def test_planted_law_csv(self, tmp_path, capsys):
        x = np.linspace(1, 4, 7)
        lines = ["x,y"] + [f"{float(a)!r},{float(2 * a)!r}" for a in x]
        path = tmp_path / "law.csv"
        path.write_text("\n".join(lines) + "\n")
        code, out, _ = run(capsys, "discover", "tabular", str(path))
        sel = json.loads(out)["selected"]
        assert code == 0
        assert sel["integerized"]["rounded"] == [2, -1]
        assert np.ptp(sel["per_case"]) < 1e-10

    def test_scale_line(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("a,b\n#scale: 10,1\n1,2\n3,4\n")
        t = read_table_csv(path)
        np.testing.assert_array_equal(t.unit_scale, (10, 1))

    def test_empty_csv_exit_2(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("")
        code, _, err = run(capsys, "discover", "tabular", str(path))
        assert code == 2
        assert "empty" in err

    def test_bad_value_line_number(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3,oops\n")
        code, _, err = run(capsys, "discover", "tabular", str(path))
        assert code == 2
        assert "bad.csv:3" in err

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("a,b\n1,2,3\n")
        with pytest.raises(InputError, match=":2"):
            read_table_csv(path)

    def test_constant_column_correlation_exit_3(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        path.write_text("a,b\n1,5\n2,5\n3,5\n")
        code, _, err = run(capsys, "discover", "tabular", str(path), "--kind", "corr")
        assert code == 3
        assert "b" in err

    def test_needs_exactly_one_source(self, capsys):
        code, _, _ = run(capsys, "discover", "tabular")
        assert code == 2


class TestGridded:
    def test_pipeline(self, stack_dir, capsys):
        code, out, _ = run(capsys, "discover", "gridded", str(stack_dir), "--beta0", "15.5397")
        assert code == 0
        report = json.loads(out)
        assert report["n_cases"] == 108
        assert report["n_loadings"] == 576
        assert report["reference_loading"] == pytest.approx(1 / 24)
        assert report["beta"]["ttest"]["mu0"] == 15.5397
        assert report["beta"]["n_valid"] > 0
        assert sum(report["beta"]["histogram"]["counts"]) == report["beta"]["n_valid"]

    def test_crop(self, stack_dir, capsys):
        code, out, _ = run(capsys, "discover", "gridded", str(stack_dir), "--crop", "65,75")
        report = json.loads(out)
        assert code == 0
        assert report["grid"]["nlat"] == 5
        assert report["grid"]["lat_first"] == 75.0

    def test_missing_pair_field_exit_2(self, stack_dir, capsys):
        code, _, err = run(capsys, "discover", "gridded", str(stack_dir), "--pair", "T_v,Z")
        assert code == 2
        assert "Z" in err

    def test_missing_dir_exit_2(self, tmp_path, capsys):
        code, _, _ = run(capsys, "discover", "gridded", str(tmp_path / "nope"))
        assert code == 2


class TestPlotData:
    @pytest.fixture
    def gridded_report(self, stack_dir, tmp_path):
        path = tmp_path / "g.json"
        assert main(["discover", "gridded", str(stack_dir), "--out", str(path)]) == 0
        return path

    def test_scree(self, gridded_report, capsys):
        code, out, _ = run(capsys, "emit-plotdata", str(gridded_report), "--which", "scree")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "index,sqrt_eigenvalue"
        assert lines[1].startswith("1,")

    def test_loading_sd(self, gridded_report, capsys):
        code, out, _ = run(capsys, "emit-plotdata", str(gridded_report), "--which", "loading-sd")
        lines = out.splitlines()
        assert lines[0] == "eigenvector_index,field_name,loading_sd"
        assert lines[-1] == "reference,equal_loading," + repr(1 / 24)
        assert lines[1].split(",")[:2] == ["1", "T_v"]

    def test_beta_hist(self, gridded_report, capsys):
        code, out, _ = run(capsys, "emit-plotdata", str(gridded_report), "--which", "beta-hist")
        lines = out.splitlines()
        assert lines[0] == "bin_left,bin_right,count"
        report = json.loads(gridded_report.read_text())
        assert sum(int(r.split(",")[2]) for r in lines[1:]) == report["beta"]["n_valid"]

    def test_unknown_which_exit_2(self, gridded_report, capsys):
        code, _, _ = run(capsys, "emit-plotdata", str(gridded_report), "--which", "pie")
        assert code == 2

    def test_pca_lines_needs_bivariate(self, gridded_report, capsys):
        code, _, _ = run(capsys, "emit-plotdata", str(gridded_report), "--which", "pca-lines")
        assert code == 2


class TestDemoAndSynth:
    def test_pca_lines_demo(self, tmp_path, capsys):
        report = tmp_path / "b.json"
        assert main(["demo", "pca-lines", "--seed", "3", "--out", str(report)]) == 0
        data = json.loads(report.read_text())
        assert data["beta_from_pca_slope"] == pytest.approx(data["beta_least_squares"], rel=1e-9)
        for slope, intercept in data["lines"].values():
            assert slope * data["moments"]["mu_x"] + intercept == pytest.approx(
                data["moments"]["mu_y"], abs=1e-9)
        code, out, _ = run(capsys, "emit-plotdata", str(report), "--which", "pca-lines")
        assert out.splitlines()[0] == "line,slope,intercept"
        assert [r.split(",")[0] for r in out.splitlines()[1:]] == [
            "pca_major", "pca_minor", "regression"]

    def test_synth_bivariate_round_trip(self, tmp_path, capsys):
        path = tmp_path / "xy.csv"
        assert main(["synth", "bivariate", "--seed", "1", "--out", str(path)]) == 0
        t = read_table_csv(path)
        assert (t.n_cases, t.variable_names) == (200, ("x", "y"))
        code, out, _ = run(capsys, "demo", "pca-lines", str(path))
        assert code == 0
        assert json.loads(out)["n_cases"] == 200

    def test_demo_wrong_width(self, tmp_path, capsys):
        path = tmp_path / "three.csv"
        path.write_text("a,b,c\n1,2,3\n4,5,7\n")
        code, _, _ = run(capsys, "demo", "pca-lines", str(path))
        assert code == 2


def test_pivot_outside_columns_exit_2(capsys):
    code, _, err = run(capsys, "discover", "tabular", "--builtin", "solar", "--log-si",
                       "--pivot", "9")
    assert code == 2
    assert "pivot" in err
