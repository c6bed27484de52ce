import csv
import json

import numpy as np
import pytest

from twcc import RhoParams, log_likelihood
from twcc.cli import main, parse_report, read_angle_csv

from conftest import TWO_PI


def run(args):
    return main(args)


class TestSampleCommand:
    def test_header_only_when_empty(self, tmp_path):
        out = tmp_path / "empty.csv"
        assert run(["sample", "--rho", "1", "0.25", "4", "--n", "0", "--seed", "1", "--out", str(out)]) == 0
        assert out.read_text() == "u1,u2,u3\r\n"

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert run(["sample", "--rho", "1", "0.25", "4", "--n", "50", "--seed", "9", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_parameters_exit_4(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        code = run(["sample", "--rho", "1", "1", "1", "--n", "10", "--seed", "0", "--out", str(out)])
        assert code == 4
        assert "permutation" in capsys.readouterr().err

    def test_values_in_range(self, tmp_path):
        out = tmp_path / "s.csv"
        run(["sample", "--rho", "0.611", "-1.31", "-1.25", "--n", "200", "--seed", "3", "--out", str(out)])
        arr = read_angle_csv(out)
        assert arr.shape == (200, 3)
        assert np.all((arr >= 0) & (arr < TWO_PI))


class TestFitCommand:
    @pytest.fixture(scope="class")
    def data_csv(self, tmp_path_factory):
        path = tmp_path_factory.mktemp("fit") / "data.csv"
        assert run(["sample", "--rho", "1", "0.25", "4", "--n", "1200", "--seed", "21", "--out", str(path)]) == 0
        return path

    def test_fit_report_roundtrip(self, data_csv, tmp_path):
        out = tmp_path / "report.txt"
        code = run(["fit", str(data_csv), "--starts", "12", "--seed", "2", "--out", str(out)])
        assert code == 0
        doc = parse_report(out.read_text())
        assert doc["format"] == "twcc-fit-report/1"
        assert doc["n"] == 1200
        p = RhoParams(doc["rho12_hat"], doc["rho13_hat"], doc["rho23_hat"])
        arr = read_angle_csv(data_csv)
        assert log_likelihood(arr, p) == pytest.approx(doc["loglik"], abs=1e-9)

    def test_json_report_same_keys(self, data_csv, tmp_path):
        t_out = tmp_path / "r.txt"
        j_out = tmp_path / "r.json"
        run(["fit", str(data_csv), "--starts", "8", "--seed", "2", "--out", str(t_out)])
        run(["fit", str(data_csv), "--starts", "8", "--seed", "2", "--out", str(j_out), "--json"])
        t_doc = parse_report(t_out.read_text())
        j_doc = json.loads(j_out.read_text())
        assert list(t_doc.keys()) == list(j_doc.keys())
        assert t_doc["loglik"] == j_doc["loglik"]

    def test_deterministic_reports(self, data_csv, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for path in (a, b):
            run(["fit", str(data_csv), "--starts", "8", "--bootstrap", "5", "--seed", "7", "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()

    def test_center_flag_records_offsets(self, data_csv, tmp_path):
        out = tmp_path / "c.txt"
        assert run(["fit", str(data_csv), "--center", "--starts", "8", "--seed", "2", "--out", str(out)]) == 0
        doc = parse_report(out.read_text())
        assert doc["centered"] is True
        assert "center_offset_u1" in doc

    def test_bootstrap_keys(self, data_csv, tmp_path):
        out = tmp_path / "bs.txt"
        assert run(["fit", str(data_csv), "--starts", "8", "--bootstrap", "6", "--seed", "5", "--out", str(out)]) == 0
        doc = parse_report(out.read_text())
        assert doc["bootstrap_b"] == 6
        for pair in ("12", "13", "23"):
            assert doc[f"boot_rho{pair}_lo"] <= doc[f"boot_rho{pair}_hi"]

    def test_empty_file_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        assert run(["fit", str(bad), "--out", str(tmp_path / "r.txt")]) == 2
        assert "empty" in capsys.readouterr().err

    def test_bad_header_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n0.1,0.2,0.3\n")
        assert run(["fit", str(bad), "--out", str(tmp_path / "r.txt")]) == 2

    def test_bad_row_named_in_message(self, tmp_path, capsys):
        bad = tmp_path / "badrow.csv"
        bad.write_text("u1,u2,u3\n0.1,0.2,0.3\n0.4,oops,0.6\n")
        assert run(["fit", str(bad), "--out", str(tmp_path / "r.txt")]) == 2
        assert "row 3" in capsys.readouterr().err

    def test_too_few_rows_exit_3(self, tmp_path, capsys):
        small = tmp_path / "small.csv"
        small.write_text("u1,u2,u3\n0.1,0.2,0.3\n")
        assert run(["fit", str(small), "--out", str(tmp_path / "r.txt")]) == 3
        assert "4 observations" in capsys.readouterr().err

    def test_alias_header_and_degrees(self, tmp_path):
        path = tmp_path / "deg.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("phi", "psi", "omega"))
            for row in ([10.0, 350.0, 200.0], [90.0, 180.0, 270.0]):
                writer.writerow(row)
        arr = read_angle_csv(path, degrees=True)
        assert arr[0, 0] == pytest.approx(np.deg2rad(10.0))
        assert arr[1, 2] == pytest.approx(np.deg2rad(270.0))


class TestGridCommand:
    def test_riemann_sum_close_to_one(self, tmp_path):
        out = tmp_path / "grid.csv"
        code = run(["grid", "--rho", "1", "0.25", "4", "--fix", "3", "0.0",
                    "--resolution", "64", "--out", str(out)])
        assert code == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["u1", "u2", "density"]
        dens = np.array([float(r[2]) for r in rows[1:]])
        assert len(dens) == 64 * 64
        assert dens.sum() * (TWO_PI / 64) ** 2 == pytest.approx(1.0, abs=1e-6)

    def test_single_argmax_cell(self, tmp_path):
        # Conditional on one angle, the density of the other two is unimodal.
        out = tmp_path / "grid.csv"
        run(["grid", "--rho", "0.611", "-1.31", "-1.25", "--fix", "1", "1.0",
             "--resolution", "48", "--out", str(out)])
        rows = list(csv.reader(out.read_text().splitlines()))[1:]
        dens = np.array([float(r[2]) for r in rows]).reshape(48, 48)
        peak = np.unravel_index(np.argmax(dens), dens.shape)
        neighbors = [((peak[0] + di) % 48, (peak[1] + dj) % 48)
                     for di in (-1, 0, 1) for dj in (-1, 0, 1)]
        maxima = 0
        for i in range(48):
            for j in range(48):
                window = dens[[(i - 1) % 48, i, (i + 1) % 48], :][:, [(j - 1) % 48, j, (j + 1) % 48]]
                if dens[i, j] >= window.max():
                    maxima += 1
                    assert (i, j) in neighbors or (i, j) == peak
        assert maxima >= 1

    def test_resolution_one(self, tmp_path):
        out = tmp_path / "one.csv"
        assert run(["grid", "--rho", "1", "0.25", "4", "--fix", "2", "0.5",
                    "--resolution", "1", "--out", str(out)]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert len(rows) == 2

    def test_bad_fix_index_exit_4(self, tmp_path):
        assert run(["grid", "--rho", "1", "0.25", "4", "--fix", "5", "0.0",
                    "--out", str(tmp_path / "g.csv")]) == 4

    def test_window_flag_accepted(self, tmp_path):
        assert run(["grid", "--rho", "1", "0.25", "4", "--fix", "3", "0.0",
                    "--resolution", "8", "--window", "0.1", "--out", str(tmp_path / "g.csv")]) == 0


class TestSimulateCommand:
    def test_custom_scenario_table(self, tmp_path):
        out = tmp_path / "sim.csv"
        code = run(["simulate", "--scenario", "custom", "--rho", "1", "0.25", "4",
                    "--sizes", "200", "--replicates", "3", "--starts", "8",
                    "--seed", "4", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 3
        assert {r["parameter"] for r in rows} == {"rho12", "rho13", "rho23"}
        assert all(int(r["failed"]) == 0 for r in rows)

    def test_single_replicate_median_is_estimate(self, tmp_path):
        out = tmp_path / "sim1.csv"
        run(["simulate", "--scenario", "custom", "--rho", "1", "0.25", "4",
             "--sizes", "300", "--replicates", "1", "--starts", "8",
             "--seed", "4", "--out", str(out)])
        rows = list(csv.DictReader(out.read_text().splitlines()))
        for r in rows:
            assert float(r["median"]) == float(r["q025"]) == float(r["q975"])

    def test_custom_requires_rho_and_sizes(self, tmp_path):
        assert run(["simulate", "--scenario", "custom", "--replicates", "2",
                    "--out", str(tmp_path / "x.csv")]) == 4

    def test_parallel_matches_serial(self, tmp_path):
        kw = ["simulate", "--scenario", "custom", "--rho", "1", "0.25", "4",
              "--sizes", "150", "--replicates", "4", "--starts", "6", "--seed", "11"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(kw + ["--out", str(a)]) == 0
        assert run(kw + ["--out", str(b), "--jobs", "2"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestPipelineRoundTrip:
    def test_sample_fit_recovers_truth_loosely(self, tmp_path):
        data = tmp_path / "d.csv"
        report = tmp_path / "r.txt"
        run(["sample", "--rho", "1", "-4", "-0.25", "--n", "1500", "--seed", "33", "--out", str(data)])
        assert run(["fit", str(data), "--starts", "15", "--bootstrap", "40",
                    "--seed", "5", "--out", str(report)]) == 0
        doc = parse_report(report.read_text())
        truth = {"12": 1.0, "13": -4.0, "23": -0.25}
        for pair, tv in truth.items():
            assert doc[f"boot_rho{pair}_lo"] <= tv <= doc[f"boot_rho{pair}_hi"]
