import csv
import io
import subprocess
import sys

import pytest

from tmcc_qkd.cli import main
from tmcc_qkd.eavesdrop import analytic_qber
from tmcc_qkd.photon_stats import TmccState


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_kv(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


class TestStateInfo:
    def test_vacuum(self, capsys):
        code, out, _ = run(capsys, "state-info", "--lambda", "0")
        info = parse_kv(out)
        assert code == 0
        assert info["mean"] == "0.000000"
        assert info["max_info_bits"] == "0.000000"
        assert info["mandel_q"] == "undefined"

    def test_lambda_one(self, capsys):
        code, out, _ = run(capsys, "state-info", "--lambda", "1")
        info = parse_kv(out)
        assert code == 0
        assert float(info["mean"]) == pytest.approx(0.697775, abs=1e-6)
        assert float(info["mandel_q"]) == pytest.approx(-0.264647, abs=1e-6)
        assert {"variance", "n_max", "tail_mass"} <= info.keys()

    def test_negative_lambda(self, capsys):
        code, _, err = run(capsys, "state-info", "--lambda", "-1")
        assert code == 2
        assert "nonnegative" in err

    def test_missing_lambda(self, capsys):
        assert run(capsys, "state-info")[0] == 2

    def test_out_of_range_lambda_is_usage(self, capsys):
        assert run(capsys, "state-info", "--lambda", "500")[0] == 2


class TestEntropyCurve:
    def test_header_and_chain(self, capsys):
        code, out, _ = run(capsys, "entropy-curve", "--lambda-min", "0", "--lambda-max", "16", "--points", "33")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["lambda", "mean", "H2", "H4", "H8", "Hmax"]
        assert len(rows) == 33
        assert all(float(v) == 0.0 for k, v in rows[0].items())
        for row in rows:
            h = [float(row[k]) for k in ("H2", "H4", "H8", "Hmax")]
            assert h == sorted(h)
        assert float(rows[-1]["mean"]) > 15
        assert float(rows[-1]["Hmax"]) > 3.5

    def test_column_subset_keeps_order(self, capsys):
        code, out, _ = run(capsys, "entropy-curve", "--lambda-max", "2", "--points", "2", "--alphabets", "max,4")
        assert code == 0
        assert out.splitlines()[0] == "lambda,mean,H4,Hmax"

    def test_six_decimals_and_newline(self, capsys):
        _, out, _ = run(capsys, "entropy-curve", "--lambda-max", "3", "--points", "4")
        assert out.endswith("\n")
        for line in out.splitlines()[1:]:
            assert all(len(cell.split(".")[1]) == 6 for cell in line.split(","))

    def test_mean_axis(self, capsys):
        _, out, _ = run(capsys, "entropy-curve", "--lambda-min", "1", "--lambda-max", "5", "--points", "5", "--x-axis", "mean")
        means = [float(r["mean"]) for r in csv.DictReader(io.StringIO(out))]
        assert means == pytest.approx([1, 2, 3, 4, 5], abs=1e-6)

    @pytest.mark.parametrize(
        "argv",
        [
            ["--points", "1"],
            ["--lambda-min", "3", "--lambda-max", "2"],
            ["--alphabets", "3"],
            ["--bogus"],
        ],
    )
    def test_bad_flags(self, capsys, argv):
        assert run(capsys, "entropy-curve", *argv)[0] == 2

    def test_parallel_rows_in_order(self, capsys):
        _, serial, _ = run(capsys, "entropy-curve", "--lambda-max", "9", "--points", "19")
        _, parallel, _ = run(capsys, "entropy-curve", "--lambda-max", "9", "--points", "19", "--workers", "4")
        assert serial == parallel


class TestQberCurve:
    def test_header_and_vacuum_row(self, capsys):
        code, out, _ = run(capsys, "qber-curve", "--lambda-max", "6", "--points", "4", "--m", "4")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["lambda", "mean", "p_err_letter", "p_err_bit_eq14", "p_err_bit_hamming"]
        assert float(rows[0]["p_err_letter"]) == 0.0

    def test_matches_library(self, capsys):
        _, out, _ = run(capsys, "qber-curve", "--lambda-min", "2", "--lambda-max", "4.5", "--points", "2", "--m", "8", "--source", "poisson")
        row = list(csv.DictReader(io.StringIO(out)))[-1]
        report = analytic_qber(TmccState(4.5), 8, "poisson")
        assert float(row["p_err_letter"]) == pytest.approx(report.p_err, abs=5e-7)
        assert float(row["p_err_bit_hamming"]) == pytest.approx(report.p_err_per_bit_hamming, abs=5e-7)

    def test_literal_has_no_hamming(self, capsys):
        _, out, _ = run(capsys, "qber-curve", "--lambda-max", "3", "--points", "2", "--estimator", "paper-literal")
        assert all(r["p_err_bit_hamming"] == "nan" for r in csv.DictReader(io.StringIO(out)))

    def test_poisson_above_tmcc_rowwise(self, capsys):
        args = ["qber-curve", "--lambda-min", "3", "--lambda-max", "7", "--points", "5", "--m", "4"]
        _, tmcc, _ = run(capsys, *args)
        _, poisson, _ = run(capsys, *args, "--source", "poisson")
        for a, b in zip(csv.DictReader(io.StringIO(tmcc)), csv.DictReader(io.StringIO(poisson))):
            assert float(b["p_err_bit_eq14"]) > float(a["p_err_bit_eq14"])

    @pytest.mark.parametrize("argv", [["--m", "3"], ["--source", "laser"], ["--estimator", "guess"]])
    def test_bad_flags(self, capsys, argv):
        assert run(capsys, "qber-curve", *argv)[0] == 2


class TestSimulate:
    def test_no_attack(self, capsys):
        code, out, _ = run(capsys, "simulate", "--lambda", "4.5", "--m", "8", "--slots", "20000", "--seed", "42")
        info = parse_kv(out)
        assert code == 0
        assert info["letter_errors"] == "0"
        assert info["bit_error_rate_hamming"] == "0.000000"

    def test_dump(self, capsys, tmp_path):
        path = tmp_path / "slots.csv"
        code, out, _ = run(
            capsys, "simulate", "--lambda", "3", "--m", "4", "--slots", "50", "--attack", "clone-tmcc",
            "--dump", "--out", str(path),
        )
        assert code == 0
        rows = list(csv.DictReader(path.open()))
        assert list(rows[0]) == ["slot", "n_alice", "n_bob", "letter_alice", "letter_bob"]
        assert [int(r["slot"]) for r in rows] == list(range(50))
        errors = sum(r["letter_alice"] != r["letter_bob"] for r in rows)
        assert parse_kv(out)["letter_errors"] == str(errors)

    def test_dump_needs_out(self, capsys):
        assert run(capsys, "simulate", "--lambda", "1", "--dump")[0] == 2

    @pytest.mark.parametrize(
        "argv",
        [["--lambda", "1", "--slots", "0"], ["--lambda", "1", "--seed", "-3"], ["--lambda", "1", "--attack", "split"], []],
    )
    def test_invalid(self, capsys, argv):
        assert run(capsys, "simulate", *argv)[0] == 2

    def test_config_file_and_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "session.cfg"
        cfg.write_text("# clone attack\nlambda = 3.0\nm = 8\nslots = 4000  # short\nseed = 5\nattack = clone-poisson\n")
        _, from_file, _ = run(capsys, "simulate", "--config", str(cfg))
        _, from_flags, _ = run(
            capsys, "simulate", "--lambda", "3.0", "--m", "8", "--slots", "4000", "--seed", "5", "--attack", "clone-poisson"
        )
        assert from_file == from_flags
        _, overridden, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "6")
        assert parse_kv(overridden)["seed"] == "6"

    def test_config_errors(self, capsys, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("lambda = 1\ncolour = red\n")
        assert run(capsys, "simulate", "--config", str(bad))[0] == 2
        assert run(capsys, "simulate", "--config", str(tmp_path / "missing.cfg"))[0] == 2

    def test_runtime_failure_exit_code(self, capsys, monkeypatch):
        from tmcc_qkd import cli
        from tmcc_qkd.exceptions import SolverError

        def boom(*_a, **_k):
            raise SolverError("did not converge")

        monkeypatch.setattr(cli, "run_session", boom)
        assert run(capsys, "simulate", "--lambda", "1")[0] == 3

    def test_process_byte_identical(self):
        argv = [sys.executable, "-m", "tmcc_qkd", "simulate", "--lambda", "4.5", "--m", "8",
                "--slots", "100000", "--seed", "42", "--attack", "clone-tmcc"]
        first = subprocess.run(argv, capture_output=True, check=True).stdout
        second = subprocess.run(argv, capture_output=True, check=True).stdout
        assert first == second
