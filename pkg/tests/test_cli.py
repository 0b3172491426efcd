import io
import subprocess
import sys

import pytest

from scalarbp.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, best_alpha, bench_checknode, main, read_csv_rows
from scalarbp.pauli_core import load_code


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


class TestGenCode:
    def test_writes_commuting_code(self, tmp_path):
        path = tmp_path / "b.code"
        code, text = run("gen-code", "--n", "256", "--row-weight", "16", "--checks", "224",
                         "--deletion", "min_var", "--seed", "7", "--out", str(path))
        assert code == EXIT_OK
        S = load_code(path)
        assert not S.commutation_matrix().any()
        assert (tmp_path / "b.code.meta.json").exists()
        assert "[[256,32]]" in text and "column weights" in text

    def test_min_max(self, tmp_path):
        code, _ = run("gen-code", "--n", "64", "--row-weight", "8", "--checks", "48", "--deletion", "min_max",
                      "--out", str(tmp_path / "m.code"))
        assert code == EXIT_OK

    def test_odd_row_weight(self, tmp_path, capsys):
        code, _ = run("gen-code", "--row-weight", "15", "--out", str(tmp_path / "x.code"))
        assert code == EXIT_CONFIG
        assert "row weight" in capsys.readouterr().err


class TestDecode:
    def test_fig2_zero_syndrome(self):
        code, text = run("decode", "--code", "fig2_toy", "--syndrome", "00")
        assert code == EXIT_OK
        assert "estimate    III" in text

    def test_five_qubit_injected_error(self):
        code, text = run("decode", "--code", "five_qubit", "--error", "XIIII", "--schedule", "serial")
        assert code == EXIT_OK
        assert "converged   yes" in text and "outcome     success" in text

    def test_fail_exit_code(self):
        # syndrome of IIIYI; the parallel schedule oscillates on it
        code, text = run("decode", "--code", "five_qubit", "--syndrome", "1111", "--schedule", "parallel")
        assert code == EXIT_FAIL
        assert "converged   no" in text and text.rstrip().endswith("FAIL")

    def test_serial_recovers_oscillating_case(self):
        code, text = run("decode", "--code", "five_qubit", "--syndrome", "1111", "--schedule", "serial")
        assert code == EXIT_OK and "IIIYI" in text

    def test_malformed_code_names_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.code"
        bad.write_text("3 2\nXYI\nZQY\n")
        code, _ = run("decode", "--code", str(bad), "--syndrome", "00")
        assert code == EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_source_required(self):
        assert run("decode", "--code", "fig2_toy")[0] == EXIT_CONFIG
        assert run("decode", "--code", "fig2_toy", "--syndrome", "0")[0] == EXIT_CONFIG

    def test_vector_decoder(self):
        code, text = run("decode", "--code", "five_qubit", "--error", "IIZII", "--decoder", "bp4_vector")
        assert code == EXIT_OK and "IIZII" in text


class TestSimulate:
    args = ("simulate", "--code", "five_qubit", "--epsilon", "0.02,0.03", "--alpha-v", "1.0,1.5",
            "--schedule", "serial", "--max-iter", "12", "--min-errors", "5", "--max-trials", "400")

    def test_cross_product_rows(self, tmp_path):
        out = tmp_path / "s.csv"
        code, _ = run(*self.args, "--out", str(out))
        assert code == EXIT_OK
        header, rows = read_csv_rows(str(out))
        assert len(rows) == 4
        assert any("seed = 0" in h for h in header)
        assert {(r["epsilon"], r["alpha_v"]) for r in rows} == {
            ("0.02", "1.0"), ("0.02", "1.5"), ("0.03", "1.0"), ("0.03", "1.5")}

    def test_rerun_identical_and_resumes(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(*self.args, "--out", str(a))
        run(*self.args, "--out", str(b), "--threads", "3")
        assert a.read_text() == b.read_text()
        before = a.read_text()
        code, _ = run(*self.args, "--out", str(a))
        assert code == EXIT_OK and a.read_text() == before
        assert capsys.readouterr().err.count("already present") == 4

    def test_resume_refuses_changed_config(self, tmp_path):
        out = tmp_path / "s.csv"
        run(*self.args, "--out", str(out))
        code, _ = run(*self.args, "--out", str(out), "--seed", "9")
        assert code == EXIT_CONFIG

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep\ncode = five_qubit\nepsilon = 0.05\nmax-iter = 12\nmin_errors = 3\nmax_trials = 50\n")
        out1, out2 = tmp_path / "1.csv", tmp_path / "2.csv"
        assert run("simulate", "--config", str(cfg), "--out", str(out1))[0] == EXIT_OK
        assert run("simulate", "--config", str(cfg), "--out", str(out2), "--epsilon", "0.1")[0] == EXIT_OK
        assert read_csv_rows(str(out1))[1][0]["epsilon"] == "0.05"
        assert read_csv_rows(str(out2))[1][0]["epsilon"] == "0.1"

    def test_config_errors_name_key_and_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("code = five_qubit\n\nbogus = 1\n")
        assert run("simulate", "--config", str(cfg), "--epsilon", "0.1")[0] == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "line 3" in err and "bogus" in err
        cfg.write_text("max_iter = ten\n")
        assert run("simulate", "--config", str(cfg), "--code", "five_qubit", "--epsilon", "0.1")[0] == EXIT_CONFIG
        assert "line 1" in capsys.readouterr().err

    def test_best_alpha(self, tmp_path):
        code, text = run(*self.args, "--out", str(tmp_path / "s.csv"), "--best-alpha")
        assert code == EXIT_OK
        tail = text.split("# best alpha_v per epsilon\n", 1)[1].strip().splitlines()
        assert len(tail) == 1 + 2

    def test_usage_error_is_config_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--max-iter", "0"])
        assert exc.value.code == EXIT_CONFIG


def test_best_alpha_reducer():
    rows = [
        {"epsilon": "0.01", "decoder": "bp4", "schedule": "serial", "alpha_v": "1.0", "logical_error_rate": "0.2"},
        {"epsilon": "0.01", "decoder": "bp4", "schedule": "serial", "alpha_v": "1.5", "logical_error_rate": "0.1"},
        {"epsilon": "0.01", "decoder": "bp4", "schedule": "serial", "alpha_v": "2.0", "logical_error_rate": "0.1"},
        {"epsilon": "0.02", "decoder": "bp4", "schedule": "serial", "alpha_v": "1.0", "logical_error_rate": "0.3"},
    ]
    best = best_alpha(rows)
    assert [(r["epsilon"], r["alpha_v"]) for r in best] == [("0.01", "1.5"), ("0.02", "1.0")]


def test_bench_checknode_small():
    row = bench_checknode(degree=4, checks=20)
    assert row.scalar_mults <= 3 * 4
    assert row.max_abs_diff < 1e-12
    code, text = run("bench-checknode", "--degree", "3,4", "--checks", "10")
    assert code == EXIT_OK and len(text.strip().splitlines()) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "scalarbp", "decode", "--code", "fig2_toy", "--syndrome", "00"],
                         capture_output=True, text=True)
    assert res.returncode == EXIT_OK
    assert "III" in res.stdout
