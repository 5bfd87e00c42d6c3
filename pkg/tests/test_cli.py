"""Command-line surface: outputs, exit codes, determinism, figures."""

import json
import math

from nandtree.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eval_nand_11(capsys):
    code, out, _ = run_cli(capsys, "eval", "N(x1,x2)", "11", "--seed", "1")
    assert code == 0
    report = json.loads(out)
    assert report["decision"] == 0
    assert report["classical"] == 0
    assert report["agree"] is True
    assert report["query_count"] == report["repetitions"] * (2 ** report["register_bits"] - 1)


def test_eval_nand_00(capsys):
    code, out, _ = run_cli(capsys, "eval", "N(x1,x2)", "00", "--seed", "1")
    assert code == 0
    report = json.loads(out)
    assert report["decision"] == 1 and report["classical"] == 1 and report["agree"]


def test_eval_bad_bitstring(capsys):
    code, _, err = run_cli(capsys, "eval", "N(x1,x2)", "011")
    assert code == 2
    assert "bitstring" in err


def test_eval_parse_error(capsys):
    code, _, err = run_cli(capsys, "eval", "N(x1,", "01")
    assert code == 2
    assert "error" in err


def test_eval_deterministic_bytes(capsys):
    _, out1, _ = run_cli(capsys, "eval", "N(N(x1,x2),x3)", "101", "--seed", "9")
    _, out2, _ = run_cli(capsys, "eval", "N(N(x1,x2),x3)", "101", "--seed", "9")
    assert out1 == out2


def test_spectrum_csv_two_columns(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "N(x1,x2)", "10", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "theta,overlap2"
    assert all(len(line.split(",")) == 2 for line in lines[1:])


def test_spectrum_value0_leads_with_phase_zero(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "N(x1,x2)", "11", "--format", "json")
    report = json.loads(out)
    first = report["rows"][0]
    assert abs(first["theta"]) <= 1e-9
    total0 = sum(r["overlap2"] for r in report["rows"] if abs(r["theta"]) <= 1e-9)
    assert total0 >= 0.2


def test_spectrum_value1_above_floor(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "N(x1,x2)", "00", "--format", "json")
    report = json.loads(out)
    floor = report["theta_min"]
    relevant = [abs(r["theta"]) for r in report["rows"] if r["overlap2"] > 1e-12]
    assert min(relevant) >= floor


def test_certify_value0(capsys):
    code, out, _ = run_cli(capsys, "certify", "N(N(x1,x2),N(x3,x4))", "0000")
    assert code == 0
    report = json.loads(out)
    assert report["certificate_count"] == 4
    assert report["max_kernel_residual"] <= 1e-10
    assert report["witness_overlap"] >= 1 / math.sqrt(5) - 1e-9
    assert report["max_norm2"] <= report["norm_bound"] + 1e-9
    assert all("vertices" in c and "amplitudes" in c for c in report["certificates"])


def test_certify_value1_fails_with_message(capsys):
    code, _, err = run_cli(capsys, "certify", "N(x1,x2)", "00")
    assert code == 1
    assert "value-0" in err


def test_verify_balanced_small(capsys):
    code, out, _ = run_cli(capsys, "verify", "--corpus", "balanced", "--k-max", "1", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["summary"]["all_passed"] is True
    assert report["summary"]["failed"] == 0


def test_verify_unknown_selector(capsys):
    code, _, err = run_cli(capsys, "verify", "--selector", "nonsense")
    assert code == 2
    assert "unknown check" in err


def test_verify_table_output(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "--corpus", "balanced", "--k-max", "0", "--selector", "odd-levels,gap"
    )
    assert code == 0
    assert "ALL PASS" in out


def test_scaling_csv(capsys):
    code, out, _ = run_cli(capsys, "scaling", "--k-list", "2", "--trials", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("k,N,tail,register_bits,trials,mean_queries")
    assert len(lines) == 2


def test_scaling_json_monotone(capsys):
    code, out, _ = run_cli(
        capsys, "scaling", "--k-list", "2,4", "--trials", "2", "--format", "json", "--seed", "3"
    )
    report = json.loads(out)
    qs = [r["mean_queries"] for r in report["rows"]]
    assert qs[1] > qs[0]
    assert report["slope"] > 0


def test_output_file_and_plot(tmp_path, capsys):
    out_csv = tmp_path / "spec.csv"
    fig = tmp_path / "spec.png"
    code, _, _ = run_cli(
        capsys,
        "spectrum",
        "N(x1,x2)",
        "01",
        "--format",
        "csv",
        "--output",
        str(out_csv),
        "--plot",
    )
    assert code == 0
    assert out_csv.exists()
    assert fig.exists() and fig.stat().st_size > 0


def test_scaling_plot_explicit_path(tmp_path, capsys):
    fig = tmp_path / "queries.png"
    code, _, _ = run_cli(
        capsys, "scaling", "--k-list", "2", "--trials", "1", "--plot", str(fig), "--format", "csv"
    )
    assert code == 0
    assert fig.exists()


def test_verify_plot(tmp_path, capsys):
    fig = tmp_path / "suite.png"
    code, _, _ = run_cli(
        capsys,
        "verify",
        "--corpus",
        "balanced",
        "--k-max",
        "0",
        "--plot",
        str(fig),
        "--format",
        "json",
    )
    assert code == 0
    assert fig.exists() and fig.stat().st_size > 0


def test_formula_from_file(tmp_path, capsys):
    path = tmp_path / "formula.txt"
    path.write_text("N(N(x1,x2),x3)\n")
    code, out, _ = run_cli(capsys, "eval", f"@{path}", "110", "--seed", "2")
    assert code == 0
    assert json.loads(out)["agree"] is True


def test_tail_override_flag(capsys):
    code, out, _ = run_cli(capsys, "eval", "N(x1,x2)", "11", "--tail", "8")
    assert code == 0
    assert json.loads(out)["tail"] == 8
