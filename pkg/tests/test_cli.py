import io
import subprocess
import sys

import pytest

from mproots.cli import GRAMMAR, build_parser, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_solve_f2_prints_root_and_tnfe():
    code, out, _ = run("solve", "--function", "f2", "--guess", "1.5", "--method", "om8")
    assert code == 0
    assert "root: 1.34742" in out
    assert "TNFE: 8" in out.splitlines()


def test_any_beta_still_converges():
    code, out, _ = run("solve", "--function", "f2", "--guess", "1.5", "--method", "om8", "--beta", "99", "--tol", "1e-50")
    assert code == 0 and "status: converged" in out


def test_expression_function_and_trace():
    code, out, _ = run("solve", "--function", "x^2-2", "--guess", "1", "--method", "sm7", "--digits", "100", "--trace")
    assert code == 0
    assert "root: 1.4142135623730950488" in out
    assert out.count("|f(x_n)|") >= 2


@pytest.mark.parametrize("method", ["newton", "steffensen", "sm7", "om8", "om8df"])
def test_every_method_runs(method):
    code, out, _ = run("solve", "--function", "f2", "--guess", "1.3", "--method", method, "--digits", "80")
    assert code == 0 and "TNFE:" in out


def test_no_convergence_exit_code():
    code, out, _ = run("solve", "--function", "x^2-2", "--guess", "1000", "--method", "newton", "--max-iters", "2", "--digits", "60")
    assert code == 2 and "status: max_iterations" in out


def test_divergence_exit_code():
    code, _, _ = run("solve", "--function", "exp(x^2)", "--guess", "30", "--method", "steffensen", "--digits", "60")
    assert code == 2


def test_numeric_failure_exit_code():
    code, _, err = run("solve", "--function", "x^2+1", "--guess", "0", "--method", "newton", "--digits", "60")
    assert code == 3 and err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["solve"],
        ["solve", "--function", "f2"],
        ["solve", "--function", "10x", "--guess", "1"],
        ["solve", "--function", "f2", "--guess", "1.5", "--method", "halley"],
        ["solve", "--function", "f2", "--guess", "1.5", "--digits", "10"],
        ["solve", "--function", "f2", "--guess", "abc"],
        ["solve", "--function", "f2", "--guess", "1.5", "--method", "om8df", "--shift-exponent", "0"],
        ["solve", "--function", "f2", "--guess", "1.5", "--alpha", "x"],
        ["bench", "--suite", "table4"],
        ["bench", "--suite", "table2", "--methods", "newton"],
        ["bench", "--methods", "om9"],
        ["basin", "--polynomial", "1,0,-1", "--out", "x.ppm", "--resolution", "ten"],
        ["basin", "--polynomial", "1,0,-1", "--out", "x.ppm", "--window", "1,2,3"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_1_with_documentation(argv):
    code, _, err = run(*argv)
    assert code == 1
    assert "usage error" in err
    assert GRAMMAR in err
    assert "--shift-exponent" in err and "--polynomial" in err


def test_om8df_warns_below_three():
    code, _, err = run("solve", "--function", "f2", "--guess", "1.35", "--method", "om8df", "--shift-exponent", "2", "--digits", "80")
    assert code == 0 and "warning" in err and "7" in err
    code, _, err = run("solve", "--function", "f2", "--guess", "1.35", "--method", "om8df", "--digits", "80")
    assert code == 0 and err == ""


def test_bench_table3_csv_has_28_rows():
    code, out, _ = run("bench", "--suite", "table3", "--methods", "om8", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 29
    assert lines[0] == "function,guess,method,protocol,exponent_or_iterations,tnfe,status,precision_digits"
    assert "f1,1.5,OM8,tolerance,2,8,converged,1000" in lines


def test_bench_all_to_file(tmp_path):
    path = tmp_path / "t.md"
    code, out, _ = run("bench", "--suite", "all", "--methods", "om8,newton", "--format", "markdown", "--out", str(path), "--digits", "300")
    text = path.read_text()
    assert code == 0 and out == ""
    assert "TNFE-12" in text and "| f | Guess | Newton | OM8 |" in text


def test_coc_prints_estimate_window_and_stderr():
    code, out, _ = run("coc", "--function", "f2", "--guess", "1.5", "--method", "om8")
    assert code == 0
    value = float(out.split("COC:")[1].split()[0])
    assert 7.7 <= value <= 8.3
    assert "window:" in out and "stderr:" in out


def test_coc_without_data_is_numeric_failure():
    code, _, err = run("coc", "--function", "f2", "--guess", "1.5", "--method", "newton", "--digits", "60", "--max-iters", "2")
    assert code == 3 and "error" in err


def test_basin_writes_ppm(tmp_path):
    path = tmp_path / "z3.ppm"
    code, out, _ = run("basin", "--polynomial", "1,0,0,-1", "--window", "-2,2,-2,2", "--resolution", "24x16", "--out", str(path))
    assert code == 0 and "wrote" in out
    assert path.read_bytes().startswith(b"P6\n24 16\n255\n")


def test_negative_guess_and_window_values(tmp_path):
    code, out, _ = run("solve", "--function", "f3", "--guess", "-1.3", "--digits", "60")
    assert code == 0 and "root: -1.20764" in out
    code, _, _ = run("basin", "--polynomial", "1,0,-1", "--window", "-.5,.5,-1,1", "--resolution", "3x3", "--out", str(tmp_path / "w.ppm"))
    assert code == 0


def test_basin_degree_one_rejected(tmp_path):
    code, _, err = run("basin", "--polynomial", "1,-1", "--out", str(tmp_path / "x.ppm"))
    assert code == 3 and "degree" in err


def test_config_file_supplies_flags_and_flags_win(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# f2 from a config file\nfunction = f2\nguess = 1.5\nmethod = newton\nverbose = true\n", encoding="utf-8")
    code, out, _ = run("solve", "--config", str(cfg), "--method", "om8")
    assert code == 0
    assert "# method = om8" in out and "# function = f2" in out and "TNFE: 8" in out


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("function = f2\ncolour = blue\n", encoding="utf-8")
    code, _, err = run("solve", "--config", str(cfg), "--guess", "1.5")
    assert code == 1 and "colour" in err


def test_config_missing_file():
    code, _, err = run("solve", "--config", "/nonexistent/x.cfg", "--function", "f2", "--guess", "1")
    assert code == 1 and "config" in err


def _documented_flags(name):
    sub = build_parser()._subparsers._group_actions[0].choices[name]
    return [a.dest for a in sub._actions if a.option_strings and a.dest != "help"]


@pytest.mark.parametrize("name", ["solve", "bench", "coc", "basin"])
def test_verbose_header_echoes_every_flag(name, tmp_path):
    argv = {
        "solve": ["solve", "--function", "f2", "--guess", "1.5", "--digits", "60"],
        "coc": ["coc", "--function", "f2", "--guess", "1.5", "--digits", "1000"],
        "bench": ["bench", "--suite", "table3", "--digits", "60", "--out", str(tmp_path / "b.csv")],
        "basin": ["basin", "--polynomial", "1,0,-1", "--resolution", "4x4", "--out", str(tmp_path / "b.ppm")],
    }[name]
    code, out, _ = run(*argv, "--verbose")
    assert code == 0
    header = [line for line in out.splitlines() if line.startswith("# ")]
    for dest in _documented_flags(name):
        assert any(line.startswith(f"# {dest.replace('_', '-')} = ") for line in header), dest


def test_guess_is_parsed_exactly():
    # a float detour would start from 1.7199999999999999733546474089962430298328399658203125
    code, out, _ = run("solve", "--function", "f1", "--guess", "1.72", "--tol", "1e-900", "--max-iters", "3", "--trace")
    assert code == 0 or code == 2
    first = [line for line in out.splitlines() if line.startswith("n=3")][0]
    assert first.endswith("e-689")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mproots", "solve", "--function", "f2", "--guess", "1.5", "--digits", "60"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "TNFE: 8" in proc.stdout
