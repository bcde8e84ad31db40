import subprocess
import sys

import pytest

from ccsp.cli import main
from ccsp.instance import all_positive_ksat, parse_instance, serialize_instance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def allpos(tmp_path):
    path = tmp_path / "allpos.ccsp"
    path.write_text(serialize_instance(all_positive_ksat(6, 3)))
    return str(path)


def test_check_ok_and_incomplete(capsys, tmp_path, allpos):
    assert run(capsys, "check", allpos)[:2] == (0, "ok\n")
    bad = tmp_path / "bad.ccsp"
    bad.write_text("p ccsp 2 2 3\n1 2 u 1 00\n")
    code, out, _ = run(capsys, "check", str(bad))
    assert code == 1 and "IncompleteInstance" in out


def test_solve_enumerate(capsys, allpos):
    code, out, err = run(capsys, "solve", allpos, "--enumerate", "--small-cutoff", "2")
    assert code == 0
    assert len(out.splitlines()) == 22
    assert "c algo kcsp" in err and "c result 22 solutions" in err
    assert "seconds" not in err


def test_solve_timing_flag(capsys, allpos):
    _, _, err = run(capsys, "solve", allpos, "--timing")
    assert "c seconds" in err


def test_solve_unsat_nae(capsys, tmp_path):
    path = tmp_path / "nae.ccsp"
    assert run(capsys, "gen", "symmetric", "--n", "5", "--k", "3", "--S", "1,2",
               "-o", str(path))[0] == 0
    code, out, err = run(capsys, "solve", str(path))
    assert (code, out) == (1, "UNSAT\n")
    assert "c algo induced2" in err


def test_solve_errors(capsys, tmp_path):
    assert run(capsys, "solve", str(tmp_path / "missing.ccsp"))[0] == 2
    path = tmp_path / "t.ccsp"
    run(capsys, "gen", "random", "--n", "4", "--k", "2", "--r", "3", "-o", str(path))
    code, _, err = run(capsys, "solve", str(path), "--algo", "kcsp")
    assert code == 2 and "error:" in err
    code, _, _ = run(capsys, "solve", str(path), "--algo", "csp23", "--enumerate")
    assert code == 2
    assert run(capsys, "solve")[0] == 2


def test_syntax_error_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.ccsp"
    path.write_text("p ccsp 2 2 2\n1 2 u 1 05\n")
    code, _, err = run(capsys, "check", str(path))
    assert code == 2 and "line 2" in err


def test_pac_roundtrip(capsys, tmp_path):
    path = tmp_path / "pac.ccsp"
    run(capsys, "gen", "pac", "--n", "5", "--r-pac", "5", "--l", "5", "--mode", "complete",
        "--seed", "3", "-o", str(path))
    assert "c pac 5 5 complete" in path.read_text()
    assert run(capsys, "check", str(path))[1] == "ok\n"
    code, out, err = run(capsys, "solve", str(path))
    assert "c algo pac55" in err
    assert code in (0, 1) and out.split()[0] in ("SAT", "UNSAT")


def test_gen_families(capsys, tmp_path):
    cnf = tmp_path / "f.cnf"
    assert run(capsys, "gen", "cnf", "--n", "4", "--k", "2", "--m", "4", "-o", str(cnf))[0] == 0
    assert run(capsys, "gen", "densify", "--input", str(cnf))[0] == 0
    cnf.write_text("p cnf 4 3\n1 2 0\n-2 3 0\n3 -4 0\n")
    code, out, _ = run(capsys, "gen", "product", "--input", str(cnf), "--t", "2")
    assert code == 0 and parse_instance(out).n == 8
    run(capsys, "gen", "cnf", "--n", "5", "--k", "3", "--m", "3", "-o", str(cnf))
    code, out, _ = run(capsys, "gen", "from-cnf", "--input", str(cnf))
    assert code == 0 and parse_instance(out).k == 3
    code, out, _ = run(capsys, "gen", "gadget", "--kind", "sixpac", "--t", "2")
    assert code in (0, 1) and "gadget sixpac t 2" in out
    parse_instance(out)
    assert run(capsys, "gen", "random", "--n", "4")[0] == 2


def test_min2sat_exact(capsys, tmp_path):
    path = tmp_path / "m.ccsp"
    run(capsys, "gen", "random", "--n", "6", "--k", "2", "--max-tuples", "2", "-o", str(path))
    code, out, err = run(capsys, "min2sat", str(path), "--exact", "--trials", "4")
    assert code == 0
    keys = [line.split()[0] for line in out.splitlines()]
    assert keys == ["cost", "assignment_cost", "assignment", "deleted", "sdp", "opt", "ratio"]
    assert "c consistent True" in err


def test_bench_writes_csv_and_figures(capsys, tmp_path):
    out_dir = tmp_path / "bench"
    code, out, _ = run(capsys, "bench", "csp23", "--n-values", "4,5", "--reps", "2",
                       "--out", str(out_dir))
    assert code == 0
    assert out.splitlines()[0] == "family,algo,n,rep,seed,result,nodes"
    assert len(out.splitlines()) == 5
    assert (out_dir / "csp23.csv").read_text() == out
    assert (out_dir / "csp23_nodes.png").stat().st_size > 0


def test_module_entry_point(tmp_path, allpos):
    res = subprocess.run([sys.executable, "-m", "ccsp.cli", "solve", allpos],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("SAT ")
