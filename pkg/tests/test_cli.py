from pathlib import Path

import pytest

from strathom.cli import main, run_captured
from strathom.metricgrp import LIBRARY, direct_sum, format_metric_group, parse_metric_group
from strathom.moddata import modular_library, parse_modular_data

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def run(*argv):
    return run_captured([str(a) for a in argv])


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---- library


def test_library_list_kinds():
    code, out = run("library", "list")
    assert code == 0
    lines = out.splitlines()
    assert "metric semion" in lines
    assert "modular ising" in lines
    assert "fusion vec-z4 over rep-z2" in lines


@pytest.mark.parametrize("name", sorted(LIBRARY))
def test_library_show_metric_round_trip(name):
    code, out = run("library", "show", name)
    assert code == 0
    assert parse_metric_group(out) == LIBRARY[name]


@pytest.mark.parametrize("name", sorted(modular_library()))
def test_library_show_modular_round_trip(name):
    code, out = run("library", "show", name, "--modular")
    assert code == 0
    assert parse_modular_data(out, name) == modular_library()[name]


def test_library_show_semion_text():
    assert run("library", "show", "semion") == (0, "(2)\n(0) : 0/1\n(1) : 1/4\n")


def test_library_show_unknown():
    assert run("library", "show", "nope")[0] == 2


# ---- verify-md


def test_verify_md_modular_file(tmp_path):
    _, text = run("library", "show", "ising", "--modular")
    code, out = run("verify-md", write(tmp_path, "ising.md", text))
    assert code == 0
    assert "FAIL" not in out


def test_verify_md_degenerate_metric_file(tmp_path):
    _, text = run("library", "show", "rep-z2")
    code, out = run("verify-md", write(tmp_path, "rep.mg", text))
    assert code == 1
    assert "S unitary: FAIL" in out


def test_verify_md_missing_file():
    assert run("verify-md", "/nonexistent/file")[0] == 2


# ---- mext and center


def test_mext_svec():
    code, out = run("mext", "--base", "svec")
    assert code == 0
    assert out.startswith("classes 8\n")
    assert "cyclic yes" in out


def test_mext_with_inner(tmp_path):
    inner = format_metric_group(direct_sum(LIBRARY["rep-z2"], LIBRARY["semion"]))
    code, out = run("mext", "--base", "rep-z2", "--inner", write(tmp_path, "c.mg", inner))
    assert code == 0
    assert "check action free and transitive: pass" in out


def test_mext_inner_without_matching_center():
    # semion is nondegenerate, so rep-z2 is not its Mueger center
    assert run("mext", "--base", "rep-z2", "--inner", "semion")[0] == 1


def test_mext_bound_exceeded(monkeypatch):
    monkeypatch.setenv("STRATHOM_MAX_ORDER", "2")
    assert run("mext", "--base", "rep-z2")[0] == 3


def test_center_over_trivial():
    code, out = run("center", "--cat", "vec-z2", "--base", "trivial")
    assert code == 0
    assert out.splitlines()[0] == "(2, 2)"
    assert out.endswith("nondegenerate over E: yes\n")


def test_center_unknown_category():
    assert run("center", "--cat", "vec-z3", "--base", "svec")[0] == 2


# ---- surfaces


def test_evaluate_torus_demo():
    code, out = run("evaluate", DEMOS / "torus-toriccode.surf")
    assert code == 0
    assert "gsd 4" in out.splitlines()


def test_evaluate_symbolic_demo():
    code, out = run("evaluate", DEMOS / "symbolic-sphere.surf")
    assert code == 1
    assert "symbolic residue: Sym(X)" in out


@pytest.mark.parametrize("path", sorted(DEMOS.glob("*.surf")), ids=lambda p: p.name)
def test_demos_are_valid(path):
    assert run("validate", path)[0] == 0


def test_reduce_trace_ends_with_surface():
    code, out = run("reduce", DEMOS / "genus2-toriccode.surf", "--trace")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("step 1: ")
    assert "strathom-surface 1" in lines
    assert lines[lines.index("strathom-surface 1") - 1].endswith("g=0")


def test_validate_reports_bad_surface(tmp_path):
    p = write(tmp_path, "bad.surf", "strathom-surface 1\nbase trivial\ninvolution (1 2)\nrotation (1) (2)\n"
                                     "face 1 : toric-code\nedge 1 : toric-code\n"
                                     "vertex 1 : Sym(p)\nvertex 2 : Sym(q)\n")
    code, out = run("validate", p)
    assert code == 1
    assert out.rstrip().endswith("invalid")


def test_parse_error_is_input_error(tmp_path):
    assert run("validate", write(tmp_path, "x.surf", "not a surface\n"))[0] == 2


def test_anomaly_check_failure(tmp_path):
    p = write(tmp_path, "rep.surf", "strathom-surface 1\nbase trivial\nface * : rep-z2\nvertex * : Sym(p)\n")
    code, out = run("anomaly-check", p)
    assert code == 1
    assert out.rstrip().endswith("anomaly-free: no")


# ---- dispatch


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_no_command(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_output_independent_of_jobs():
    a = run("--jobs", "1", "mext", "--base", "svec")
    b = run("--jobs", "3", "mext", "--base", "svec")
    assert a == b


def test_selftest_table():
    code, out = run("selftest")
    lines = out.splitlines()
    assert [line.split()[1] for line in lines[:9]] == [str(n) for n in range(1, 10)]
    assert all(line.split()[2] in ("PASS", "FAIL") for line in lines[:9])
    assert lines[-1].endswith("criteria passed")
    assert code == (0 if lines[-1].startswith("9/9") else 1)
