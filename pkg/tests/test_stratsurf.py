import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strathom.moddata import modular_library, verlinde_genus_dim
from strathom.stratsurf import (
    EvaluationError,
    Label,
    MoveError,
    ReductionError,
    SurfaceError,
    SymbolicResidue,
    Trace,
    applicable_moves,
    apply_move,
    check_anomaly_free,
    closed_surface,
    evaluate,
    evaluate_reduced,
    format_surface,
    get_backend,
    move_add_edge,
    move_add_point,
    move_collapse,
    move_contract,
    move_cut_handle,
    move_fuse,
    move_merge,
    move_remove_edge,
    parse_label,
    parse_surface,
    random_reduction,
    random_sphere,
    reduce_genus,
    reduce_to_points,
    sort_errors,
    sphere,
    validate_surface,
)

EULER_DELTA = {
    "contract": (-1, -1, 0),
    "add-point": (1, 1, 0),
    "add-edge-at": (0, 1, 1),
    "remove-edge": (0, -1, -1),
    "collapse": (0, -1, -1),
    "fuse": (0, -1, -1),
    "merge": (0, -1, -1),
}


def surf(text):
    return parse_surface("strathom-surface 1\n" + text)


def gsd(s):
    return evaluate(s).gsd_unit


# Three parallel edges between p (darts 1, 3, 5) and q: M = 1 -> 2 and N = 4 -> 3 bound the bigon D.
# Both carry the e-m duality, so the monodromy around each vertex is trivial.
FUSE_PATTERN = """
base trivial
involution (1 2) (3 4) (5 6)
rotation (1 3 5) (2 6 4)
face 1 : toric-code
face 3 : toric-code
face 5 : toric-code
edge 1 : Iso(toric-code, toric-code, 1)
edge 4 : Iso(toric-code, toric-code, 1)
edge 5 : ForgetTo1Disk(toric-code)
vertex 1 : Obj(toric-code, 1.0)
vertex 2 : Obj(toric-code, 0.1)
"""


# ---- labels


def test_label_round_trip():
    text = "VertexFuse(Obj(toric-code, 1.0), RelTensorBimod(Rev(Iso(semion, semion, 0)), semion, ForgetTo1Disk(semion)), FunE(semion, semion))"
    lab = parse_label(text)
    assert str(lab) == text
    assert parse_label(str(lab)) == lab
    assert hash(parse_label(text)) == hash(lab)


@pytest.mark.parametrize("bad", ["", "F(", "F(a,)", "F(a))", "(a)", "F(a) b"])
def test_label_syntax_errors(bad):
    with pytest.raises(SurfaceError):
        parse_label(bad)


def test_sort_checking():
    assert sort_errors(parse_label("toric-code"), 2) == []
    assert sort_errors(parse_label("vec-z2"), 1) == []
    assert sort_errors(parse_label("RelProdOverE(semion, Conj(semion))"), 2) == []
    assert sort_errors(parse_label("Sym(anything)"), 0) == []
    assert "expected a 1-cell" in sort_errors(parse_label("toric-code"), 1)[0]
    assert "unknown atom" in sort_errors(parse_label("nonsense"), 2)[0]
    assert "takes 3 arguments" in sort_errors(parse_label("EdgeMerge(vec-z2, toric-code)"), 1)[0]
    assert sort_errors(parse_label("VertexFuse(ForgetTo1Disk(semion), vec-z2, Obj(semion, 1))"), 0)
    assert sort_errors(parse_label("Rev(Obj(semion, 1))"), 0)


# ---- validation


def test_validate_sphere_and_torus():
    r = validate_surface(sphere("toric-code"))
    assert r.ok and r.genus == 0
    r = validate_surface(closed_surface(1, "toric-code"))
    assert r.ok and (r.V, r.E, r.F, r.genus) == (1, 2, 1, 1)
    assert validate_surface(closed_surface(3, "semion")).genus == 3


def test_validate_orientation_error():
    ok = surf("base trivial\ninvolution (1 2)\nrotation (1) (2)\nface (1 2) : semion\nedge 1 : ForgetTo1Disk(semion)\n"
              "vertex 1 : Obj(semion, 0)\nvertex 2 : Obj(semion, 0)\n")
    assert validate_surface(ok).ok
    # a triangle whose declared boundary runs against sigma . alpha
    tri = ("base trivial\ninvolution (1 2) (3 4) (5 6)\nrotation (1 6) (2 3) (4 5)\nface {} : semion\nface 2 : semion\n"
           "edge 1 : ForgetTo1Disk(semion)\nedge 3 : ForgetTo1Disk(semion)\nedge 5 : ForgetTo1Disk(semion)\n"
           "vertex 1 : Obj(semion, 0)\nvertex 2 : Obj(semion, 0)\nvertex 4 : Obj(semion, 0)\n")
    assert validate_surface(surf(tri.format("(3 5 1)"))).ok
    bad = surf(tri.format("(1 5 3)"))
    errors = validate_surface(bad).errors
    assert any(e.startswith("orientation error") for e in errors)


def test_validate_structural_errors():
    disconnected = surf("base trivial\ninvolution (1 2) (3 4)\nrotation (1 2) (3 4)\nface 1 : semion\nface 2 : semion\n"
                        "face 3 : semion\nface 4 : semion\nedge 1 : ForgetTo1Disk(semion)\n"
                        "edge 3 : ForgetTo1Disk(semion)\nvertex 1 : Obj(semion, 0)\nvertex 3 : Obj(semion, 0)\n")
    assert "not connected" in " ".join(validate_surface(disconnected).errors)
    unlabeled = surf("base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : semion\nedge 1 : ForgetTo1Disk(semion)\n")
    assert any("needs exactly one label" in e for e in validate_surface(unlabeled).errors)
    missing_face = surf("base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : semion\n"
                        "edge 1 : ForgetTo1Disk(semion)\nvertex 1 : Obj(semion, 0)\n")
    assert any("missing label" in e for e in validate_surface(missing_face).errors)
    wrong_sort = sphere("vec-z2")
    assert not validate_surface(wrong_sort).ok


def test_parse_errors():
    with pytest.raises(SurfaceError, match="header"):
        parse_surface("base trivial\n")
    with pytest.raises(SurfaceError, match="pair two darts"):
        surf("base trivial\ninvolution (1 2 3)\n")
    with pytest.raises(SurfaceError, match="unknown keyword"):
        surf("base trivial\nblob 3\n")
    with pytest.raises(SurfaceError, match="twice"):
        surf("base trivial\ninvolution (1 2) (2 3)\n")


# ---- file format


def test_file_round_trip():
    rng = random.Random(3)
    for s in [sphere("semion"), closed_surface(2, "toric-code"), surf(FUSE_PATTERN)] + [
            random_sphere(rng, b) for b in ("trivial", "rep-z2", "svec")]:
        text = format_surface(s)
        again = parse_surface(text)
        assert format_surface(again) == text
        assert evaluate(again) == evaluate(s)


def test_comments_and_face_cycles_parse():
    s = surf("# a torus\nbase trivial\ninvolution (1 2) (3 4)\nrotation (1 3 2 4)\nface (1 4 2 3) : semion  # one face\n"
             "edge 1 : ForgetTo1Disk(semion)\nedge 3 : ForgetTo1Disk(semion)\nvertex 1 : Obj(semion, 0)\n")
    assert validate_surface(s).ok and gsd(s) == 2


# ---- anomaly check


def test_anomaly_toric_code_sphere_passes():
    r = check_anomaly_free(sphere("toric-code"))
    assert r.passed and [row.status for row in r.rows] == ["pass", "pass"]


def test_anomaly_degenerate_face_fails():
    # (Z2, q = 0) over trivial E: the radical is the whole group
    r = check_anomaly_free(sphere("rep-z2"))
    assert not r.passed
    assert "Mueger center has order 2" in r.failures()[0].detail
    assert check_anomaly_free(sphere("rep-z2", base="rep-z2")).passed


def test_anomaly_fusion_wall_closedness():
    def wall_between(left, right, wall):
        return surf(f"base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : {right}\nface 2 : {left}\n"
                    f"edge 1 : {wall}\nvertex 1 : ForgetTo0Disk(ForgetTo1Disk({left}))\n")

    # Z(Vec_Z2) is the toric code, so Vec_Z2 is a gapped boundary between toric code and vacuum
    ok = check_anomaly_free(wall_between("toric-code", "trivial", "vec-z2"))
    assert ok.passed
    assert [r.status for r in ok.rows] == ["pass", "pass", "pass", "assumed"]
    bad = check_anomaly_free(wall_between("toric-code", "toric-code", "vec-z2"))
    assert [r.cell for r in bad.failures()] == ["edge 1"]
    # an evaluator cannot pass through a non-invertible wall
    with pytest.raises(SymbolicResidue, match="non-invertible"):
        evaluate(wall_between("toric-code", "trivial", "vec-z2"))


def test_anomaly_wall_mismatch_and_monodromy():
    # a closed duality wall is fine, a duality wall ending at an ordinary point is not
    loop = surf("base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : toric-code\nface 2 : toric-code\n"
                "edge 1 : Iso(toric-code, toric-code, 1)\nvertex 1 : Obj(toric-code, 0)\n")
    assert check_anomaly_free(loop).passed
    s = surf("base trivial\ninvolution (1 2)\nrotation (1) (2)\nface 1 : toric-code\n"
             "edge 1 : Iso(toric-code, toric-code, 1)\nvertex 1 : Obj(toric-code, 0)\nvertex 2 : Obj(toric-code, 0)\n")
    r = check_anomaly_free(s)
    assert [row.detail for row in r.failures()] == ["nontrivial monodromy around the vertex"] * 2
    s = surf("base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : semion\nface 2 : toric-code\n"
             "edge 1 : ForgetTo1Disk(semion)\nvertex 1 : Obj(toric-code, 0)\n")
    assert "wall ends do not match" in check_anomaly_free(s).failures()[0].detail


def test_anomaly_symbolic_is_assumed():
    r = check_anomaly_free(sphere("Sym(X)", point="Sym(p)"))
    assert r.passed
    assert {row.status for row in r.rows} == {"assumed"}


def test_anomaly_preserved_by_moves():
    rng = random.Random(11)
    for _ in range(40):
        s = random_sphere(rng, rng.choice(["trivial", "rep-z2", "svec"]), cells=rng.randint(3, 16))
        name, args = rng.choice(applicable_moves(s))
        assert check_anomaly_free(apply_move(s, name, args)).passed


# ---- moves


def test_fuse_pattern_combinatorics():
    s = surf(FUSE_PATTERN)
    assert validate_surface(s).ok and check_anomaly_free(s).passed
    assert [len(f) for f in s.faces] == [2, 2, 2]
    t = move_fuse(s, 1, 4)
    assert (t.V, t.E, t.F) == (2, 2, 2)
    assert len(t.alpha) == len(s.alpha) - 2
    assert 2 in t.positive
    assert str(t.edge_label[2]) == ("RelTensorBimod(Rev(Iso(toric-code, toric-code, 1)), toric-code, "
                                    "Rev(Iso(toric-code, toric-code, 1)))")
    assert evaluate(t) == evaluate(s)


def test_fuse_rejections():
    s = surf(FUSE_PATTERN)
    with pytest.raises(MoveError, match="distinct edges"):
        move_fuse(s, 1, 1)
    with pytest.raises(MoveError, match="pattern mismatch"):
        move_fuse(s, 1, 5)
    with pytest.raises(MoveError, match="not a bigon"):
        move_merge(s, 1, 4)


def test_merge_then_contract_matches_contract_path():
    s = surf(FUSE_PATTERN)
    merged = move_contract(move_merge(s, 1, 5), 1)
    contracted = move_contract(s, 5)
    assert (merged.V, merged.E, merged.F) == (1, 1, 2)
    assert evaluate(merged) == evaluate(contracted) == evaluate(s)


def test_merge_mismatched_middle_is_rejected_by_backend():
    lab = parse_label("EdgeMerge(Iso(toric-code, toric-code, 0), semion, ForgetTo1Disk(semion))")
    with pytest.raises(EvaluationError, match="do not meet"):
        get_backend("trivial").wall(lab)


def test_contract_examples():
    s = surf("base trivial\ninvolution (1 2)\nrotation (1) (2)\nface 1 : semion\nedge 1 : Iso(semion, semion, 0)\n"
             "vertex 1 : Obj(semion, 1)\nvertex 2 : Obj(semion, 1)\n")
    t = move_contract(s, 1)
    assert (t.V, t.E, t.F) == (1, 0, 1)
    assert str(t.vertex_label[None]) == "VertexFuse(Obj(semion, 1), Iso(semion, semion, 0), Obj(semion, 1))"
    assert gsd(t) == gsd(s) == 1
    with pytest.raises(MoveError, match="loop"):
        move_contract(closed_surface(1, "semion"), 1)


def test_contraction_chain_associates():
    # path p - q - r with anyons e, e, m in the toric code
    s = surf("base trivial\ninvolution (1 2) (3 4)\nrotation (1) (2 3) (4)\nface 1 : toric-code\n"
             "edge 1 : ForgetTo1Disk(toric-code)\nedge 3 : Iso(toric-code, toric-code, 0)\n"
             "vertex 1 : Obj(toric-code, 1.0)\nvertex 2 : Obj(toric-code, 1.0)\nvertex 4 : Obj(toric-code, 0.1)\n")
    a = move_contract(move_contract(s, 1), 3)
    b = move_contract(move_contract(s, 3), 1)
    assert a.vertex_label[None] != b.vertex_label[None]
    # e + e + m = m
    assert evaluate_reduced(a) == evaluate_reduced(b) == evaluate(s)
    assert get_backend("trivial").point(a.vertex_label[None]).counts == {(0, 1): 1}


def test_add_point_then_contract():
    s = surf(FUSE_PATTERN)
    t = move_add_point(s, 4)
    assert (t.V - s.V, t.E - s.E, t.F - s.F) == (1, 1, 0)
    assert str(t.vertex_label[max(t.alpha)]) == "ForgetTo0Disk(Iso(toric-code, toric-code, 1))"
    assert evaluate(move_contract(t, 4)) == evaluate(s)


def test_add_parallel_copy_then_merge():
    s = surf(FUSE_PATTERN)
    t = move_add_edge(s, 1, 1, 2)
    assert (t.E, t.F) == (s.E + 1, s.F + 1)
    new = max(t.positive)
    assert evaluate(move_merge(t, 1, new)) == evaluate(s)


def test_add_edge_rejections():
    s = surf(FUSE_PATTERN)
    with pytest.raises(MoveError, match="not on the face boundary"):
        move_add_edge(s, 1, 1, 99)


def test_loop_in_torus_face_still_reduces():
    s = closed_surface(1, "toric-code")
    t = move_add_edge(s, 1, 1, 1)
    assert (t.V, t.E, t.F) == (1, 3, 2)
    assert gsd(t) == 4


def test_collapse_and_remove_edge():
    s = move_add_edge(sphere("semion", point="Obj(semion, 1)"), None, None, None)
    assert (s.V, s.E, s.F) == (1, 1, 2)
    assert move_collapse(s, 1).alpha == {}
    assert move_remove_edge(s, 1).alpha == {}
    assert evaluate_reduced(move_collapse(s, 1)) == evaluate_reduced(move_remove_edge(s, 1)) == evaluate(s)
    wall = surf("base trivial\ninvolution (1 2)\nrotation (1 2)\nface 1 : semion\nface 2 : semion\n"
                "edge 1 : Iso(semion, semion, 0)\nvertex 1 : Obj(semion, 0)\n")
    assert move_remove_edge(wall, 1).alpha == {}
    with pytest.raises(MoveError, match="not a monogon"):
        move_collapse(surf(FUSE_PATTERN), 1)
    with pytest.raises(MoveError, match="transparent"):
        move_remove_edge(surf(FUSE_PATTERN), 1)


def test_cut_handle_rejections():
    with pytest.raises(MoveError, match="one vertex and one 2-cell"):
        move_cut_handle(surf(FUSE_PATTERN), 1, 3)
    s = closed_surface(2, "semion")
    with pytest.raises(MoveError, match="handle"):
        move_cut_handle(s, 1, 5)
    assert move_cut_handle(s, 1, 3).genus == 1


# ---- reduction


def test_reduce_genus_steps():
    s = closed_surface(2, "toric-code")
    s1 = reduce_genus(s)
    assert s1.genus == 1
    s0 = reduce_genus(s1)
    assert s0.genus == 0
    with pytest.raises(ReductionError, match="genus 0"):
        reduce_genus(s0)
    with pytest.raises(ReductionError, match="genus 0"):
        reduce_to_points(s)


def test_reduce_to_points_fixed_point():
    s = sphere("toric-code")
    assert format_surface(reduce_to_points(s)) == format_surface(s)


def test_fuse_pattern_reduces_to_one_vertex():
    t = Trace()
    r = reduce_to_points(surf(FUSE_PATTERN), t)
    assert not r.alpha and len(t.lines) == 3
    assert t.lines[0] == "step 1: contract 1 V=1 E=2 F=3 chi=2 g=0"


def test_nontransparent_handle_is_refused():
    s = surf("base trivial\ninvolution (1 2) (3 4)\nrotation (1 3 2 4)\nface 1 : toric-code\n"
             "edge 1 : Iso(toric-code, toric-code, 1)\nedge 3 : ForgetTo1Disk(toric-code)\nvertex 1 : Obj(toric-code, 0)\n")
    assert check_anomaly_free(s).passed
    with pytest.raises(ReductionError, match="transparent"):
        evaluate(s)


@pytest.mark.parametrize("seed", range(6))
def test_reduction_measure_decreases(seed):
    rng = random.Random(seed)
    s = random_sphere(rng, "trivial", cells=20)
    t = Trace()
    reduce_to_points(s, t)
    measures = [(s.E, s.F)]
    for line in t.lines:
        fields = dict(part.split("=") for part in line.split() if "=" in part)
        measures.append((int(fields["E"]), int(fields["F"])))
    assert all(b < a for a, b in zip(measures, measures[1:]))


# ---- evaluation


@pytest.mark.parametrize("name", ["toric-code", "semion", "three-fermion", "double-semion", "z4-1", "ising", "ising-3"])
@pytest.mark.parametrize("genus", [0, 1, 2])
def test_unstratified_matches_verlinde(name, genus):
    r = evaluate(closed_surface(genus, name))
    assert r.gsd_unit == r.total_dim == verlinde_genus_dim(modular_library()[name], genus)


def test_frozen_gsd_values():
    assert [gsd(closed_surface(g, "toric-code")) for g in range(3)] == [1, 4, 16]
    assert gsd(closed_surface(1, "semion")) == 2
    assert gsd(closed_surface(2, "ising")) == 10


def test_evaluation_result_fields():
    r = evaluate(sphere("toric-code"))
    assert r.multiplicities == (("0", 1),) and r.gsd_unit == 1 and r.total_dim == 1
    assert r.format() == "base trivial\nmultiplicity 0 1\ngsd 1\ntotal_dim 1"


def test_evaluation_over_rep_z2_projects_to_E():
    # the charge 1 of Rep(Z2) inside Z(Vec_Z4, Rep(Z2)) is the image of the generator of E
    b = get_backend("rep-z2")
    C = b.phase(parse_label("CenterOverE(vec-z4)"))
    x = C.name_of(C.embed((1,)))
    r = evaluate(sphere("CenterOverE(vec-z4)", "rep-z2", f"Obj(CenterOverE(vec-z4), {x})"))
    assert r.multiplicities == (("0", 0), ("1", 1)) and r.gsd_unit == 0 and r.total_dim == 1
    torus = evaluate(closed_surface(1, "CenterOverE(vec-z4)", "rep-z2"))
    assert torus.multiplicities == (("0", 4), ("1", 0))


def test_stratified_torus_matches_unstratified():
    s = surf("base trivial\ninvolution (1 2) (3 4)\nrotation (1 3 2 4)\nface 1 : toric-code\n"
             "edge 1 : EdgeMerge(Iso(toric-code, toric-code, 1), toric-code, Rev(Iso(toric-code, toric-code, 1)))\n"
             "edge 3 : ForgetTo1Disk(toric-code)\nvertex 1 : Cross(Obj(toric-code, 0), Iso(toric-code, toric-code, 1))\n")
    assert gsd(s) == gsd(closed_surface(1, "toric-code")) == 4


def test_symbolic_residue():
    with pytest.raises(SymbolicResidue, match=r"symbolic residue: Sym\(X\)"):
        evaluate(sphere("Sym(X)"))
    with pytest.raises(EvaluationError, match="not anomaly-free"):
        evaluate(sphere("rep-z2"))


def test_relative_product_face():
    # semion boxtimes antisemion is the double semion
    s = closed_surface(1, "RelProdOverE(semion, Conj(semion))")
    assert gsd(s) == verlinde_genus_dim(modular_library()["double-semion"], 1) == 4
    s = closed_surface(1, "RelProdOverE(svec, CenterOverE(vec-z2xz2))", "svec")
    assert check_anomaly_free(s).passed


def test_backend_value_labels():
    b = get_backend("trivial")
    assert len(b.iso_list(b.phase(Label("toric-code")), b.phase(Label("toric-code")))) == 2
    with pytest.raises(EvaluationError, match="only 2 equivalences"):
        b.wall(parse_label("Iso(toric-code, toric-code, 5)"))
    with pytest.raises(EvaluationError, match="trivial base"):
        get_backend("rep-z2").phase(Label("ising"))


# ---- properties


@given(st.integers(0, 10 ** 6), st.sampled_from(["trivial", "rep-z2", "svec"]))
@settings(max_examples=60, deadline=None)
def test_single_move_invariance_and_euler(seed, base):
    rng = random.Random(seed)
    s = random_sphere(rng, base, cells=rng.randint(2, 20))
    before = evaluate(s)
    name, args = rng.choice(applicable_moves(s))
    t = apply_move(s, name, args)
    assert validate_surface(t).ok
    assert (t.V - s.V, t.E - s.E, t.F - s.F) == EULER_DELTA[name]
    assert t.genus == 0
    assert check_anomaly_free(t).passed
    assert evaluate(t) == before


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_confluence(seed):
    rng = random.Random(seed)
    s = random_sphere(rng, rng.choice(["trivial", "rep-z2", "svec"]), cells=20)
    a = evaluate_reduced(random_reduction(s, random.Random(seed + 1)))
    b = evaluate_reduced(random_reduction(s, random.Random(seed + 2)))
    assert a == b == evaluate(s)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_random_moves_on_higher_genus(seed):
    rng = random.Random(seed)
    s = closed_surface(rng.randint(1, 2), rng.choice(["toric-code", "semion"]))
    expected = evaluate(s)
    for _ in range(4):
        moves = [m for m in applicable_moves(s) if m[0] in ("add-point", "add-edge-at", "contract")]
        s = apply_move(s, *rng.choice(moves))
    assert evaluate(s) == expected
