"""Library-level checks for the nine acceptance criteria, used by ``strathom selftest``."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable

from .braidedmod import check_braided_module_axioms, perturb, random_braided_module
from .centerfun import FUSION_LIBRARY, check_center_monoidal, get_fusion, morita_test
from .metricgrp import LIBRARY, MetricEmbedding, condense, isotropic_subgroups
from .moddata import (
    GroupLikeAlgebra,
    condense_grouplike,
    element_label,
    from_metric_group,
    label_bijection,
    modular_library,
    verlinde_genus_dim,
)
from .mext import enumerate_mext
from .stratsurf import (
    applicable_moves,
    apply_move,
    check_anomaly_free,
    closed_surface,
    evaluate,
    format_surface,
    random_sphere,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"criterion {self.number} {'PASS' if self.passed else 'FAIL'} {self.title}: {self.detail}"


def criterion_1(jobs: int = 1) -> tuple[bool, str]:
    parts, ok = [], True
    for name in ("rep-z2", "svec"):
        r = enumerate_mext(LIBRARY[name], jobs=jobs)
        good = len(r.classes) == 8 and r.is_cyclic()
        ok &= good
        parts.append(f"{name} {len(r.classes)} classes{' cyclic' if r.is_cyclic() else ''}")
    return ok, ", ".join(parts)


def criterion_2(jobs: int = 1) -> tuple[bool, str]:
    bad = []
    for name in ("trivial", "rep-z2", "svec"):
        r = enumerate_mext(LIBRARY[name], jobs=jobs)
        bad += [f"{name}: {row}" for row, ok, _ in r.group_report() if not ok]
    return not bad, "; ".join(bad) or "associative, commutative, unit and inverse hold"


def criterion_3() -> tuple[bool, str]:
    total, bad = 0, []
    for base, cats in FUSION_LIBRARY.items():
        for a in cats:
            for b in cats:
                total += 1
                if not check_center_monoidal(cats[a], cats[b]).passed:
                    bad.append(f"{a} x {b} over {base}")
    return not bad, f"{total - len(bad)}/{total} pairs" + (f", first failure {bad[0]}" if bad else "")


def criterion_4() -> tuple[bool, str]:
    same = morita_test(get_fusion("vec-z2"), get_fusion("vec-z2")).equivalent
    diff = morita_test(get_fusion("vec-z2"), get_fusion("vec-z3")).equivalent
    return same and not diff, f"Z2~Z2 {same}, Z2~Z3 {diff}"


def criterion_5() -> tuple[bool, str]:
    rep, tc = LIBRARY["rep-z2"], LIBRARY["toric-code"]
    emb = MetricEmbedding(rep, tc, ((1, 0),))
    rng = random.Random(2024)
    derived_bad = perturb_missed = 0
    for _ in range(100):
        m = random_braided_module(rep, tc, emb, rng)
        if any(not c.passed for c in check_braided_module_axioms(m)):
            derived_bad += 1
        p, _, _ = perturb(m, rng)
        failures = [c for c in check_braided_module_axioms(p) if not c.passed]
        if not failures or any(c.witness is None for c in failures):
            perturb_missed += 1
    return derived_bad == 0 and perturb_missed == 0, f"{derived_bad} bad tables, {perturb_missed} missed perturbations"


def criterion_6() -> tuple[bool, str]:
    total, bad = 0, []
    for name, mg in sorted(LIBRARY.items()):
        for H in isotropic_subgroups(mg):
            total += 1
            metric = from_metric_group(condense(mg, H))
            modular = condense_grouplike(from_metric_group(mg), GroupLikeAlgebra(tuple(element_label(h) for h in H)))
            if label_bijection(modular, metric) is None:
                bad.append(f"{name} {H}")
    return not bad, f"{total - len(bad)}/{total} condensations agree"


def criterion_7() -> tuple[bool, str]:
    cases = [("toric-code", 0, 1), ("toric-code", 1, 4), ("toric-code", 2, 16), ("semion", 1, 2)]
    got = []
    ok = True
    for name, g, want in cases:
        r = evaluate(closed_surface(g, name))
        oracle = verlinde_genus_dim(modular_library()[name], g)
        ok &= r.gsd_unit == want == oracle
        got.append(f"{name} g={g}: {r.gsd_unit}")
    return ok, ", ".join(got)


def criterion_8(trials: int = 200, seed: int = 8) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        s = random_sphere(rng, rng.choice(sorted(FUSION_LIBRARY)), cells=rng.randint(2, 20))
        before = evaluate(s)
        t = apply_move(s, *rng.choice(applicable_moves(s)))
        if not check_anomaly_free(t).passed or evaluate(t) != before:
            bad += 1
    return bad == 0, f"{trials - bad}/{trials} moves invariant"


def criterion_9(run: Callable[[list[str]], tuple[int, str]]) -> tuple[bool, str]:
    """``run`` executes CLI argv and returns (exit code, stdout)."""
    import os
    import tempfile

    surfaces = [closed_surface(2, "toric-code"), random_sphere(random.Random(9), "trivial", 20)]
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for i, s in enumerate(surfaces):
            path = os.path.join(tmp, f"s{i}.surf")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(format_surface(s))
            for cmd in (["reduce", path, "--trace"], ["evaluate", path]):
                outs = {run(["--jobs", str(j)] + cmd) for j in (1, 1, 4)}
                ok &= len(outs) == 1
    return ok, "identical output across runs and job counts" if ok else "output differs"


TITLES = {
    1: "modular-extension groups",
    2: "group axioms",
    3: "center functoriality",
    4: "Morita criterion",
    5: "coherence derivation",
    6: "condensation consistency",
    7: "surface evaluation vs Verlinde",
    8: "move invariance",
    9: "determinism",
}


def run_all(run_cli: Callable[[list[str]], tuple[int, str]], jobs: int = 1) -> list[CriterionResult]:
    checks: dict[int, Callable[[], tuple[bool, str]]] = {
        1: lambda: criterion_1(jobs),
        2: lambda: criterion_2(jobs),
        3: criterion_3,
        4: criterion_4,
        5: criterion_5,
        6: criterion_6,
        7: criterion_7,
        8: criterion_8,
        9: lambda: criterion_9(run_cli),
    }
    out = []
    for n, fn in checks.items():
        t0 = time.perf_counter()
        ok, detail = fn()
        out.append(CriterionResult(n, TITLES[n], ok, detail, time.perf_counter() - t0))
    return out
