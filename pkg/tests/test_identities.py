import json
import math

import numpy as np
import pytest

from spheremin.catalog import CLIFFORD_TORUS, EQUATOR, GENERALIZED_VERONESE, VERONESE, build_calabi, sample_grid
from spheremin.errors import UsageError
from spheremin.identities import (
    CHECK_NAMES,
    REGISTRY,
    build_context,
    check_constants,
    collect_contexts,
    evaluate_check,
    gauge_robustness,
    resolve_tolerances,
    run_suite,
)
from conftest import MIXED_BOUNDS

# every identity the suite is meant to cover, in registry order
EXPECTED_REGISTRY = [
    "unit_sphere",
    "frame_orthonormality",
    "minimality",
    "gauss_equation",
    "curvature_window",
    "codazzi",
    "wintgen",
    "star_form",
    "canonical_form",
    "normal_tensor_reduction",
    "b_squared",
    "sbar",
    "simons_flat",
    "simons_general",
    "simons_canonical",
    "gradient_relations",
    "covariant_S_derivative",
    "second_derivative_relations",
    "ricci_e3",
    "ricci_general",
    "laplacian_h",
    "q_lower_bound",
    "chern_relations",
    "normal_tensor_derivative",
    "laplacian_routes",
]


def test_registry_is_complete_and_unique():
    assert list(CHECK_NAMES) == EXPECTED_REGISTRY
    assert len(set(CHECK_NAMES)) == len(CHECK_NAMES)
    assert all(c.reference for c in REGISTRY)
    assert {c.tier for c in REGISTRY} == {1, 2}


def test_veronese_tier1_all_pass():
    rep = run_suite(VERONESE, 10, 10, tier=1)
    assert rep.passed and rep.branch == "nowhere_flat"
    w = rep.check("wintgen")
    assert w.status == "pass" and w.max_residual <= 1e-8 and w.n_evaluated == 100
    assert rep.check("simons_flat").status == "skipped"


def test_equator_flat_simons_is_trivial():
    rep = run_suite(EQUATOR, 10, 10, tier=1)
    assert rep.passed and rep.branch == "flat"
    sf = rep.check("simons_flat")
    assert sf.status == "pass" and sf.max_residual <= 1e-9
    assert rep.summary["S"]["max"] <= 1e-9


def test_generalized_veronese_tier2_ricci_constant():
    rep = run_suite(GENERALIZED_VERONESE, 8, 8, tier=2)
    assert rep.passed
    assert rep.check("ricci_e3").max_residual <= 1e-5
    ctx = collect_contexts(GENERALIZED_VERONESE, sample_grid(GENERALIZED_VERONESE, 2, 2), 4)[0]
    chk = next(c for c in REGISTRY if c.name == "ricci_e3")
    res = evaluate_check(chk, ctx, 1e-5)
    assert res.rhs == pytest.approx(0.25 * math.sqrt(5 / 3), abs=1e-12)
    assert res.lhs == pytest.approx(res.rhs, abs=1e-10)


@pytest.mark.parametrize("spec", [CLIFFORD_TORUS, build_calabi(1), build_calabi(4)], ids=lambda s: s.name)
def test_other_surfaces_pass_tier2(spec):
    assert run_suite(spec, 4, 4, tier=2).passed


def test_check_constants_examples():
    c4 = {c.quantity: c for c in check_constants(build_calabi(4))}
    assert c4["K"].mean == pytest.approx(1 / 10, abs=1e-8) and c4["K"].passed
    assert c4["S"].mean == pytest.approx(9 / 5, abs=1e-8) and c4["KN"].mean == pytest.approx(9 / 10, abs=1e-8)
    c2 = {c.quantity: c for c in check_constants(build_calabi(2), 4, 4)}
    assert c2["K"].expected == pytest.approx(1 / 3) and c2["K"].passed
    c1 = {c.quantity: c for c in check_constants(build_calabi(1), 4, 4)}
    assert c1["K"].mean == pytest.approx(1.0) and c1["S"].max_deviation <= 1e-12 and c1["KN"].expected == 0.0
    ct = {c.quantity: c for c in check_constants(CLIFFORD_TORUS, 4, 4)}
    assert all(c.passed for c in ct.values()) and ct["KN"].expected == 0.0


def test_reports_are_deterministic():
    a = json.dumps(run_suite(VERONESE, 4, 5, tier=2).to_dict(), sort_keys=True)
    b = json.dumps(run_suite(VERONESE, 4, 5, tier=2).to_dict(), sort_keys=True)
    assert a == b


def test_loosening_tolerances_never_breaks_a_pass():
    tight = {name: 1e-15 for name in CHECK_NAMES}
    r1 = run_suite(GENERALIZED_VERONESE, 4, 4, tier=2, tolerances=tight)
    assert not r1.passed  # floating-point floor
    loose = {name: 1e-13 for name in CHECK_NAMES}
    r2 = run_suite(GENERALIZED_VERONESE, 4, 4, tier=2, tolerances=loose)
    r3 = run_suite(GENERALIZED_VERONESE, 4, 4, tier=2, tolerances={"all": 1.0})
    for a, b, c in zip(r1.checks, r2.checks, r3.checks):
        if a.status == "pass":
            assert b.status == "pass"
        if b.status == "pass":
            assert c.status == "pass"
    assert r3.passed


def test_failed_gauge_gets_distinct_status():
    rep = run_suite(VERONESE, 3, 3, tier=1, tolerances={"canonical_gate": 0.0})
    assert rep.check("b_squared").status == "gauge_failed"
    assert rep.check("b_squared").first_failure["status"] == "gauge_failed"
    assert rep.check("gauss_equation").status == "pass"
    assert not rep.passed


def test_mixed_surface_skips_branch_checks(mixed_spec):
    rep = run_suite(mixed_spec, 7, 7, tier=2, bounds=MIXED_BOUNDS)
    assert rep.branch == "mixed"
    for name in ("wintgen", "b_squared", "simons_flat", "simons_general", "ricci_e3", "q_lower_bound"):
        c = rep.check(name)
        assert c.status == "skipped" and "mixes" in c.skip_reason
    for name in ("codazzi", "ricci_general", "laplacian_h", "gauss_equation", "covariant_S_derivative"):
        assert rep.check(name).status == "pass", name
    assert rep.check("minimality").status == "fail"  # the patch is not minimal
    assert rep.check("minimality").first_failure is not None


def test_usage_errors():
    with pytest.raises(UsageError):
        run_suite(VERONESE, 3, 3, tier=3)
    with pytest.raises(UsageError):
        run_suite(VERONESE, 3, 3, tier=2, jet_order=3)
    with pytest.raises(UsageError):
        resolve_tolerances({"no_such_check": 1.0})
    ctx = build_context(VERONESE, (0, 0), 1.0, 1.0, 3)
    chk = next(c for c in REGISTRY if c.name == "ricci_general")
    with pytest.raises(UsageError):
        evaluate_check(chk, ctx, 1.0)


def test_tolerance_resolution():
    t = resolve_tolerances({"all": 0.5, "codazzi": 0.1})
    assert t["codazzi"] == 0.1 and t["wintgen"] == 0.5
    assert resolve_tolerances(None)["unit_sphere"] == 1e-10


def test_gauge_robustness_report():
    g = gauge_robustness(VERONESE, 3, 3, rotations=4, seed=5)
    assert g.passed and g.n_tested == 36
    assert g.to_dict() == gauge_robustness(VERONESE, 3, 3, rotations=4, seed=5).to_dict()
    assert gauge_robustness(CLIFFORD_TORUS, 3, 3, rotations=2).n_tested == 0


def test_wintgen_skipped_where_curvature_vanishes():
    rep = run_suite(CLIFFORD_TORUS, 4, 4)
    assert rep.check("wintgen").status == "skipped"
    assert np.isclose(rep.summary["K"]["max"], 0.0)
