import math

import numpy as np
import pytest

from spin7 import analysis
from spin7.analysis import (
    KillingReport,
    all_passed,
    balanced_conformal_exponent,
    balanced_probe,
    classify,
    conformal_check,
    curvature_suite,
    gauduchon_identity_check,
    killing_check,
    lee_bound_check,
    scalar_identity_check,
    sl_identity_check,
    torsion_suite,
)
from spin7.clifford_spin import coeffs_matrix, fundamental_spinor
from spin7.geometry_fields import (
    ConformalField,
    ConstantScalarField,
    ScaledScalarField,
    SumScalarField,
    TrigScalarField,
    default_potential,
    fixture_conformal,
    fixture_flat,
    fixture_perturbed,
    frame_gradient,
    random_trig_terms,
    structure_jet,
)

FIXTURES = ("flat", "conformal", "perturbed")


def test_round_sig():
    assert analysis.round_sig(0.000123456) == 1.23e-4
    assert analysis.round_sig(0.0) == 0.0
    assert analysis.round_sig(-98765.0) == -9.88e4


def test_classify_examples(fields, points):
    assert classify(fields["flat"], points[:4]).label == "W0"
    rep = classify(fields["conformal"], points[:8])
    assert rep.label == "W2"
    assert rep.residuals["dtheta"] <= 1e-9
    assert rep.qualifier == "on the sample set"
    rep = classify(fields["perturbed"], points[:4])
    assert rep.label == "W"
    assert min(rep.residuals.values()) > 1e-4


def test_classification_monotone_in_tol(fields, points):
    order = {"W0": 0, "W1": 1, "W2": 1, "W": 2}
    labels = [classify(fields["conformal"], points[:4], tol).label for tol in (1.0, 1e-3, 1e-9, 1e-20)]
    ranks = [order[lab] for lab in labels]
    assert ranks == sorted(ranks)
    assert labels[0] == "W0" and labels[-1] == "W"


def test_class_labels_consistent(fields, points):
    for f in fields.values():
        rep = classify(f, points[:4])
        tol = rep.tol
        if rep.label == "W0":
            assert rep.residuals["dphi"] <= tol
        if rep.label == "W1":
            assert rep.residuals["theta"] <= tol
        if rep.label == "W2":
            assert rep.residuals["dphi_minus_theta_phi"] <= tol


def test_conformal_check_identity_change(fields, points):
    res = conformal_check(fields["perturbed"], ConstantScalarField(0.0), points[:3])
    assert all(r.max_residual == 0.0 for r in res)


@pytest.mark.parametrize("base", ["flat", "perturbed"])
def test_conformal_laws(base, fields, points):
    res = {r.name: r for r in conformal_check(fields[base], default_potential(seed=5), points[:8])}
    assert res["lee_form_conformal"].max_residual <= 1e-9
    assert res["torsion_conformal"].max_residual <= 1e-9
    # the weight exp(4f) does not reproduce the recomputed torsion
    assert res["torsion_conformal_weight4"].max_residual > 1e-6
    assert not res["torsion_conformal_weight4"].gating


def test_composed_rescaling(fields, points):
    f1, f2 = default_potential(seed=1), default_potential(seed=2)
    base = fields["perturbed"]
    twice = ConformalField(ConformalField(base, f1), f2)
    for x in points[:4]:
        sj, s2 = structure_jet(base, x), structure_jet(twice, x)
        expected = sj.frame_to_coords(sj.theta) + 4 * (f1.jet(x).grad + f2.jet(x).grad)
        assert np.allclose(s2.frame_to_coords(s2.theta), expected, atol=1e-12)
        once = structure_jet(ConformalField(base, SumScalarField((f1, f2))), x)
        assert once.T.allclose(s2.T, atol=1e-13)


@pytest.mark.parametrize("name", FIXTURES)
def test_scalar_formulas(name, jets):
    for sj in jets[name]:
        res = scalar_identity_check(sj)
        assert max(res.values()) <= 1e-6, res


def test_balanced_probe(fields, points):
    for x in points[1:4]:
        out = balanced_probe(fields["perturbed"], x)
        assert out["theta"] < 1e-12 and out["delta_theta"] < 1e-12
        assert out["lambda3_8_part"] < 1e-12
        assert out["residual"] <= 1e-6
        assert out["scal_residual"] <= 1e-6


@pytest.mark.parametrize("name", FIXTURES)
def test_spinor_identities(name, jets):
    for sj in jets[name]:
        res = sl_identity_check(sj)
        gating = {k: v for k, v in res.items() if k != "sl_first_literal"}
        assert max(gating.values()) <= 1e-6, gating


def test_first_identity_without_delta_t_term(jets):
    """Without the delta T term the first identity fails exactly by 2 deltaT.phi."""
    phi = fundamental_spinor()
    for sj in jets["conformal"]:
        assert sl_identity_check(sj)["sl_first_literal"] <= 1e-12
    worst = 0.0
    for sj in jets["perturbed"]:
        dt_phi = np.linalg.norm(coeffs_matrix(sj.deltaT.coeffs, 2) @ phi)
        lit = sl_identity_check(sj)["sl_first_literal"]
        assert math.isclose(lit, 2 * dt_phi, rel_tol=1e-8)
        worst = max(worst, lit)
    assert worst > 1e-3


@pytest.mark.parametrize("name", FIXTURES)
def test_gauduchon_identity(name, jets):
    for sj in jets[name]:
        assert gauduchon_identity_check(sj)["residual"] <= 1e-6


def test_gauduchon_literal_sign_fails(jets):
    worst = max(gauduchon_identity_check(sj)["literal"] for sj in jets["perturbed"])
    assert worst > 1e-3


def test_lee_bound(jets):
    assert lee_bound_check(jets["flat"][3]) == (0.0, 0.0, 0.0)
    for sj in jets["conformal"]:
        lhs, rhs, gap = lee_bound_check(sj)
        assert gap <= 1e-10
        assert math.isclose(lhs, rhs, rel_tol=1e-9)
    for sj in jets["perturbed"][1:]:
        lhs, rhs, gap = lee_bound_check(sj)
        assert gap > 1e-4
        assert math.isclose(lhs - rhs, gap, rel_tol=1e-9)


def _potential():
    return default_potential()


def test_killing_examples(points):
    f = _potential()
    conf = fixture_conformal(f)
    rep = killing_check(conf, ScaledScalarField(f, -7 / 3), points[:8])
    assert rep.accepted and max(rep.residuals.values()) <= 1e-6
    wrong = killing_check(conf, ScaledScalarField(f, 1.0), points[:4])
    assert not wrong.accepted and wrong.lee > 1e-4
    zero = killing_check(conf, ConstantScalarField(0.0), points[:4])
    assert not zero.accepted
    flat = killing_check(fixture_flat(), ConstantScalarField(1.5), points[:4])
    assert flat.accepted and max(flat.residuals.values()) == 0.0


def test_killing_spinor_equation_on_accepted_pair(points):
    f = _potential()
    conf = fixture_conformal(f)
    psi = ScaledScalarField(f, -7 / 3)
    phi = fundamental_spinor()
    for x in points[:4]:
        sj = structure_jet(conf, x)
        dpsi = frame_gradient(sj, psi.jet(x).grad)
        lhs = coeffs_matrix(dpsi.coeffs, 1) @ phi - 0.5 * coeffs_matrix(sj.T.coeffs, 3) @ phi
        assert np.linalg.norm(lhs) <= 1e-12


def test_killing_accepts_any_matching_lee_form(points):
    rng = np.random.default_rng(9)
    f = TrigScalarField(tuple(random_trig_terms(rng, 4)), 0.05)
    conf = fixture_conformal(f)
    assert killing_check(conf, ScaledScalarField(f, -7 / 3), points[:4]).accepted
    assert not killing_check(fixture_perturbed(), ConstantScalarField(0.0), points[:2]).accepted


def test_conformal_exponent():
    # theta = 4 df_gauge cancels theta = -12/7 dPsi when f_gauge = 3/7 Psi
    assert math.isclose(balanced_conformal_exponent(), -2 * 3 / 7)


def test_killing_report_json():
    rep = KillingReport(1e-9, 2e-9, 0.0, 5e-3, 1e-6)
    data = rep.to_json()
    assert data["accepted"] is False
    assert set(data["residuals"]) == {"spinor", "lee", "torsion", "scalar"}


def test_suites_pass(fields, points):
    for name in FIXTURES:
        results = curvature_suite(fields[name], points[:6]) + torsion_suite(fields[name], points[:6])
        assert all_passed(results), [r.name for r in results if r.gating and not r.passed]
    names = {r.name for r in curvature_suite(fields["perturbed"], points[:2])}
    assert {"sl_first", "sl_second", "laplacian", "scalar_pairing", "gauduchon"} <= names


def test_check_result_json():
    r = analysis.CheckResult("x", "a = b", [1e-3, 2.34567e-2], 1e-2, points=[[0.0], [1.0]])
    assert not r.passed
    data = r.to_json()
    assert data["max_residual"] == 2.35e-2 and data["location"] == [1.0]
    assert "per_point" in r.to_json(verbose=True)
