import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spin7 import spin7_algebra as algebra
from spin7.exterior_kernel import DIM, KForm
from spin7.geometry_fields import (
    CoframeJet,
    ConformalField,
    FiniteDifferenceField,
    SingularCoframe,
    TrigScalarField,
    TrigTerm,
    check_nabla_parallel,
    connection_ricci,
    coordinate_riemann_frame,
    dirac_identities,
    field_from_json,
    field_to_json,
    fixture_flat,
    fixture_perturbed,
    nabla_phi_direct,
    riemann_symmetry_residual,
    sample_points,
    scalar_from_json,
    scalar_to_json,
    sigma_t,
    sigma_t_brute,
    structure_jet,
    tensor_norm2,
)

FIXTURES = ("flat", "conformal", "perturbed")


def test_sample_points_are_seeded():
    a, b = sample_points(5, seed=3), sample_points(5, seed=3)
    assert np.array_equal(a, b)
    assert np.all(a[0] == 0.0)
    assert not np.array_equal(a, sample_points(5, seed=4))


def test_jet_shapes_and_symmetry(fields, points):
    for f in fields.values():
        jet = f.jet(points[3])
        assert jet.hessian_asymmetry() == 0.0
        assert jet.condition < 2.0
    with pytest.raises(ValueError):
        CoframeJet(np.eye(8), np.zeros((8, 8)), np.zeros((8,) * 4))


def test_second_jets_suffice():
    # the jet type carries value, first and second partials only
    assert [f.name for f in dataclasses.fields(CoframeJet)] == ["E", "dE", "d2E"]


def test_flat_fixture_is_trivial(jets):
    for sj in jets["flat"]:
        for form in (sj.dphi, sj.delta_phi, sj.theta, sj.T, sj.dT):
            assert form.norm() == 0.0
        assert np.all(sj.riemann == 0.0)
        assert sj.scal_g == 0.0


def test_conformal_lee_form_single_mode():
    eps = 0.01
    pot = TrigScalarField((TrigTerm(1.0, (0,), (1.0,)),), eps)
    sj = structure_jet(ConformalField(fixture_flat(), pot), np.zeros(DIM))
    expected = np.zeros(DIM)
    expected[0] = 4 * eps
    assert np.allclose(sj.theta.coeffs, expected, atol=1e-15)


def test_conformal_fixture_saturates_torsion_bound(jets):
    for sj in jets["conformal"]:
        assert math.isclose(sj.T_norm2, 7 / 6 * sj.theta_norm2, rel_tol=1e-10, abs_tol=1e-16)


def test_constant_potential_gives_no_torsion():
    pot = TrigScalarField((TrigTerm(1.0, (), (), phase=0.3),), 0.5)
    sj = structure_jet(ConformalField(fixture_flat(), pot), np.full(DIM, 0.2))
    assert sj.T.norm() == 0.0 and sj.theta.norm() == 0.0


def test_zero_epsilon_perturbation_is_flat(points):
    f = fixture_perturbed(epsilon=0.0)
    sj = structure_jet(f, points[5])
    assert sj.T.norm() == 0.0 and np.all(sj.riemann == 0.0)


def test_perturbed_fixture_is_generic(jets):
    for sj in jets["perturbed"][:8]:
        assert sj.theta.norm() > 1e-4
        assert algebra.project(sj.delta_phi, "3_48").norm() > 1e-4


def test_constant_shear_has_closed_phi():
    terms = [TrigTerm(1.0, (), (), math.pi / 2, (0, 1)), TrigTerm(-1.0, (), (), math.pi / 2, (1, 0))]
    sj = structure_jet(fixture_perturbed(terms, epsilon=0.1), np.full(DIM, 0.4))
    assert sj.dphi.norm() == 0.0


def test_singular_coframe_rejected():
    terms = [TrigTerm(-1.0, (), (), math.pi / 2, (i, i)) for i in range(DIM)]
    with pytest.raises(SingularCoframe):
        structure_jet(fixture_perturbed(terms, epsilon=1.0), np.zeros(DIM))


def test_perturbation_terms_need_entries():
    with pytest.raises(ValueError):
        fixture_perturbed([TrigTerm(1.0, (0,), (1.0,))])


@pytest.mark.parametrize("name", FIXTURES)
def test_riemann_matches_coordinate_route(name, jets):
    for sj in jets[name][:8]:
        oracle = coordinate_riemann_frame(sj.jet)
        assert np.abs(sj.riemann - oracle).max() <= 1e-10


@pytest.mark.parametrize("name", FIXTURES)
def test_riemann_symmetries(name, jets):
    for sj in jets[name]:
        assert max(riemann_symmetry_residual(sj.riemann).values()) <= 1e-7


@pytest.mark.parametrize("name", FIXTURES)
def test_closed_formula_for_nabla_phi(name, fields, jets, points):
    for x, sj in zip(points[:8], jets[name][:8]):
        direct = nabla_phi_direct(fields[name], x)
        assert np.abs(algebra.nabla_phi_tensor(sj.delta_phi) - direct).max() <= 1e-6
        X = np.arange(DIM) / 10.0
        assert np.allclose(nabla_phi_direct(fields[name], x, X), np.tensordot(X, direct, axes=1))


@pytest.mark.parametrize("name", FIXTURES)
def test_phi_is_parallel_for_torsion_connection(name, fields, jets, points):
    for x, sj in zip(points, jets[name]):
        res = check_nabla_parallel(fields[name], x, sj)
        assert max(res.values()) <= 1e-8, res


@pytest.mark.parametrize("name", FIXTURES)
def test_ricci_formulas(name, fields, jets, points):
    for x, sj in zip(points[:8], jets[name][:8]):
        res = connection_ricci(fields[name], x, sj)
        scale = max(np.abs(sj.ricci_g).max(), 1e-12)
        assert res["ric_residual"] / scale <= 1e-5
        assert res["ric_g_residual"] / scale <= 1e-5
        assert res["c5_residual"] / scale <= 1e-5
        # Ric is symmetric exactly when delta T vanishes
        assert (res["ric_asymmetry"] <= 1e-10) == (res["delta_T"] <= 1e-10)


def test_scalar_shift(jets):
    for name in FIXTURES:
        for sj in jets[name]:
            assert math.isclose(sj.scal_g, sj.scal_torsion + 0.25 * sj.T_norm2,
                                rel_tol=1e-9, abs_tol=1e-14)


@pytest.mark.parametrize("name", FIXTURES)
def test_dirac_identities(name, fields, jets, points):
    for x, sj in zip(points, jets[name]):
        res = dirac_identities(fields[name], x, sj)
        assert res["nabla"] <= 1e-8 and res["dirac"] <= 1e-8


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 56, elements=st.floats(-3, 3, allow_nan=False)))
def test_sigma_matches_brute_force(c):
    T = KForm(3, c)
    assert sigma_t(T).allclose(sigma_t_brute(T), atol=1e-9)


def test_tensor_norm_is_factorial_multiple():
    T = KForm.monomial(0, 1, 2)
    assert tensor_norm2(T) == 6.0


def test_finite_difference_fallback(points):
    f = fixture_perturbed()

    def coframe(x):
        return f.jet(x).E

    fd = FiniteDifferenceField(coframe, step=1e-4)
    x = points[2]
    a, b = f.jet(x), fd.jet(x)
    assert np.abs(a.dE - b.dE).max() < 1e-8
    assert np.abs(a.d2E - b.d2E).max() < 1e-5
    sa, sb = structure_jet(f, x), structure_jet(fd, x)
    assert abs(sa.scal_g - sb.scal_g) < 1e-4
    assert sa.T.allclose(sb.T, atol=1e-8)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_json_round_trip(name, fields, points):
    data = json.loads(json.dumps(field_to_json(fields[name])))
    again = field_from_json(data)
    x = points[1]
    a, b = fields[name].jet(x), again.jet(x)
    assert np.array_equal(a.E, b.E) and np.array_equal(a.d2E, b.d2E)


def test_fixture_json_errors():
    with pytest.raises(ValueError):
        field_from_json({"kind": "torus"})
    with pytest.raises(ValueError):
        field_from_json({"kind": "conformal", "terms": [{"axes": [0], "amplitude": 1.0}]})
    with pytest.raises(ValueError):
        field_from_json({"kind": "conformal", "terms": [{"axes": [9], "amplitude": 1.0,
                                                         "frequency": [1.0]}]})
    with pytest.raises(ValueError):
        field_from_json([1, 2])


def test_scalar_json_round_trip():
    s = scalar_from_json({"kind": "constant", "value": 2.5})
    assert s.jet(np.zeros(DIM)).value == 2.5
    t = scalar_from_json({"epsilon": 0.1, "terms": [{"axes": [1], "amplitude": 2.0,
                                                     "frequency": [0.5]}]})
    assert scalar_from_json(scalar_to_json(t)) == t
    with pytest.raises(ValueError):
        scalar_from_json({"kind": "spline"})


def test_metric_is_positive_definite(jets):
    for sj in jets["perturbed"]:
        g = sj.metric
        assert np.allclose(g, g.T) and np.linalg.eigvalsh(g).min() > 0
