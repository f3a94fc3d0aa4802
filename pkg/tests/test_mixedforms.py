import numpy as np
import pytest

from bonnetlab import zoo
from bonnetlab.exception import EmptyMask, LoopThroughSingularity, NotCompactChart
from bonnetlab.invariants import principal_rule
from bonnetlab.mixedforms import (
    GLOBAL_CHECKS,
    analytic_data,
    conformal_metric_curvature,
    costar_derivative,
    exterior_derivative,
    factorization,
    find_singular_points,
    global_checks,
    index,
    isothermicity_classify,
    mixed_form_field,
    mixed_form_values,
    ricci_like_terms,
    structure_defect,
)
from bonnetlab.surface import connection_sample, sample_grid


def _coordinates(values):
    return np.einsum('...wj,...j->...w', values['coframe'], values['omega'])


def _curvature_condition(k1, k2, dk1, dk2):
    """k₁k₂'' − k₁''k₂ + 2k₁k₂(k₁'² − k₂'²)/(k₁² + k₂²) for linear curvatures."""
    return 2.0 * k1 * k2 * (dk1 ** 2 - dk2 ** 2) / (k1 ** 2 + k2 ** 2)


def test_ellipsoid_mixed_forms_equal_twice_the_principal_connection(ellipsoid):
    u, v = np.meshgrid([0.5, 1.0, 2.0], [0.6, 1.2, 2.0], indexing='ij')
    minus = _coordinates(mixed_form_values(ellipsoid, u, v, '-'))
    plus = _coordinates(mixed_form_values(ellipsoid, u, v, '+'))
    conn = connection_sample(ellipsoid, u, v, principal_rule)
    principal = 2.0 * np.einsum('...wj,...j->...w', conn.coframe, conn.omega12)

    np.testing.assert_allclose(plus, minus, atol=1e-6)
    np.testing.assert_allclose(minus, principal, atol=1e-6)


def test_flat_torus_has_vanishing_mixed_forms(torus):
    field = mixed_form_field(torus, sample_grid(torus, 16), '-')

    assert field.mask.all()
    assert field.singular_points == ()
    np.testing.assert_allclose(field.omega, 0.0, atol=1e-8)
    np.testing.assert_allclose(exterior_derivative(field), 0.0, atol=1e-8)


@pytest.mark.parametrize('name,sign', [
    ('torus', '-'), ('torus', '+'), ('product_curves', '-'), ('unequal_curves', '+'),
    ('holomorphic', '-'), ('ellipsoid', '-'), ('ellipsoid', '+'),
])
def test_structure_equation(name, sign, request):
    chart = request.getfixturevalue(name)
    u0, u1, v0, v1 = chart.domain
    u, v = np.meshgrid(np.linspace(u0, u1, 5)[1:-1] + 0.01, np.linspace(v0, v1, 5)[1:-1] + 0.01,
                       indexing='ij')
    defect, scale = structure_defect(chart, u, v, sign)

    assert np.max(np.abs(defect) / scale ** 2) < 1e-4


def test_superconformal_sign_has_an_empty_mask(holomorphic):
    with pytest.raises(EmptyMask):
        mixed_form_field(holomorphic, sample_grid(holomorphic, 8), '+')


def test_ellipsoid_umbilics_and_indices(ellipsoid):
    points = find_singular_points(ellipsoid, sample_grid(ellipsoid, 32), '-')

    assert len(points) == 4
    results = [index(ellipsoid, point, '-') for point in points]
    for result in results:
        assert result.rounded == 1
        assert result.vanishing_order_estimate == pytest.approx(1.0, abs=0.2)
    assert sum(result.extrapolated for result in results) == pytest.approx(4.0, abs=0.05)


def test_loop_through_an_umbilic(ellipsoid):
    u, v = ellipsoid.singular_seeds[0]

    with pytest.raises(LoopThroughSingularity):
        index(ellipsoid, (u - 0.1, v), '-', radii=(0.1,))


@pytest.mark.parametrize('sign', ['-', '+'])
def test_torus_integral_identities(torus, sign):
    report = global_checks(torus, sample_grid(torus, 32), sign, include=GLOBAL_CHECKS)

    assert report.passed
    assert report.indices == ()
    assert {check.name for check in report.checks} == set(GLOBAL_CHECKS)


def test_gauss_bonnet_on_closed_surfaces(sphere, ellipsoid):
    for chart in (sphere, ellipsoid):
        report = global_checks(chart, sample_grid(chart, 64), '-',
                               include=('gauss_bonnet', 'normal_euler', 'index_theorem'))
        assert report.passed, [check for check in report.checks if not check.passed]
        assert report.checks[0].target == pytest.approx(4.0 * np.pi)


def test_index_sum_is_skipped_on_the_sphere(sphere):
    report = global_checks(sphere, sample_grid(sphere, 16), '-', include=('index_sum',))

    assert report.checks == ()
    assert report.extras['index_sum_skipped'] == 1.0


def test_closed_surface_checks_need_a_compact_chart(product_curves):
    with pytest.raises(NotCompactChart):
        global_checks(product_curves, sample_grid(product_curves, 8), '-',
                      include=('gauss_bonnet',))
    with pytest.raises(ValueError):
        global_checks(product_curves, sample_grid(product_curves, 8), '-', include=('euler',))


def test_unequal_curvatures_are_totally_non_isothermic(unequal_curves):
    grid = sample_grid(unequal_curves, 65)
    classes = isothermicity_classify(unequal_curves, grid, cross_check=False)

    assert classes.strongly_totally_non
    assert classes.mask_minus.all() and classes.mask_plus.all()
    assert classes.costar_plus[32, 32] * 5.0 == pytest.approx(-2.4, rel=1e-3)
    assert classes.costar_minus[32, 32] * 5.0 == pytest.approx(2.4, rel=1e-3)

    k1, k2 = grid.mesh()
    k2 = 2.0 * k2
    expected = _curvature_condition(k1, k2, 1.0, 2.0) / (k1 ** 2 + k2 ** 2)
    np.testing.assert_allclose(classes.costar_plus, expected, rtol=1e-3)
    np.testing.assert_allclose(classes.costar_minus, -expected, rtol=1e-3)
    assert (classes.labels() == 'non').all()


def test_equal_curvatures_are_strongly_isothermic(product_curves):
    grid = sample_grid(product_curves, 65)
    classes = isothermicity_classify(product_curves, grid, cross_check=False)

    assert classes.strong
    assert (classes.labels() == 'strong').all()
    for costar in (classes.costar_minus, classes.costar_plus):
        assert np.max(np.abs(costar[2:-2, 2:-2])) < 1e-5


def test_costar_derivative_agrees_with_the_hopf_connection(unequal_curves):
    classes = isothermicity_classify(unequal_curves, sample_grid(unequal_curves, 33))

    assert set(classes.cross_check) == {'costar_minus', 'costar_plus'}
    assert max(classes.cross_check.values()) < 1e-3


def test_costar_derivative_of_a_given_form(product_curves):
    field = mixed_form_field(product_curves, sample_grid(product_curves, 17), '-')
    constant = np.zeros_like(field.omega)
    constant[..., 0] = 1.0

    np.testing.assert_allclose(costar_derivative(field, constant), field.omega12[..., 1],
                               atol=1e-12)


def test_classification_is_conformally_invariant(unequal_curves):
    grid = sample_grid(unequal_curves, 33)
    base = isothermicity_classify(unequal_curves, grid, cross_check=False)
    image = isothermicity_classify(zoo.inverted(unequal_curves), grid, cross_check=False)

    assert (image.labels() == base.labels()).all()


def test_equal_curvatures_are_involutive_for_the_minus_sign(product_curves):
    data = analytic_data(product_curves, sample_grid(product_curves, 9), '-')

    assert data.mask.all()
    assert data.involutivity < 1e-5


def test_ricci_like_identity(product_curves, unequal_curves):
    u, v = np.meshgrid([0.7, 1.0, 1.3], [0.8, 1.2], indexing='ij')
    lhs, rhs, scale = ricci_like_terms(product_curves, u, v, '-')

    assert np.max(np.abs(lhs - rhs) / scale ** 2) < 1e-4
    assert np.max(np.abs(rhs)) < 1e-4

    lhs, rhs, scale = ricci_like_terms(unequal_curves, u, v, '+')
    assert np.max(np.abs(lhs - rhs) / scale ** 2) < 1e-4


def test_local_checks_on_an_open_patch(product_curves):
    report = global_checks(product_curves, sample_grid(product_curves, 8), '-',
                           include=('structure_equation', 'ricci_like'))

    assert report.passed
    assert report.extras['ricci_rhs_max'] < 1e-4


def test_factorization_exists_only_for_coclosed_forms(product_curves, unequal_curves):
    good = factorization(product_curves, sample_grid(product_curves, 33), '-')
    assert good.closure_residual < 1e-6
    assert good.holomorphy_residual < 1e-3
    assert np.all(good.D > 0.0)

    bad = factorization(unequal_curves, sample_grid(unequal_curves, 33), '-')
    assert bad.closure_residual > 1e-2


def test_vertically_harmonic_lift_has_no_conformal_metric(product_curves):
    result = conformal_metric_curvature(product_curves, sample_grid(product_curves, 9), '-')

    assert not result.defined
