import dataclasses

import numpy as np
import pytest

from bonnetlab import zoo
from bonnetlab.config import FUNDAMENTAL_TOLERANCE
from bonnetlab.deformations import (
    build_variation,
    fundamental_residuals,
    integrate_bending,
    trivial_fit,
    trivial_variation,
    verify_deformation,
    verify_superconformal,
)
from bonnetlab.exception import NotIsothermic
from bonnetlab.surface import sample_grid

FUNDAMENTAL = ('vf12', 'vfja', 'dfja', 'df1234')


def _failed(report):
    return [(check.name, check.value) for check in report.checks if not check.passed]


def _check(report, name):
    return next(check for check in report.checks if check.name == name)


def _bump(grid, amplitude=0.05):
    """Smooth bump in a fixed direction of R⁴, centered on the grid."""
    uu, vv = grid.mesh()
    u0, u1, v0, v1 = grid.domain
    width = 0.15 * min(u1 - u0, v1 - v0)
    profile = np.exp(-((uu - 0.5 * (u0 + u1)) ** 2 + (vv - 0.5 * (v0 + v1)) ** 2) / width ** 2)
    return amplitude * profile[..., None] * np.array([0.3, 0.0, 0.5, 1.0])


@pytest.fixture(scope='module')
def curves_bending():
    chart = zoo.make('product_curves')
    return chart, integrate_bending(chart, build_variation(chart, sample_grid(chart, 33), '-'))


@pytest.mark.parametrize('sign', ['-', '+'])
def test_variation_of_equal_curvatures(product_curves, sign):
    grid = sample_grid(product_curves, 33)
    forms = build_variation(product_curves, grid, sign)

    assert forms.normal_frame == 'isotropic'
    assert not forms.trivial
    assert set(forms.residuals) == set(FUNDAMENTAL)
    for name in FUNDAMENTAL:
        assert forms.residuals[name] < 1e-4, name
    assert forms.closure_residual < 1e-6
    assert np.all(forms.L > 0.0)
    assert forms.L[16, 16] == pytest.approx(1.0)
    np.testing.assert_allclose(forms.form(0, 1), 0.0)
    np.testing.assert_allclose(forms.form(2, 3), 0.0)


def test_bending_of_equal_curvatures(curves_bending):
    chart, bending = curves_bending

    assert bending.closure_residual < 1e-4
    assert bending.nontriviality_residual > 1e-2
    assert bending.bending_residual < 1e-4
    np.testing.assert_allclose(bending.T[16, 16], 0.0)
    np.testing.assert_allclose(bending.V, -np.swapaxes(bending.V, -1, -2), atol=1e-12)

    report = verify_deformation(chart, bending)
    assert report.passed, _failed(report)
    names = [check.name for check in report.checks]
    for name in ('metric_order', 'mean_curvature_order', 'preserved_hopf_order',
                 'other_hopf_order', 'nontrivial', 'bending') + FUNDAMENTAL:
        assert name in names
    assert 80.0 <= _check(report, 'metric_order').value <= 120.0
    assert 8.0 <= _check(report, 'other_hopf_order').value <= 12.0
    assert sorted(report.surfaces) == [1e-3, 1e-2]


@pytest.mark.parametrize('name', ['metric_order', 'mean_curvature_order',
                                  'preserved_hopf_order', 'bending'])
def test_bumped_field_is_not_a_bending(curves_bending, name):
    chart, bending = curves_bending
    bumped = dataclasses.replace(bending, T=bending.T + _bump(bending.forms.grid))

    report = verify_deformation(chart, bumped)

    assert not report.passed
    assert not _check(report, name).passed, _check(report, name)


def test_vanishing_field_is_not_a_deformation(curves_bending):
    chart, bending = curves_bending

    report = verify_deformation(chart, dataclasses.replace(bending, T=np.zeros_like(bending.T)))

    assert not report.passed
    assert not _check(report, 'nontrivial').passed
    assert _check(report, 'nontrivial').value == 0.0


def test_rigid_motion_leaves_the_other_hopf_part_in_place(curves_bending):
    chart, bending = curves_bending
    forms = bending.forms
    C = np.zeros((4, 4))
    C[0, 2], C[1, 3], C[0, 1] = 0.5, -1.0, 0.25
    C = C - C.T
    positions = forms.nodes(forms.lattice['f'])
    rigid = dataclasses.replace(bending, T=positions @ C.T + np.array([1.0, 0.0, 0.0, 2.0]),
                                V=np.broadcast_to(C, bending.V.shape).copy())

    report = verify_deformation(chart, rigid)

    other = _check(report, 'other_hopf_order')
    assert not other.passed
    assert other.value > 20.0
    assert not _check(report, 'nontrivial').passed
    assert _check(report, 'metric_order').passed


def test_broken_forms_violate_the_fundamental_system(curves_bending):
    _, bending = curves_bending
    forms = bending.forms
    grid = forms.grid
    uu, vv = grid.mesh()
    cof, omega, scale = (forms.nodes(forms.lattice[key]) for key in ('coframe', 'omega', 'scale'))
    broken = forms.phi * (1.0 + 0.2 * np.sin(3.0 * uu) * np.cos(2.0 * vv))[..., None, None, None]

    intact = fundamental_residuals(grid, cof, omega, forms.phi, scale)
    residuals = fundamental_residuals(grid, cof, omega, broken, scale)

    assert intact['dfja'] < FUNDAMENTAL_TOLERANCE
    assert residuals['dfja'] > FUNDAMENTAL_TOLERANCE
    assert residuals['vfja'] < FUNDAMENTAL_TOLERANCE


def test_unequal_curvatures_are_not_deformable(unequal_curves):
    with pytest.raises(NotIsothermic):
        build_variation(unequal_curves, sample_grid(unequal_curves, 17), '-')


def test_unknown_normal_frame(product_curves):
    with pytest.raises(ValueError):
        build_variation(product_curves, sample_grid(product_curves, 9), '-', normal_frame='x')


def test_trivial_family_bends_rigidly(product_curves):
    grid = sample_grid(product_curves, 33)
    forms = trivial_variation(product_curves, grid, u=1.0)

    assert forms.trivial
    assert max(forms.residuals.values()) < 1e-4
    bending = integrate_bending(product_curves, forms)
    assert bending.nontriviality_residual < 1e-4

    report = verify_deformation(product_curves, bending)
    assert report.passed, _failed(report)
    assert 'nontrivial' not in [check.name for check in report.checks]


def test_zero_trivial_family_does_not_move(product_curves):
    bending = integrate_bending(product_curves,
                                trivial_variation(product_curves, sample_grid(product_curves, 9),
                                                  u=0.0))

    np.testing.assert_allclose(bending.T, 0.0)
    assert bending.nontriviality_residual == 0.0
    with pytest.raises(ValueError):
        verify_deformation(product_curves, bending, (1e-2, 5e-3))


def test_trivial_fit_recovers_a_motion():
    rng = np.random.default_rng(7)
    points = rng.normal(size=(50, 4))
    C = np.zeros((4, 4))
    C[0, 2], C[1, 3] = 0.5, -1.5
    C = C - C.T
    v = np.array([1.0, 0.0, -2.0, 0.5])

    fitted, shift, misfit = trivial_fit(points, points @ C.T + v)

    np.testing.assert_allclose(fitted, C, atol=1e-10)
    np.testing.assert_allclose(shift, v, atol=1e-10)
    assert misfit < 1e-10


@pytest.fixture(scope='module')
def superconformal_bending():
    chart = zoo.make('inverted', {
        'base': 'holomorphic_curve',
        'base_params': {'domain': (-0.5, 0.5, -0.5, 0.5)},
        'center': (0.0, 0.0, 1.0, 0.0),
    })
    forms = build_variation(chart, sample_grid(chart, 33), '+', 'mean_curvature')
    return chart, integrate_bending(chart, forms)


def test_superconformal_deformation(superconformal):
    report = verify_superconformal(superconformal, sample_grid(superconformal, 33))

    assert report.kind == 'mean_curvature'
    assert report.sign == '+'
    assert report.samples[0].gauss_lift is not None
    assert report.samples[0].gauss_lift < 1e-3
    assert report.passed, _failed(report)


def test_gauss_lift_is_not_stationary_under_a_bumped_field(superconformal_bending):
    chart, bending = superconformal_bending
    bumped = dataclasses.replace(bending, T=bending.T + _bump(bending.forms.grid))

    report = verify_deformation(chart, bumped, superconformal=True)

    lift = _check(report, 'gauss_lift_variation')
    assert not lift.passed
    assert report.samples[0].gauss_lift == lift.value
