import math

import numpy as np
import pytest

from bonnetlab.dataobjects.invariants import PointTag
from bonnetlab.exception import NonIsothermalChart, UndefinedDirections
from bonnetlab.invariants import (
    classify_point,
    curvature_line_directions,
    hopf_derivative_residuals,
    hopf_rotation,
    point_invariants,
    principal_angles,
    rotate_tangent_frame,
    second_fundamental,
    trace_lines,
)
from bonnetlab.surface import adapted_frame, eval_jet, sample_grid, tangent_coefficients
from bonnetlab.utils import wrap_angle

IDENTITY_CHARTS = ['torus', 'holomorphic', 'sphere', 'ellipsoid']


@pytest.mark.parametrize('name', IDENTITY_CHARTS)
def test_ellipse_identities(name, request):
    chart = request.getfixturevalue(name)
    inv = point_invariants(chart, *sample_grid(chart, 32).mesh(), hopf=False)
    excess = inv.normH2 - (inv.K - inv.ambient_c)

    np.testing.assert_allclose(inv.lambda1 ** 2 + inv.lambda2 ** 2, excess, atol=1e-9)
    np.testing.assert_allclose(2.0 * inv.lambda1 * inv.lambda2, np.abs(inv.K_N), atol=1e-9)
    np.testing.assert_allclose(inv.B_plus ** 2, excess - inv.K_N, atol=1e-9)
    np.testing.assert_allclose(inv.B_minus ** 2, excess + inv.K_N, atol=1e-9)
    assert np.all(excess >= np.abs(inv.K_N) - 1e-9)
    assert np.all(inv.lambda1 >= inv.lambda2)


def test_second_fundamental_form_of_the_holomorphic_curve(holomorphic):
    data = second_fundamental(holomorphic, 0.0, 0.0)

    np.testing.assert_allclose(data.alpha11, [2.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(data.alpha22, [-2.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(data.alpha12, [0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(data.H, [0.0, 0.0], atol=1e-12)


def test_plane_has_no_second_fundamental_form(plane):
    data = second_fundamental(plane, *sample_grid(plane, 16).mesh())

    assert not np.any(data.alpha11) and not np.any(data.alpha12) and not np.any(data.alpha22)


def test_torus_invariants(torus):
    inv = point_invariants(torus, *sample_grid(torus, 16).mesh())

    np.testing.assert_allclose(inv.K, 0.0, atol=1e-12)
    np.testing.assert_allclose(inv.K_N, 0.0, atol=1e-12)
    np.testing.assert_allclose(inv.normH2, 1.25, atol=1e-12)
    np.testing.assert_allclose(inv.B_minus ** 2, 1.25, atol=1e-12)
    np.testing.assert_allclose(inv.B_plus ** 2, 1.25, atol=1e-12)
    np.testing.assert_allclose(inv.lambda1, math.sqrt(5.0) / 2.0, atol=1e-12)
    np.testing.assert_allclose(inv.lambda2, 0.0, atol=1e-12)


def test_holomorphic_curve_invariants_at_the_origin(holomorphic):
    inv = point_invariants(holomorphic, 0.0, 0.0)

    assert float(inv.K) == pytest.approx(-8.0)
    assert float(inv.K_N) == pytest.approx(8.0)
    assert float(inv.normH2) == pytest.approx(0.0, abs=1e-12)
    assert float(inv.B_plus) == pytest.approx(0.0, abs=1e-12)
    assert float(inv.B_minus) == pytest.approx(4.0)


def test_sphere_is_totally_umbilic(sphere):
    inv = point_invariants(sphere, *sample_grid(sphere, 16).mesh())

    np.testing.assert_allclose(inv.K, 1.0, atol=1e-12)
    np.testing.assert_allclose(inv.K_N, 0.0, atol=1e-12)
    np.testing.assert_allclose(inv.normH2, 1.0, atol=1e-12)
    np.testing.assert_allclose(inv.B_plus, 0.0, atol=1e-7)
    np.testing.assert_allclose(inv.B_minus, 0.0, atol=1e-7)


def test_classification_tags(sphere, holomorphic, torus):
    sphere_class = classify_point(point_invariants(sphere, 0.4, 1.0, hopf=False))
    assert sphere_class.tag == PointTag.UMBILIC.value
    assert sphere_class.pseudo_umbilic_plus and sphere_class.pseudo_umbilic_minus

    curve_class = classify_point(point_invariants(holomorphic, 0.3, -0.2, hopf=False))
    assert curve_class.tag == PointTag.PSEUDO_UMBILIC_PLUS.value
    assert curve_class.minimal and not curve_class.umbilic
    assert not curve_class.pseudo_umbilic_minus

    torus_class = classify_point(point_invariants(torus, 1.0, 2.0, hopf=False))
    assert torus_class.tag == PointTag.GENERIC.value
    assert torus_class.margins['threshold'] > 0.0


def test_holomorphic_curve_has_vanishing_plus_hopf_part(holomorphic):
    inv = point_invariants(holomorphic, *sample_grid(holomorphic, 16).mesh(), hopf=True)

    assert np.max(np.abs(inv.phi_plus)) < 1e-9
    assert np.min(np.linalg.norm(inv.phi_minus, axis=-1)) > 0.1


def test_hopf_parts_need_an_isothermal_chart(ellipsoid):
    with pytest.raises(NonIsothermalChart):
        point_invariants(ellipsoid, 1.0, 1.0, hopf=True)


def test_tangent_rotation_changes_only_the_hopf_phase(holomorphic):
    u, v = np.meshgrid(np.linspace(-0.6, 0.6, 4), np.linspace(-0.6, 0.6, 4), indexing='ij')
    frame = adapted_frame(holomorphic, u, v)
    base = point_invariants(holomorphic, u, v, frame, hopf=True)
    tau = 0.7
    rotated = point_invariants(holomorphic, u, v, rotate_tangent_frame(frame, tau), hopf=True)

    for name in ('K', 'K_N', 'normH2', 'B_minus', 'B_plus', 'lambda1', 'lambda2'):
        np.testing.assert_allclose(getattr(rotated, name), getattr(base, name), atol=1e-12)
    phi_minus, phi_plus = hopf_rotation(base, tau)
    np.testing.assert_allclose(rotated.phi_minus, phi_minus, atol=1e-12)
    np.testing.assert_allclose(rotated.phi_plus, phi_plus, atol=1e-12)


def test_torus_principal_directions_follow_the_coordinates(torus):
    directions = curvature_line_directions(torus, 1.0, 2.0)

    np.testing.assert_allclose(np.sort(directions.principal),
                               [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi], atol=1e-12)
    np.testing.assert_allclose(np.sort(directions.mean_directional),
                               [0.25 * math.pi, 0.75 * math.pi], atol=1e-12)


def test_principal_directions_are_undefined_on_the_sphere(sphere):
    with pytest.raises(UndefinedDirections):
        curvature_line_directions(sphere, 0.3, 1.0)

    angles = principal_angles(point_invariants(sphere, 0.3, 1.0, hopf=False))
    assert np.all(np.isnan(angles))


def test_ellipsoid_principal_directions_match_the_shape_operator(ellipsoid):
    u, v = np.meshgrid([0.5, 1.0, 2.0], [0.6, 1.2, 2.0], indexing='ij')
    jet = eval_jet(ellipsoid, u, v)
    normal = np.cross(jet.fu[..., :3], jet.fv[..., :3])
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    hess = np.sum(jet.second()[..., :3] * normal[..., None, None, :], axis=-1)
    frame = adapted_frame(ellipsoid, u, v)
    c = tangent_coefficients(jet, frame.e1, frame.e2)
    shape = np.einsum('...jw,...wx,...kx->...jk', c, hess, c)
    expected = 0.5 * np.arctan2(2.0 * shape[..., 0, 1], shape[..., 0, 0] - shape[..., 1, 1])

    theta = curvature_line_directions(ellipsoid, u, v).principal[..., 0]
    mismatch = wrap_angle(4.0 * (theta - expected)) / 4.0
    assert np.max(np.abs(mismatch)) < 1e-6


def test_minimal_surface_hopf_parts_are_holomorphic(holomorphic):
    u, v = np.meshgrid([-0.4, 0.1, 0.5], [-0.3, 0.2], indexing='ij')
    residuals = hopf_derivative_residuals(holomorphic, u, v)

    for name in ('codazzi_minus', 'codazzi_plus', 'holomorphy_minus', 'holomorphy_plus'):
        assert np.max(residuals[name]) < 1e-5, name


def test_torus_curvature_lines_are_coordinate_lines(torus):
    grid = sample_grid(torus, 16)
    seeds = np.array([[0.5, 1.0], [2.0, 4.0]])
    lines = trace_lines(torus, grid, 'principal', seeds, max_steps=20)

    assert len(lines) == 4
    for line in lines[:2]:
        assert np.ptp(line[:, 1]) < 1e-9
        assert np.ptp(line[:, 0]) > 0.1
    for line in lines[2:]:
        assert np.ptp(line[:, 0]) < 1e-9
        assert np.ptp(line[:, 1]) > 0.1


def test_curvature_lines_stop_at_the_boundary(product_curves):
    grid = sample_grid(product_curves, 16)
    lines = trace_lines(product_curves, grid, 'principal', np.array([[1.0, 1.0]]))

    for line in lines:
        assert np.all(line[:, 0] >= grid.u[0]) and np.all(line[:, 0] <= grid.u[-1])
        assert np.all(line[:, 1] >= grid.v[0]) and np.all(line[:, 1] <= grid.v[-1])


def test_unknown_line_family(torus):
    with pytest.raises(ValueError):
        trace_lines(torus, sample_grid(torus, 16), 'asymptotic')
