import math

import numpy as np
import pytest

from bonnetlab.dataobjects.surface import SurfaceChart
from bonnetlab.exception import DegenerateImmersion, OutOfDomain
from bonnetlab.surface import (
    adapted_frame,
    connection_sample,
    eval_jet,
    metric,
    reduce_point,
    sample_grid,
)


def test_full_domain_grid_keeps_periodicity(torus):
    grid = sample_grid(torus, 16)

    assert grid.periodic_u and grid.periodic_v
    assert grid.shape == (16, 16)
    assert grid.u[0] == 0.0
    assert grid.du == pytest.approx(2.0 * math.pi * 0.5 / 16)
    assert grid.u[-1] < torus.domain[1]


def test_subdomain_grid_is_open(torus):
    grid = sample_grid(torus, 16, 8, domain=(0.0, 1.0, 0.0, 2.0))

    assert not grid.periodic_u and not grid.periodic_v
    assert grid.shape == (16, 8)
    assert grid.u[0] == 0.0 and grid.u[-1] == 1.0
    assert grid.v[-1] == 2.0


def test_pole_charts_sample_cell_midpoints(sphere):
    grid = sample_grid(sphere, 16)

    assert grid.periodic_u and not grid.periodic_v
    assert grid.centered_v
    assert grid.v[0] == pytest.approx(math.pi / 32)
    assert grid.v[-1] == pytest.approx(math.pi - math.pi / 32)


def test_refined_grid_contains_the_grid_nodes(plane, torus):
    open_grid = sample_grid(plane, 16)
    lattice = open_grid.refined(4)
    assert lattice.shape == (61, 61)
    np.testing.assert_allclose(lattice.u[::4], open_grid.u, atol=1e-14)

    periodic = sample_grid(torus, 16).refined(4)
    assert periodic.shape == (64, 64)
    assert periodic.periodic_u and periodic.periodic_v


def test_plane_jet(plane):
    jet = eval_jet(plane, 0.3, -0.2)

    np.testing.assert_allclose(jet.f, [0.3, -0.2, 0.0, 0.0])
    np.testing.assert_allclose(jet.fu, [1.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(jet.fv, [0.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(metric(jet), np.eye(2))
    assert not np.any(jet.fuv)


def test_points_beyond_the_margin_are_rejected(plane):
    eval_jet(plane, 1.01, 0.0)
    with pytest.raises(OutOfDomain):
        eval_jet(plane, 2.0, 0.0)
    with pytest.raises(OutOfDomain):
        eval_jet(plane, np.array([0.0, 0.5]), np.array([0.0, -1.5]))


def test_periodic_coordinates_wrap(torus):
    u0, u1, v0, v1 = torus.domain
    u, v = reduce_point(torus, u1 + 0.25, v0 - 0.5)

    assert float(u) == pytest.approx(u0 + 0.25)
    assert float(v) == pytest.approx(v1 - 0.5)
    np.testing.assert_allclose(eval_jet(torus, u1 + 0.25, 0.3).f, eval_jet(torus, 0.25, 0.3).f,
                               atol=1e-12)


def test_dependent_partials_raise():
    chart = SurfaceChart(name='line', domain=(-1.0, 1.0, -1.0, 1.0),
                         value_source=lambda u, v: np.stack([u, u, 0 * u, 0 * v], axis=-1))

    with pytest.raises(DegenerateImmersion):
        eval_jet(chart, 0.1, 0.2)


def test_finite_difference_jet_matches_the_analytic_one(holomorphic, value_only):
    u, v = np.meshgrid(np.linspace(-0.8, 0.8, 5), np.linspace(-0.8, 0.8, 5), indexing='ij')
    exact = eval_jet(holomorphic, u, v)
    approx = eval_jet(value_only, u, v)

    for name in ('f', 'fu', 'fv'):
        np.testing.assert_allclose(getattr(approx, name), getattr(exact, name), atol=1e-8)
    for name in ('fuu', 'fuv', 'fvv'):
        np.testing.assert_allclose(getattr(approx, name), getattr(exact, name), atol=1e-6)
    for name in ('fuuu', 'fuuv', 'fuvv', 'fvvv'):
        np.testing.assert_allclose(getattr(approx, name), getattr(exact, name), atol=1e-3)


@pytest.mark.parametrize('name', ['holomorphic', 'torus', 'ellipsoid'])
def test_adapted_frame_is_oriented_and_orthonormal(name, request):
    chart = request.getfixturevalue(name)
    grid = sample_grid(chart, 16)
    frame = adapted_frame(chart, *grid.mesh())

    assert frame.orthonormality_defect() < 1e-12
    np.testing.assert_allclose(frame.orientation(), 1.0, atol=1e-12)
    np.testing.assert_allclose(frame.e1, eval_jet(chart, *grid.mesh()).fu
                               / np.linalg.norm(eval_jet(chart, *grid.mesh()).fu, axis=-1,
                                                keepdims=True), atol=1e-14)


def test_torus_connection_forms(torus):
    u, v = np.meshgrid(np.linspace(0.1, 3.0, 4), np.linspace(0.2, 6.0, 4), indexing='ij')
    conn = connection_sample(torus, u, v)

    np.testing.assert_allclose(conn.omega12, 0.0, atol=1e-8)
    assert conn.antisymmetry_defect() < 1e-8
    assert conn.symmetry_defect() < 1e-8
    np.testing.assert_allclose(np.abs(np.linalg.det(conn.coframe)), 1.0, atol=1e-12)


def test_isothermal_connection_matches_conformal_factor(holomorphic):
    u, v = np.meshgrid(np.linspace(-0.7, 0.7, 4), np.linspace(-0.7, 0.7, 4), indexing='ij')
    conn = connection_sample(holomorphic, u, v)

    assert conn.omega12_residual is not None
    assert np.max(conn.omega12_residual) < 1e-6
