import math
import time

import numpy as np
import pytest

from bonnetlab.bonnet import (
    compare_mate,
    congruence_test,
    distortion,
    family_signs,
    mate_data,
    moduli_sample,
    reconstruct,
    solve_theta,
)
from bonnetlab.dataobjects.bonnet import ReconstructedSurface
from bonnetlab.exception import NonIsothermalChart
from bonnetlab.surface import eval_jet, sample_grid
from bonnetlab.utils import orthogonal_fit

TORUS_THETAS = tuple(2.0 * math.pi * k / 8.0 for k in range(8))


def test_family_selectors():
    assert family_signs('both') == ('-', '+')
    assert family_signs('+') == ('+',)
    with pytest.raises(ValueError):
        family_signs('x')


def test_theta_needs_one_start_per_sign(product_curves):
    with pytest.raises(ValueError):
        solve_theta(product_curves, sample_grid(product_curves, 9), 'both', 0.5)


def test_theta_needs_an_isothermal_chart(ellipsoid):
    with pytest.raises(NonIsothermalChart):
        solve_theta(ellipsoid, sample_grid(ellipsoid, 8), '-', 1.0)


def test_torus_mates(torus):
    grid = sample_grid(torus, 64)
    start = time.perf_counter()
    report = moduli_sample(torus, grid, 'both', TORUS_THETAS)
    elapsed = time.perf_counter() - start

    assert elapsed < 30.0
    assert not report.collapsed
    assert len(report.samples) == 64
    for sample in report.samples:
        assert sample.metric_error < 1e-4, sample.theta0
        assert sample.mean_curvature_error < 1e-4, sample.theta0
        assert sample.normal_curvature_error < 1e-4, sample.theta0
        assert sample.ellipse_error < 1e-4, sample.theta0
        assert sample.distortion_holomorphy < 1e-4, sample.theta0
        assert max(sample.gauss_residual, sample.ricci_residual) < 1e-5
    assert report.pairwise_noncongruent.shape == (64, 64)
    assert report.all_noncongruent

    identity = report.samples[0]
    assert identity.theta0 == {'-': 0.0, '+': 0.0}
    assert identity.congruence.congruent
    assert identity.congruence.residual < 1e-5
    assert all(not sample.congruence.congruent for sample in report.samples[1:])


def test_torus_mate_distortion_has_the_closed_form(torus):
    grid = sample_grid(torus, 64)
    theta = solve_theta(torus, grid, 'both', (0.5 * math.pi, math.pi))
    mate = reconstruct(mate_data(torus, theta))
    q = distortion(torus, mate)

    np.testing.assert_allclose(theta.theta['-'], 0.5 * math.pi, atol=1e-8)
    np.testing.assert_allclose(theta.theta['+'], math.pi, atol=1e-8)
    assert q.sup_norm > 1e-3
    assert q.closed_form_deviation < 1e-3
    assert q.holomorphy_residual < 1e-4
    sample = compare_mate(torus, mate)
    assert sample.ellipse_error < 1e-4
    assert sample.distortion_holomorphy == q.holomorphy_residual


def test_minus_family_of_equal_curvatures(product_curves):
    grid = sample_grid(product_curves, 33)
    thetas = (0.25 * math.pi, 0.75 * math.pi, 1.25 * math.pi, 1.75 * math.pi)
    report = moduli_sample(product_curves, grid, '-', thetas)

    assert not report.collapsed
    assert len(report.samples) == 4
    for sample in report.samples:
        assert sample.metric_error < 1e-4
        assert sample.mean_curvature_error < 1e-4
        assert sample.normal_curvature_error < 1e-4
        assert sample.ellipse_error < 1e-4
        assert sample.distortion_holomorphy < 1e-4
        assert not sample.congruence.congruent
    assert report.all_noncongruent


def test_family_matches_single_reconstructions(product_curves):
    grid = sample_grid(product_curves, 17)
    report = moduli_sample(product_curves, grid, '-', (0.5 * math.pi, math.pi))
    single = compare_mate(product_curves,
                          reconstruct(mate_data(product_curves,
                                                solve_theta(product_curves, grid, '-', math.pi))))

    assert report.samples[1].theta0 == single.theta0
    assert report.samples[1].metric_error == pytest.approx(single.metric_error, abs=1e-10)
    assert report.samples[1].congruence.residual == pytest.approx(single.congruence.residual,
                                                                  abs=1e-10)


def _sampled(grid, positions):
    frames = np.broadcast_to(np.eye(4), grid.shape + (4, 4))
    gauge = np.broadcast_to(np.eye(2), grid.shape + (2, 2))
    return ReconstructedSurface(grid, positions, frames, {}, gauge, 0.0)


def test_congruence_allows_translations_and_reflections(product_curves):
    grid = sample_grid(product_curves, 17)
    f = eval_jet(product_curves, *grid.mesh()).f
    mirror = np.diag([1.0, 1.0, 1.0, -1.0])

    shifted = congruence_test(product_curves, _sampled(grid, f + np.array([1.0, -2.0, 0.5, 3.0])))
    mirrored = congruence_test(product_curves, _sampled(grid, f @ mirror))

    assert shifted.congruent
    assert shifted.residual < 1e-10
    assert mirrored.congruent
    assert mirrored.residual < 1e-10
    np.testing.assert_allclose(mirrored.rotation, mirror, atol=1e-8)


def test_orthogonal_fit_recovers_a_reflection():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(40, 4))
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    if np.linalg.det(q) > 0:
        q[:, 0] = -q[:, 0]
    shift = np.array([0.5, 0.0, -1.0, 2.0])

    rotation, translation, rms = orthogonal_fit(points, points @ q.T + shift)

    np.testing.assert_allclose(rotation, q, atol=1e-10)
    np.testing.assert_allclose(translation, shift, atol=1e-10)
    assert np.linalg.det(rotation) == pytest.approx(-1.0)
    assert rms < 1e-10


def test_plus_family_of_equal_curvatures_collapses(product_curves):
    report = moduli_sample(product_curves, sample_grid(product_curves, 9), '+', (1.0,))

    assert report.collapsed
    assert report.reason
    assert report.samples == ()
    assert report.all_noncongruent


def test_theta_solution_residuals(product_curves):
    theta = solve_theta(product_curves, sample_grid(product_curves, 33), '-', math.pi)

    assert theta.base == (16, 16)
    assert theta.theta['-'][16, 16] == pytest.approx(math.pi)
    np.testing.assert_allclose(theta.theta['-'], math.pi, atol=1e-8)
    assert theta.closure_residual < 1e-6
    assert theta.system_residual < 1e-3
    assert theta.root_residual < 1e-4


def test_zero_theta_reconstructs_the_source(product_curves):
    grid = sample_grid(product_curves, 17)
    theta = solve_theta(product_curves, grid, '-', 0.0)
    data = mate_data(product_curves, theta)
    mate = reconstruct(data)

    np.testing.assert_allclose(theta.theta['-'], 0.0, atol=1e-12)
    assert max(data.gauss_residual, data.ricci_residual) < 1e-8
    np.testing.assert_allclose(mate.f_tilde, eval_jet(product_curves, *grid.mesh()).f,
                               atol=1e-6)
    result = congruence_test(product_curves, mate)
    assert result.congruent
    sample = compare_mate(product_curves, mate)
    assert sample.metric_error < 1e-4


def test_reconstruction_closure_is_fourth_order(product_curves):
    grid = sample_grid(product_curves, 9)
    residuals = []
    for refinement in (4, 8):
        theta = solve_theta(product_curves, grid, '-', math.pi, refinement=refinement)
        residuals.append(reconstruct(mate_data(product_curves, theta)).closure_residual)

    assert 12.0 <= residuals[0] / residuals[1] <= 20.0
