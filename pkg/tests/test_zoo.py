import math

import numpy as np
import pytest

from bonnetlab import zoo
from bonnetlab.exception import NumericalError, UnknownEntry
from bonnetlab.invariants import point_invariants
from bonnetlab.surface import eval_jet, metric, sample_grid


def test_make_rejects_unknown_entries():
    with pytest.raises(UnknownEntry):
        zoo.make('klein_bottle')
    with pytest.raises(KeyError):
        zoo.make('klein_bottle')
    with pytest.raises(NumericalError):
        zoo.make('klein_bottle')


def test_make_rejects_unknown_and_invalid_parameters():
    with pytest.raises(ValueError):
        zoo.make('round_sphere', {'radius': 2.0})
    with pytest.raises(ValueError):
        zoo.make('round_sphere', {'r': 0.0})
    with pytest.raises(ValueError):
        zoo.make('triaxial_ellipsoid', {'a': 1.5, 'b': 1.2, 'c': 1.0})


def test_make_records_the_merged_parameters():
    chart = zoo.make('product_circles', {'r2': 2.0})

    assert chart.params == {'r1': 0.5, 'r2': 2.0}
    assert chart.domain[3] == pytest.approx(4.0 * math.pi)


def test_curve_with_unit_curvature_is_the_unit_circle():
    curve = zoo.curve_from_curvature(1.0, (0.0, math.pi))

    np.testing.assert_allclose(curve.nodes[0], [0.0, 0.0, 0.0])
    np.testing.assert_allclose(curve.nodes[-1], [0.0, 2.0, math.pi], atol=1e-12)

    s = np.array([0.3, 1.234, 2.5])
    gamma, tangent, second, third = zoo.curve_jet(curve, s)
    np.testing.assert_allclose(gamma, np.stack([np.sin(s), 1.0 - np.cos(s)], axis=-1),
                               atol=1e-12)
    np.testing.assert_allclose(tangent, np.stack([np.cos(s), np.sin(s)], axis=-1), atol=1e-12)
    np.testing.assert_allclose(second, np.stack([-np.sin(s), np.cos(s)], axis=-1), atol=1e-12)
    np.testing.assert_allclose(third, -tangent, atol=1e-12)


def test_empty_arclength_interval():
    with pytest.raises(ValueError):
        zoo.curve_from_curvature((0.0, 1.0), (1.0, 1.0))


def test_product_curves_facts_depend_on_the_curvatures(product_curves, unequal_curves):
    assert 'strongly_iso_isothermic' in product_curves.facts
    assert 'vertically_harmonic_minus' in product_curves.facts
    assert unequal_curves.facts == ('flat_normal_bundle', 'isothermic')


def test_product_curves_are_unit_speed(product_curves):
    jet = eval_jet(product_curves, *sample_grid(product_curves, 8).mesh())

    np.testing.assert_allclose(metric(jet), np.broadcast_to(np.eye(2), (8, 8, 2, 2)), atol=1e-12)


def test_holomorphic_curve_from_complex_coefficients():
    chart = zoo.make('holomorphic_curve', {'w': (0.0, 0.0, 0.0), 'w_imag': (0.0, 0.0, 1.0)})
    u, v = 0.3, -0.4
    z2 = 1j * complex(u, v) ** 2

    np.testing.assert_allclose(eval_jet(chart, u, v).f, [u, v, z2.real, z2.imag], atol=1e-14)
    assert chart.facts == ('minimal', 'superconformal_plus')


def test_inversion_jet_matches_finite_differences(holomorphic, value_only):
    exact = zoo.inverted(holomorphic)
    approx = zoo.inverted(value_only)
    u, v = np.meshgrid(np.linspace(-0.4, 0.4, 4), np.linspace(-0.4, 0.4, 4), indexing='ij')
    a, b = eval_jet(exact, u, v), eval_jet(approx, u, v)

    assert exact.analytic and not approx.analytic
    for name in ('f', 'fu', 'fv'):
        np.testing.assert_allclose(getattr(b, name), getattr(a, name), atol=1e-7)
    for name in ('fuu', 'fuv', 'fvv'):
        np.testing.assert_allclose(getattr(b, name), getattr(a, name), atol=1e-5)


def test_inversion_keeps_the_chart_conformal(product_curves):
    chart = zoo.inverted(product_curves)
    g = metric(eval_jet(chart, *sample_grid(chart, 8).mesh()))
    size = g[..., 0, 0]

    np.testing.assert_allclose(g[..., 1, 1] / size, 1.0, atol=1e-12)
    np.testing.assert_allclose(g[..., 0, 1] / size, 0.0, atol=1e-12)
    assert chart.name == 'inverted(product_curves)'
    assert chart.facts == ()


def test_homothety_scales_the_mean_curvature(torus):
    grid = sample_grid(torus, 8)
    base = point_invariants(torus, *grid.mesh(), hopf=False)
    big = point_invariants(zoo.scaled(torus, 2.0), *grid.mesh(), hopf=False)

    np.testing.assert_allclose(big.normH2, base.normH2 / 4.0, atol=1e-12)
    with pytest.raises(ValueError):
        zoo.scaled(torus, -1.0)


def test_ellipsoid_seeds_are_umbilics(ellipsoid):
    seeds = np.array(ellipsoid.singular_seeds)
    inv = point_invariants(ellipsoid, seeds[:, 0], seeds[:, 1], hopf=False)

    assert len(seeds) == 4
    np.testing.assert_allclose(inv.B_minus, 0.0, atol=1e-8)
    np.testing.assert_allclose(inv.B_plus, 0.0, atol=1e-8)


def test_parallel_mean_curvature_of_the_torus(torus):
    residual = zoo.parallel_mean_curvature_residual(torus, *sample_grid(torus, 8).mesh())

    assert np.max(residual) < 1e-6


@pytest.mark.parametrize('name', sorted(zoo.ZOO))
def test_certified_facts_hold(name):
    chart = zoo.make(name)

    for check in zoo.verify_facts(chart):
        assert check.passed, f'{name}: {check.name} = {check.value:.3e}'
