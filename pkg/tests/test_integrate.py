import numpy as np
import pytest

from bonnetlab.integrate import integrate_lattice, sample_lattice
from bonnetlab.surface import sample_grid


def _potential(u, v):
    return np.sin(u) * np.exp(v)


def _gradient(u, v):
    return np.stack([np.cos(u) * np.exp(v), np.sin(u) * np.exp(v)], axis=-1)


def test_exact_form_integrates_to_its_potential(plane):
    grid = sample_grid(plane, 9)
    slope = sample_lattice(_gradient, grid, 4)

    def rhs(axis, iu, iv, state):
        return slope[iu, iv, axis][:, None]

    solution = integrate_lattice(rhs, [0.0], grid, 4)

    assert solution.base == (4, 4)
    assert solution.values.shape == (9, 9, 1)
    np.testing.assert_allclose(solution.values[..., 0], _potential(*grid.mesh()), atol=1e-7)
    assert solution.closure_residual < 1e-7


def test_closure_residual_detects_a_curl(plane):
    grid = sample_grid(plane, 9)
    uu, vv = grid.refined(2).mesh()

    def rhs(axis, iu, iv, state):
        field = -vv[iu, iv] if axis == 0 else uu[iu, iv]
        return field[:, None]

    solution = integrate_lattice(rhs, [0.0], grid, 2, base=(0, 0))

    # 2 per unit area between the two paths to the far corner
    assert solution.closure_residual == pytest.approx(8.0, rel=1e-8)


def test_linear_system_with_projection(plane):
    grid = sample_grid(plane, 5)

    def rhs(axis, iu, iv, state):
        rate = 1.0 if axis == 0 else 2.0
        return np.stack([-rate * state[:, 1], rate * state[:, 0]], axis=-1)

    def normalize(state):
        return state / np.linalg.norm(state, axis=-1, keepdims=True)

    solution = integrate_lattice(rhs, [1.0, 0.0], grid, 16, project=normalize)
    angle = np.arctan2(solution.values[..., 1], solution.values[..., 0])
    uu, vv = grid.mesh()

    np.testing.assert_allclose(angle, uu + 2.0 * vv, atol=1e-5)
    np.testing.assert_allclose(np.linalg.norm(solution.values, axis=-1), 1.0, atol=1e-14)


@pytest.mark.parametrize('refinement', [0, 3])
def test_refinement_must_be_even(plane, refinement):
    with pytest.raises(ValueError):
        integrate_lattice(lambda axis, iu, iv, state: state, [0.0], sample_grid(plane, 5),
                          refinement)
