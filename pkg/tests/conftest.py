"""Shared fixtures: catalog charts and small sample grids."""

import numpy as np
import pytest

from bonnetlab import zoo
from bonnetlab.dataobjects.surface import SurfaceChart


@pytest.fixture
def plane() -> SurfaceChart:
    return zoo.make('plane')


@pytest.fixture
def torus() -> SurfaceChart:
    return zoo.make('product_circles')


@pytest.fixture
def sphere() -> SurfaceChart:
    return zoo.make('round_sphere')


@pytest.fixture
def ellipsoid() -> SurfaceChart:
    return zoo.make('triaxial_ellipsoid')


@pytest.fixture
def holomorphic() -> SurfaceChart:
    return zoo.make('holomorphic_curve')


@pytest.fixture
def product_curves() -> SurfaceChart:
    return zoo.make('product_curves')


@pytest.fixture
def unequal_curves() -> SurfaceChart:
    """Product of curves with curvatures s and 2s: Ω⁺ is not co-closed."""
    return zoo.make('product_curves', {'k1': (0.0, 1.0), 'k2': (0.0, 2.0)})


@pytest.fixture
def superconformal() -> SurfaceChart:
    """Inverted z² graph: superconformal of sign + with nowhere-vanishing H."""
    return zoo.make('inverted', {
        'base': 'holomorphic_curve',
        'base_params': {'domain': (-0.5, 0.5, -0.5, 0.5)},
        'center': (0.0, 0.0, 1.0, 0.0),
    })


@pytest.fixture
def value_only(holomorphic) -> SurfaceChart:
    """The z² graph seen through positions only."""
    jets = holomorphic.jet_source

    def values(u, v):
        return jets(np.asarray(u, dtype=float), np.asarray(v, dtype=float)).f

    return SurfaceChart(name='holomorphic_values', domain=holomorphic.domain,
                        value_source=values, isothermal=True)
