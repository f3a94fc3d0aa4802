"""Data objects shared by every bonnetlab module."""

import math

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class SampleGrid:
    """Rectangular lattice of sample points over a chart domain.

    Periodic axes hold ``n`` points without the closing end point. Non-periodic
    axes hold ``n`` points including both ends, unless ``centered`` is set for
    that axis, in which case the points are cell midpoints (used to stay off
    the poles of spherical charts).

    _See Also_:
        [SurfaceChart][bonnetlab.dataobjects.surface.SurfaceChart]
    """

    nu: int = 64
    """Number of samples along u."""

    nv: int = 64
    """Number of samples along v."""

    domain: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    """Sampled rectangle as (u0, u1, v0, v1)."""

    periodic_u: bool = False
    """True when u is sampled as a full period."""

    periodic_v: bool = False
    """True when v is sampled as a full period."""

    centered_v: bool = False
    """True when v samples are cell midpoints."""

    @property
    def u(self) -> np.ndarray:
        """Sample coordinates along u."""
        return self._axis(self.domain[0], self.domain[1], self.nu, self.periodic_u, False)

    @property
    def v(self) -> np.ndarray:
        """Sample coordinates along v."""
        return self._axis(self.domain[2], self.domain[3], self.nv, self.periodic_v,
                          self.centered_v)

    @property
    def du(self) -> float:
        """Spacing along u."""
        return float(self.u[1] - self.u[0])

    @property
    def dv(self) -> float:
        """Spacing along v."""
        return float(self.v[1] - self.v[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """Grid shape as (nu, nv)."""
        return (self.nu, self.nv)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return the (nu, nv) coordinate arrays in ``ij`` indexing."""
        return np.meshgrid(self.u, self.v, indexing='ij')

    def refined(self, factor: int) -> 'SampleGrid':
        """Return the lattice obtained by subdividing every grid step ``factor`` times.

        Grid node ``(i, j)`` becomes lattice node ``(factor * i, factor * j)``.
        Periodic axes get ``factor - 1`` extra points after the last node so
        that paths can reach it from both sides.
        """
        nu = self.nu * factor if self.periodic_u else (self.nu - 1) * factor + 1
        nv = self.nv * factor if self.periodic_v else (self.nv - 1) * factor + 1
        u0, u1, v0, v1 = self.domain
        if self.centered_v:
            half = 0.5 * self.dv
            v0, v1 = v0 + half, v1 - half
        return SampleGrid(nu, nv, (u0, u1, v0, v1), self.periodic_u, self.periodic_v)

    @staticmethod
    def _axis(a: float, b: float, n: int, periodic: bool, centered: bool) -> np.ndarray:
        if periodic:
            return a + (b - a) * np.arange(n) / n
        if centered:
            return a + (b - a) * (np.arange(n) + 0.5) / n
        return np.linspace(a, b, n)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a single numerical check.

    For ``kind == 'abs'`` the check passes when ``abs_error <= tolerance``;
    for ``kind == 'above'`` it passes when ``value > target``. Either way a
    report can be re-validated from its numbers alone.
    """

    name: str = field(default_factory=str)
    """Name of the check."""

    value: Optional[float] = None
    """Measured value."""

    target: Optional[float] = None
    """Expected value, or the threshold to exceed."""

    tolerance: float = 0.0
    """Accepted absolute error."""

    abs_error: Optional[float] = None
    """|value - target|."""

    passed: bool = False
    """Whether the check holds."""

    kind: str = 'abs'
    """``abs`` or ``above``."""

    @classmethod
    def compare(cls, name: str, value: float, target: float, tolerance: float) -> 'CheckResult':
        """Build a check from a measured value and its target."""
        value = float(value)
        target = float(target)
        error = abs(value - target)
        passed = bool(math.isfinite(error) and error <= tolerance)
        return cls(name, value, target, float(tolerance), error, passed)

    @classmethod
    def bound(cls, name: str, value: float, tolerance: float) -> 'CheckResult':
        """Build a check asserting that a nonnegative residual is small."""
        return cls.compare(name, value, 0.0, tolerance)

    @classmethod
    def window(cls, name: str, value: float, low: float, high: float) -> 'CheckResult':
        """Build a check asserting that ``value`` lies in ``[low, high]``."""
        centre = 0.5 * (low + high)
        return cls.compare(name, value, centre, 0.5 * (high - low))

    @classmethod
    def above(cls, name: str, value: float, threshold: float) -> 'CheckResult':
        """Build a check asserting that ``value`` exceeds ``threshold``."""
        value = float(value)
        passed = bool(math.isfinite(value) and value > threshold)
        return cls(name, value, float(threshold), 0.0, abs(value - threshold), passed, 'above')


@dataclass(frozen=True)
class LatticeSolution:
    """Path integral of a first-order system over a sample grid.

    _See Also_:
        [integrate_lattice][bonnetlab.integrate.integrate_lattice]
    """

    grid: SampleGrid
    """Grid the values are reported on."""

    values: np.ndarray
    """States at grid nodes from the row-first march, shape ``(nu, nv, d)``."""

    transposed: np.ndarray
    """States at grid nodes from the column-first march."""

    base: Tuple[int, int]
    """Grid index of the initial state."""

    refinement: int
    """Lattice subdivisions per grid step."""

    @property
    def closure_residual(self) -> float:
        """Largest discrepancy between the two marching orders."""
        diff = np.linalg.norm(self.values - self.transposed, axis=-1)
        return float(np.max(diff)) if diff.size else 0.0
