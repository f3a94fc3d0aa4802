"""Data objects describing immersion patches, their jets, frames and connections."""

import math

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

JetSource = Callable[[np.ndarray, np.ndarray], 'Jet3']
ValueSource = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Jet3:
    """Immersion value and partial derivatives up to order three.

    Every field is an array of shape ``(..., 4)`` matching the sample points it
    was evaluated at.

    _See Also_:
        [SurfaceChart][bonnetlab.dataobjects.surface.SurfaceChart]
    """

    f: np.ndarray
    """Position."""

    fu: np.ndarray
    """First partial along u."""

    fv: np.ndarray
    """First partial along v."""

    fuu: np.ndarray
    """Second partial along u."""

    fuv: np.ndarray
    """Mixed second partial."""

    fvv: np.ndarray
    """Second partial along v."""

    fuuu: np.ndarray
    """Third partial u, u, u."""

    fuuv: np.ndarray
    """Third partial u, u, v."""

    fuvv: np.ndarray
    """Third partial u, v, v."""

    fvvv: np.ndarray
    """Third partial v, v, v."""

    def partial(self, *axes: int) -> np.ndarray:
        """Return the partial derivative along ``axes`` (0 for u, 1 for v).

        Args:
            axes: One to three axis indices, in any order.

        Returns:
            The requested partial, or the position when ``axes`` is empty.
        """
        name = 'f' + ''.join('uv'[a] for a in sorted(axes))
        return getattr(self, name)

    def first(self) -> np.ndarray:
        """Stack of (f_u, f_v) with shape ``(..., 2, 4)``."""
        return np.stack([self.fu, self.fv], axis=-2)

    def second(self) -> np.ndarray:
        """Hessian stack with shape ``(..., 2, 2, 4)``."""
        row_u = np.stack([self.fuu, self.fuv], axis=-2)
        row_v = np.stack([self.fuv, self.fvv], axis=-2)
        return np.stack([row_u, row_v], axis=-3)


@dataclass(frozen=True)
class SurfaceChart:
    """An evaluable immersion patch of a rectangle into R⁴.

    Exactly one of ``jet_source`` (analytic jets) and ``value_source``
    (positions only, differentiated numerically with step ``h_fd``) is set.

    _See Also_:
        [Jet3][bonnetlab.dataobjects.surface.Jet3],
        [eval_jet][bonnetlab.surface.eval_jet]
    """

    name: str = field(default_factory=str)
    """Catalog name or user label."""

    domain: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    """Parameter rectangle (u0, u1, v0, v1)."""

    periodic_u: bool = False
    """Whether u is periodic with period u1 - u0."""

    periodic_v: bool = False
    """Whether v is periodic with period v1 - v0."""

    jet_source: Optional[JetSource] = None
    """Analytic jet evaluator."""

    value_source: Optional[ValueSource] = None
    """Value-only evaluator."""

    h_fd: Optional[float] = None
    """Finite-difference step for value-only charts."""

    isothermal: bool = False
    """Whether the chart is conformal."""

    ambient_c: float = 0.0
    """Curvature of the ambient space form carried into the formulas."""

    poles: bool = False
    """Whether the v edges of the domain collapse to points (spherical charts)."""

    euler_characteristic: Optional[int] = None
    """Euler characteristic of the closed surface the chart covers."""

    normal_euler_number: Optional[int] = None
    """Normal Euler number of the closed surface the chart covers."""

    singular_seeds: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)
    """Known approximate positions of pseudo-umbilic points."""

    facts: Tuple[str, ...] = field(default_factory=tuple)
    """Certified facts of zoo charts."""

    params: Dict[str, Any] = field(default_factory=dict)
    """Parameters the chart was built from."""

    @property
    def analytic(self) -> bool:
        """True when jets are exact."""
        return self.jet_source is not None

    @property
    def diameter(self) -> float:
        """Diagonal of the parameter rectangle."""
        u0, u1, v0, v1 = self.domain
        return math.hypot(u1 - u0, v1 - v0)

    @property
    def compact(self) -> bool:
        """True when the chart covers a closed surface."""
        return self.periodic_u and (self.periodic_v or self.poles)


@dataclass(frozen=True)
class AdaptedFrame:
    """Positively oriented orthonormal frame (e1, e2 tangent; e3, e4 normal).

    Each vector has shape ``(..., 4)``.
    """

    e1: np.ndarray
    """First unit tangent."""

    e2: np.ndarray
    """Second unit tangent."""

    e3: np.ndarray
    """First unit normal."""

    e4: np.ndarray
    """Second unit normal."""

    lam: Optional[np.ndarray] = None
    """Conformal factor on isothermal charts."""

    def matrix(self) -> np.ndarray:
        """Frame vectors as rows, shape ``(..., 4, 4)``."""
        return np.stack([self.e1, self.e2, self.e3, self.e4], axis=-2)

    def orthonormality_defect(self) -> float:
        """Largest deviation of the frame Gram matrix from the identity."""
        m = self.matrix()
        gram = m @ np.swapaxes(m, -1, -2)
        return float(np.max(np.abs(gram - np.eye(4)))) if gram.size else 0.0

    def orientation(self) -> np.ndarray:
        """det[e1 e2 e3 e4] per point."""
        return np.linalg.det(self.matrix())


@dataclass(frozen=True)
class ConnectionSample:
    """Connection forms of a frame field at sample points.

    ``omega[..., j, k, l]`` holds ω_kl(e_j) = ⟨∇_{e_j} e_k, e_l⟩ with 0-based
    indices (j tangent, k and l ambient frame indices). ``coframe[..., w, j]``
    holds ω_j(∂_w) for the coordinate fields ∂_u, ∂_v.
    """

    frame: AdaptedFrame
    """Frame at the stencil centres."""

    omega: np.ndarray
    """Connection coefficients, shape ``(..., 2, 4, 4)``."""

    coframe: np.ndarray
    """Tangent coframe on coordinate fields, shape ``(..., 2, 2)``."""

    omega12_residual: Optional[np.ndarray] = None
    """|ω12 − ⋆d log λ| on isothermal charts."""

    @property
    def omega12(self) -> np.ndarray:
        """(ω12(e1), ω12(e2))."""
        return self.omega[..., :, 0, 1]

    @property
    def omega34(self) -> np.ndarray:
        """(ω34(e1), ω34(e2))."""
        return self.omega[..., :, 2, 3]

    def omega_ja(self, j: int, a: int) -> np.ndarray:
        """(ω_ja(e1), ω_ja(e2)) for 1-based indices j in {1, 2}, a in {3, 4}."""
        return self.omega[..., :, j - 1, a - 1]

    def antisymmetry_defect(self) -> float:
        """Largest |ω_kl + ω_lk| over the samples."""
        return float(np.max(np.abs(self.omega + np.swapaxes(self.omega, -1, -2))))

    def symmetry_defect(self) -> float:
        """Largest |ω_1a(e2) − ω_2a(e1)|, i.e. asymmetry of the second fundamental form."""
        return float(np.max(np.abs(self.omega[..., 1, 0, 2:] - self.omega[..., 0, 1, 2:])))
