"""Data objects holding pointwise second-order invariants."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np


@dataclass(frozen=True)
class SecondFundamentalData:
    """Second fundamental form in the normal basis (e3, e4).

    Every field has shape ``(..., 2)`` (components along e3 and e4).

    _See Also_:
        [PointInvariants][bonnetlab.dataobjects.invariants.PointInvariants]
    """

    alpha11: np.ndarray
    """α(e1, e1)."""

    alpha12: np.ndarray
    """α(e1, e2)."""

    alpha22: np.ndarray
    """α(e2, e2)."""

    @property
    def H(self) -> np.ndarray:
        """Mean curvature vector (α11 + α22)/2."""
        return 0.5 * (self.alpha11 + self.alpha22)

    @property
    def u_vec(self) -> np.ndarray:
        """Ellipse generator (α11 − α22)/2."""
        return 0.5 * (self.alpha11 - self.alpha22)

    @property
    def v_vec(self) -> np.ndarray:
        """Ellipse generator α12."""
        return self.alpha12

    @property
    def norm(self) -> np.ndarray:
        """Frobenius norm of α."""
        return np.sqrt(np.sum(self.alpha11 ** 2 + 2 * self.alpha12 ** 2 + self.alpha22 ** 2,
                              axis=-1))


@dataclass(frozen=True)
class PointInvariants:
    """Scalar and normal-vector invariants at sample points."""

    data: SecondFundamentalData
    """Second fundamental form the invariants were computed from."""

    K: np.ndarray
    """Gaussian curvature."""

    K_N: np.ndarray
    """Normal curvature."""

    normH2: np.ndarray
    """‖H‖²."""

    B_minus: np.ndarray
    """‖u − J v‖, the length ‖H⁻‖ of the minus isotropic part."""

    B_plus: np.ndarray
    """‖u + J v‖, the length ‖H⁺‖ of the plus isotropic part."""

    lambda1: np.ndarray
    """Major semiaxis of the curvature ellipse."""

    lambda2: np.ndarray
    """Minor semiaxis of the curvature ellipse."""

    major_axis: np.ndarray
    """Unit major-axis direction in normal coordinates (NaN on circles)."""

    ambient_c: float = 0.0
    """Ambient curvature used in the Gauss equation."""

    lam: Optional[np.ndarray] = None
    """Conformal factor on isothermal charts."""

    phi_minus: Optional[np.ndarray] = None
    """φ⁻ as a complex 2-vector in (e3, e4) (isothermal charts)."""

    phi_plus: Optional[np.ndarray] = None
    """φ⁺ as a complex 2-vector in (e3, e4) (isothermal charts)."""

    @property
    def scale(self) -> np.ndarray:
        """Curvature magnitude scale max(1, ‖α‖)."""
        return np.maximum(1.0, self.data.norm)


class PointTag(str, Enum):
    """Classification tags of a surface point."""

    GENERIC = 'generic'
    PSEUDO_UMBILIC_PLUS = 'pseudo_umbilic_plus'
    PSEUDO_UMBILIC_MINUS = 'pseudo_umbilic_minus'
    UMBILIC = 'umbilic'
    MINIMAL = 'minimal'


@dataclass(frozen=True)
class PointClass:
    """Classification of sample points.

    ``tag`` holds the dominant tag (umbilic, then pseudo-umbilic, then
    minimal); the boolean arrays keep every property that holds.
    """

    tag: np.ndarray
    """Array of [PointTag][bonnetlab.dataobjects.invariants.PointTag] values."""

    pseudo_umbilic_plus: np.ndarray
    """B⁺ below threshold."""

    pseudo_umbilic_minus: np.ndarray
    """B⁻ below threshold."""

    umbilic: np.ndarray
    """Both isotropic parts vanish."""

    minimal: np.ndarray
    """‖H‖ below threshold."""

    margins: Dict[str, np.ndarray] = field(default_factory=dict)
    """Defining scalars and the threshold used."""


@dataclass(frozen=True)
class CurvatureDirections:
    """Curvature-line directions as tangent angles measured from e1."""

    principal: np.ndarray
    """Four angles in [0, 2π), shape ``(..., 4)``."""

    mean_directional: np.ndarray
    """Two angles in [0, π) or NaN where undefined, shape ``(..., 2)``."""
