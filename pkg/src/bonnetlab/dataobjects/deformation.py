"""Data objects of infinitesimal isometric deformations."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from bonnetlab.dataobjects import CheckResult, SampleGrid


@dataclass(frozen=True)
class VariationForms:
    """Variations φ_kl of the connection forms of a surface.

    ``phi[..., j, k, l]`` holds φ_kl(e_j) with 0-based indices, the same
    layout as [ConnectionSample][bonnetlab.dataobjects.surface.ConnectionSample].
    The normal frame (e3, e4) the forms refer to is the gauge named by
    ``normal_frame``.

    _See Also_:
        [build_variation][bonnetlab.deformations.build_variation],
        [trivial_variation][bonnetlab.deformations.trivial_variation]
    """

    grid: SampleGrid
    """Grid the forms are reported on."""

    sign: str
    """Sign of the preserved isotropic part (``+`` or ``-``)."""

    normal_frame: str
    """``isotropic``, ``mean_curvature`` or ``trivial``."""

    refinement: int
    """Lattice subdivisions per grid step."""

    lattice: Dict[str, np.ndarray]
    """Source geometry at the lattice nodes, keyed like the sampler output."""

    phi: np.ndarray
    """φ_kl(e_j) at the grid nodes, ``(nu, nv, 2, 4, 4)``."""

    L: Optional[np.ndarray] = None
    """Positive amplitude of φ23, normalized to 1 at the base node."""

    phase: Optional[np.ndarray] = None
    """Angle of the opposite isotropic e3 in the (e3, e4) gauge."""

    closure_residual: float = 0.0
    """Path dependence of the log L integral."""

    residuals: Dict[str, float] = field(default_factory=dict)
    """Fundamental-system residuals by equation name."""

    trivial_u: Optional[float] = None
    """Rotation speed u of a trivial family."""

    @property
    def trivial(self) -> bool:
        """True for the trivial family."""
        return self.normal_frame == 'trivial'

    def nodes(self, values: np.ndarray) -> np.ndarray:
        """Restrict a lattice array to the grid nodes."""
        return values[::self.refinement, ::self.refinement]

    def form(self, k: int, l: int) -> np.ndarray:
        """φ_kl on (e1, e2) with 1-based frame indices."""
        return self.phi[..., :, k - 1, l - 1]


@dataclass(frozen=True)
class BendingField:
    """Infinitesimal bending 𝒯 integrated from variation forms.

    _See Also_:
        [integrate_bending][bonnetlab.deformations.integrate_bending]
    """

    forms: VariationForms
    """Forms the field was integrated from."""

    T: np.ndarray
    """Bending field at the grid nodes, ``(nu, nv, 4)``."""

    V: np.ndarray
    """Skew matrix of the bivector V at the grid nodes, ``(nu, nv, 4, 4)``."""

    closure_residual: float
    """Path dependence of the joint (log L, V, 𝒯) integral."""

    nontriviality_residual: float
    """Least-squares misfit of 𝒯 against C·f + v relative to ‖𝒯‖."""

    bending_residual: float
    """Largest symmetric part of ⟨∇_X𝒯, f_*Y⟩ relative to λ² max(1, ‖V‖)."""

    trivial_fit: Tuple[np.ndarray, np.ndarray] = field(
        default_factory=lambda: (np.zeros((4, 4)), np.zeros(4)))
    """Best (C, v) of the trivial fit."""


@dataclass(frozen=True)
class DeformationSample:
    """Deviations of f_t = f + t𝒯 from f at one parameter value."""

    t: float
    """Deformation parameter."""

    metric: float
    """Largest |g_t − g| / λ²."""

    mean_curvature: float
    """Largest ‖H_t − H‖ / scale in the transported gauge."""

    preserved_hopf: float
    """Largest deviation of the preserved isotropic Hopf part, relative to λ² scale."""

    other_hopf: float
    """Largest deviation of the other isotropic Hopf part, relative to λ² scale."""

    gauss_lift: Optional[float] = None
    """Symmetric t-difference of the trace-free Gauss-lift form, when measured."""


@dataclass(frozen=True)
class DeformationReport:
    """Order checks of a bending field.

    _See Also_:
        [verify_deformation][bonnetlab.deformations.verify_deformation]
    """

    kind: str
    """Normal frame of the underlying forms."""

    sign: str
    """Sign of the preserved isotropic part."""

    samples: Tuple[DeformationSample, ...] = field(default_factory=tuple)
    """One entry per t value."""

    checks: Tuple[CheckResult, ...] = field(default_factory=tuple)
    """Ratio and bound checks."""

    surfaces: Dict[float, np.ndarray] = field(default_factory=dict)
    """Deformed positions f_t per t value."""

    @property
    def passed(self) -> bool:
        """Every check holds."""
        return all(check.passed for check in self.checks)
