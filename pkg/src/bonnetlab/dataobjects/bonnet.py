"""Data objects of the Bonnet-mate pipeline."""

import math

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from bonnetlab.dataobjects import SampleGrid


@dataclass(frozen=True)
class GeometrySamples:
    """Source geometry sampled on a refined lattice in a smooth normal gauge.

    The gauge is the isotropic frame (e₃±, e₄±) of ``gauge_sign``. Arrays are
    indexed ``[iu, iv, ...]`` by lattice node; grid node ``(i, j)`` is
    lattice node ``(refinement * i, refinement * j)``.

    _See Also_:
        [sample_geometry][bonnetlab.bonnet.sample_geometry]
    """

    grid: SampleGrid
    """Grid the results are reported on."""

    refinement: int
    """Lattice subdivisions per grid step."""

    gauge_sign: str
    """Sign of the isotropic frame used as normal gauge."""

    f: np.ndarray
    """Positions, ``(..., 4)``."""

    frame: np.ndarray
    """Gauge frame as rows (e1, e2, e3, e4), ``(..., 4, 4)``."""

    lam: np.ndarray
    """Conformal factor."""

    coframe: np.ndarray
    """ω_j(∂_w) as ``[..., w, j]``."""

    omega12: np.ndarray
    """(ω12(e1), ω12(e2))."""

    omega34: np.ndarray
    """(ω34(e1), ω34(e2)) of the gauge."""

    H: np.ndarray
    """Mean curvature vector in the gauge."""

    phi_minus: np.ndarray
    """φ⁻ in the gauge."""

    phi_plus: np.ndarray
    """φ⁺ in the gauge."""

    K: np.ndarray
    """Gaussian curvature."""

    K_N: np.ndarray
    """Normal curvature."""

    scale: np.ndarray
    """Curvature magnitude scale."""

    gauge_angle: np.ndarray
    """Angle of the gauge e3 in the adapted normal frame."""

    h: Dict[str, np.ndarray] = field(default_factory=dict)
    """h± by sign, for the signs the samples were prepared for."""

    def nodes(self, values: np.ndarray) -> np.ndarray:
        """Restrict a lattice array to the grid nodes."""
        return values[::self.refinement, ::self.refinement]


@dataclass(frozen=True)
class ThetaField:
    """Solution of the θ± system on a grid.

    _See Also_:
        [solve_theta][bonnetlab.bonnet.solve_theta]
    """

    grid: SampleGrid
    """Sample lattice."""

    sign: str
    """``-``, ``+`` or ``both``."""

    theta: Dict[str, np.ndarray]
    """θ per sign at the grid nodes, unwrapped."""

    theta0: Dict[str, float]
    """Initial value per sign at the base node."""

    base: Tuple[int, int]
    """Grid index of the base node."""

    closure_residual: float
    """Path dependence of the integral."""

    harmonic_residual: float
    """Largest |Δθ| over the grid."""

    system_residual: float
    """Largest |θ_z̄ ± i h (1 − e^{±iθ})| over the grid."""

    root_residual: float
    """Largest |A x² − 2i Im(A) x − Ā| at x = e^{±iθ}, relative to the scale."""

    geometry: GeometrySamples
    """Source samples the field was integrated on."""

    def reduced(self, sign: str) -> np.ndarray:
        """θ of one sign reduced into [0, 2π) relative to the branch of its initial value."""
        base = 2.0 * np.pi * np.floor(self.theta0[sign] / (2.0 * np.pi))
        return self.theta[sign] - base


@dataclass(frozen=True)
class MateFundamentalData:
    """First and second fundamental data of a Bonnet mate in the transported gauge.

    The mate shares λ, H and the normal connection of the gauge; its Hopf
    coefficient is Ψ.
    """

    theta: ThetaField
    """Solution the data were built from."""

    lam: np.ndarray
    """Shared conformal factor at the grid nodes."""

    Psi: np.ndarray
    """New Hopf coefficient, complex ``(nu, nv, 2)``."""

    H: np.ndarray
    """Shared mean curvature vector."""

    omega34: np.ndarray
    """Normal connection of the transported gauge on (e1, e2)."""

    gauss_residual: float
    """Largest |K̃ − K| / scale²."""

    ricci_residual: float
    """Largest |K̃_N − K_N| / scale²."""

    codazzi_residual: float
    """Largest ‖∇⊥_∂̄Ψ − (λ²/2)∇⊥_∂H‖ / scale from grid differences."""

    @property
    def grid(self) -> SampleGrid:
        """Sample lattice."""
        return self.theta.grid


@dataclass(frozen=True)
class ReconstructedSurface:
    """Immersion and frames integrated from fundamental data.

    _See Also_:
        [reconstruct][bonnetlab.bonnet.reconstruct]
    """

    grid: SampleGrid
    """Sample lattice."""

    f_tilde: np.ndarray
    """Positions, ``(nu, nv, 4)``."""

    frames: np.ndarray
    """Frames as rows (ẽ1, ẽ2, ẽ3, ẽ4), ``(nu, nv, 4, 4)``."""

    theta: Dict[str, np.ndarray]
    """θ per sign integrated along with the frame."""

    T_gauge: np.ndarray
    """Matrix of T from adapted normal coordinates of the source to (ẽ3, ẽ4), ``(nu, nv, 2, 2)``."""

    closure_residual: float
    """Path dependence of the integral."""

    data: Optional[MateFundamentalData] = None
    """Data the surface was built from."""


@dataclass(frozen=True)
class DistortionField:
    """Distortion differentials Q± = φ± − T⁻¹∘φ̃± of a mate."""

    grid: SampleGrid
    """Sample lattice."""

    Q_minus: np.ndarray
    """Q⁻, complex ``(nu, nv, 2)``."""

    Q_plus: np.ndarray
    """Q⁺, complex ``(nu, nv, 2)``."""

    sup_norm: float
    """Largest ‖Q‖ relative to λ² times the curvature scale, off the boundary rows."""

    closed_form_deviation: float
    """Largest deviation from (1 − e^{∓iθ±})φ± relative to λ² times the curvature scale."""

    holomorphy_residual: float
    """Largest ‖∇⊥_∂̄Q±‖ from grid differences, normalized like `sup_norm`."""


@dataclass(frozen=True)
class CongruenceResult:
    """Best orthogonal alignment of two sampled immersions and the congruence verdict."""

    rotation: np.ndarray
    """Orthogonal 4x4 matrix, possibly orientation reversing."""

    translation: np.ndarray
    """Translation vector."""

    residual: float
    """RMS distance after alignment."""

    diameter: float
    """Bounding-box diagonal of the source samples."""

    distortion: float
    """`DistortionField.sup_norm`, or NaN when not measured."""

    congruent: bool
    """False iff both the residual and the distortion exceed their thresholds."""


@dataclass(frozen=True)
class MateSample:
    """Comparison of one family member with its source."""

    theta0: Dict[str, float]
    """Initial values per sign."""

    metric_error: float
    """Largest relative deviation of the induced metric."""

    mean_curvature_error: float
    """Largest |‖H̃‖ − ‖H‖| / scale."""

    normal_curvature_error: float
    """Largest |K̃_N − K_N| / scale²."""

    ellipse_error: float
    """Largest deviation of the curvature-ellipse semiaxes relative to the scale."""

    closure_residual: float
    """Path dependence of the reconstruction."""

    gauss_residual: float
    """Gauss residual of the mate data."""

    ricci_residual: float
    """Ricci residual of the mate data."""

    codazzi_residual: float
    """Codazzi residual of the mate data."""

    root_residual: float
    """Root-structure residual of θ."""

    congruence: CongruenceResult
    """Alignment against the source."""

    distortion_holomorphy: float = math.nan
    """`DistortionField.holomorphy_residual` of the mate, NaN when not measured."""


@dataclass(frozen=True)
class FamilyReport:
    """Sampled moduli of Bonnet mates.

    _See Also_:
        [moduli_sample][bonnetlab.bonnet.moduli_sample]
    """

    sign: str
    """``-``, ``+`` or ``both``."""

    samples: Tuple[MateSample, ...] = field(default_factory=tuple)
    """One entry per θ₀ sample."""

    pairwise_residual: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    """RMS alignment residual between every pair of mates."""

    pairwise_noncongruent: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), bool))
    """True where two mates are told apart by their alignment residual."""

    collapsed: bool = False
    """True when the family has no members besides the source."""

    reason: str = field(default_factory=str)
    """Why the family collapsed."""

    @property
    def all_noncongruent(self) -> bool:
        """Every pair of distinct members is noncongruent."""
        n = len(self.samples)
        off = ~np.eye(n, dtype=bool)
        return bool(np.all(self.pairwise_noncongruent[off])) if n > 1 else True
