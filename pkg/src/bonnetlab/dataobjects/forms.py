"""Data objects for mixed connection forms and the quantities derived from them."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from bonnetlab.dataobjects import CheckResult, SampleGrid


@dataclass(frozen=True)
class MixedFormField:
    """Samples of the mixed connection form Ω± = 2ω12 ± ω34± over a grid.

    One-form samples are stored on the tangent frame (e1, e2) as arrays of
    shape ``(nu, nv, 2)``; masked samples are NaN.

    _See Also_:
        [mixed_form_field][bonnetlab.mixedforms.mixed_form_field]
    """

    grid: SampleGrid
    """Sample lattice."""

    sign: str
    """``+`` or ``-``."""

    omega: np.ndarray
    """(Ω±(e1), Ω±(e2))."""

    omega12: np.ndarray
    """(ω12(e1), ω12(e2))."""

    omega34: np.ndarray
    """(ω34±(e1), ω34±(e2)) of the frame (e3±, e4±)."""

    coframe: np.ndarray
    """ω_j(∂_w) as ``[..., w, j]`` at every grid point."""

    e3_angle: np.ndarray
    """Angle of e3± in the adapted normal frame, unwrapped along rows."""

    B: np.ndarray
    """‖u ± J v‖ at every grid point."""

    scale: np.ndarray
    """Curvature magnitude scale max(1, ‖α‖)."""

    mask: np.ndarray
    """True where the field is defined and away from singular points."""

    K: np.ndarray
    """Gaussian curvature."""

    K_N: np.ndarray
    """Normal curvature."""

    singular_points: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)
    """Refined pseudo-umbilic points of this sign."""

    lam: Optional[np.ndarray] = None
    """Conformal factor on isothermal charts."""

    @property
    def sign_value(self) -> float:
        """+1.0 or -1.0."""
        return 1.0 if self.sign == '+' else -1.0

    @property
    def area_element(self) -> np.ndarray:
        """det[ω_j(∂_w)], the area density of the chart."""
        return np.linalg.det(self.coframe)

    @property
    def omega_coordinates(self) -> np.ndarray:
        """(Ω±(∂_u), Ω±(∂_v))."""
        return np.einsum('...wj,...j->...w', self.coframe, self.omega)


@dataclass(frozen=True)
class IsothermicityMap:
    """Per-point isotropic isothermicity flags for both signs.

    _See Also_:
        [isothermicity_classify][bonnetlab.mixedforms.isothermicity_classify]
    """

    grid: SampleGrid
    """Sample lattice."""

    costar_minus: np.ndarray
    """d⋆Ω⁻ samples (NaN where masked)."""

    costar_plus: np.ndarray
    """d⋆Ω⁺ samples (NaN where masked)."""

    iso_minus: np.ndarray
    """|d⋆Ω⁻| below threshold."""

    iso_plus: np.ndarray
    """|d⋆Ω⁺| below threshold."""

    mask_minus: np.ndarray
    """Points where Ω⁻ is defined."""

    mask_plus: np.ndarray
    """Points where Ω⁺ is defined."""

    threshold: np.ndarray
    """Per-point threshold eps × curvature scale."""

    cross_check: Dict[str, float] = field(default_factory=dict)
    """Largest relative deviation of d⋆Ω± from −(4/λ²) Im h±_z (isothermal charts)."""

    @property
    def non_minus(self) -> np.ndarray:
        """Defined points where Ω⁻ is not co-closed."""
        return self.mask_minus & ~self.iso_minus

    @property
    def non_plus(self) -> np.ndarray:
        """Defined points where Ω⁺ is not co-closed."""
        return self.mask_plus & ~self.iso_plus

    @property
    def strong(self) -> bool:
        """Both signs co-closed on every defined point."""
        return bool(np.all(self.iso_minus[self.mask_minus])
                    and np.all(self.iso_plus[self.mask_plus]))

    @property
    def totally_non_minus(self) -> bool:
        """No defined point is − isotropically isothermic."""
        return not bool(np.any(self.iso_minus))

    @property
    def totally_non_plus(self) -> bool:
        """No defined point is + isotropically isothermic."""
        return not bool(np.any(self.iso_plus))

    @property
    def strongly_totally_non(self) -> bool:
        """Totally non isotropically isothermic for both signs."""
        return self.totally_non_minus and self.totally_non_plus

    def labels(self) -> np.ndarray:
        """Per-point label among ``strong``, ``iso-``, ``iso+``, ``non`` and ``masked``."""
        out = np.full(self.grid.shape, 'non', dtype=object)
        out = np.where(self.iso_minus, 'iso-', out)
        out = np.where(self.iso_plus, 'iso+', out)
        out = np.where(self.iso_minus & self.iso_plus, 'strong', out)
        return np.where(self.mask_minus | self.mask_plus, out, 'masked')


@dataclass(frozen=True)
class BonnetAnalyticData:
    """The complex functions h±, h±_z and A± = i(h±_z − |h±|²) on a grid."""

    grid: SampleGrid
    """Sample lattice."""

    sign: str
    """``+`` or ``-``."""

    h: np.ndarray
    """h± samples (NaN where masked)."""

    hz: np.ndarray
    """∂h±/∂z samples."""

    A: np.ndarray
    """A± samples."""

    mask: np.ndarray
    """Points where the data are defined."""

    scale: np.ndarray
    """Curvature magnitude scale."""

    @property
    def involutivity(self) -> float:
        """Largest |A±|/scale over the defined points."""
        values = np.abs(self.A[self.mask]) / self.scale[self.mask]
        return float(np.max(values)) if values.size else 0.0


@dataclass(frozen=True)
class IndexResult:
    """Index of Ω± at an isolated pseudo-umbilic point.

    _See Also_:
        [index][bonnetlab.mixedforms.index]
    """

    point: Tuple[float, float]
    """Centre of the loops."""

    sign: str
    """``+`` or ``-``."""

    radii: Tuple[float, ...]
    """Loop radii in parameter units, decreasing."""

    loop_integrals: Tuple[float, ...]
    """(1/2π)∮Ω± per radius."""

    extrapolated: float
    """Richardson limit r → 0."""

    vanishing_order_estimate: float
    """Log-log slope of ‖u ± J v‖ along rays."""

    @property
    def rounded(self) -> int:
        """Nearest integer to the extrapolated index."""
        return int(round(self.extrapolated))


@dataclass(frozen=True)
class FactorizationResult:
    """Factorization φ± = D± ξ± with ξ± = r(e3± ± i e4±) holomorphic."""

    grid: SampleGrid
    """Sample lattice."""

    sign: str
    """``+`` or ``-``."""

    log_r: np.ndarray
    """log r± integrated from the base point."""

    D: np.ndarray
    """D± = λ²‖u ± J v‖/(4 r±)."""

    closure_residual: float
    """Path dependence of the log r± integral."""

    holomorphy_residual: float
    """Largest |∂̄ log r ∓ i ω34±(∂̄)| on the grid."""


@dataclass(frozen=True)
class GlobalReport:
    """Integral and Ricci-like checks of one sign."""

    sign: str
    """``+`` or ``-``."""

    checks: Tuple[CheckResult, ...] = field(default_factory=tuple)
    """Individual checks."""

    indices: Tuple[IndexResult, ...] = field(default_factory=tuple)
    """Indices of the singular points used by the index theorem."""

    extras: Dict[str, float] = field(default_factory=dict)
    """Report-only values."""

    @property
    def passed(self) -> bool:
        """True when every check passes."""
        return all(check.passed for check in self.checks)


@dataclass(frozen=True)
class ConformalCurvatureField:
    """Curvature of the conformal metric (‖τ‖²/4B±²) ds² built from the Gauss-lift tension.

    _See Also_:
        [conformal_metric_curvature][bonnetlab.mixedforms.conformal_metric_curvature]
    """

    grid: SampleGrid
    """Sample lattice."""

    sign: str
    """``+`` or ``-``."""

    mu: np.ndarray
    """Conformal factor ‖τ‖²/(4B±²) (NaN where masked)."""

    curvature: np.ndarray
    """Gaussian curvature of μ ds² (NaN where undefined)."""

    deviation: float
    """Largest |K̃ + 1| over the defined points, NaN when τ vanishes identically."""

    @property
    def defined(self) -> bool:
        """False when the tension vanishes identically and the metric degenerates."""
        return bool(np.isfinite(self.deviation))
