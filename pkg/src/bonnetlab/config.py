"""bonnetlab numeric defaults.

Every tolerance used by the library is declared here. Run configurations may
override the tolerances (see [RunConfig][bonnetlab.dataobjects.run.RunConfig]);
the lower-case constant name is the override key.
"""

import math

from typing import Final, Tuple

EPS_SCALE: Final = 1e-6
"""Relative threshold below which B± or ‖H‖ count as zero."""

ISOTHERMIC_TOLERANCE: Final = 1e-4
"""Relative bound on |d⋆Ω±| for a point to count as isotropically isothermic."""

INVOLUTIVITY_TOLERANCE: Final = 1e-4
"""Relative bound on |A±| below which the θ± system is treated as integrable."""

COMPATIBILITY_TOLERANCE: Final = 1e-5
"""Bound on Gauss/Ricci residuals of mate data accepted by reconstruction."""

CLOSURE_TOLERANCE: Final = 1e-4
"""Path-dependence above which a lattice integral is considered non-integrable."""

RANGE_TOLERANCE: Final = 1e-6
"""Slack allowed when checking that a solved θ stays inside [0, 2π]."""

FRAME_TOLERANCE: Final = 1e-6
"""Orthonormality defect that signals a frame blow-up during integration."""

ISOTHERMAL_TOLERANCE: Final = 1e-8
"""Relative conformality defect tolerated on charts flagged isothermal."""

H_FD_SCALE: Final = 1e-5
"""Jet finite-difference step for value-only charts, relative to the domain diameter."""

H_FD_ORDER_FACTORS: Final[Tuple[float, float, float]] = (1.0, 10.0, 50.0)
"""Step multipliers for first, second and third FD derivatives of value-only charts."""

H_CONN: Final = 1e-3
"""Stencil step used to differentiate frame fields (connection forms)."""

H_OUTER: Final = 1e-2
"""Stencil step for derivatives of quantities that are themselves FD results."""

DOMAIN_MARGIN: Final = 5e-2
"""How far (parameter units) stencils may overhang a non-periodic domain."""

DEGENERACY_TOLERANCE: Final = 1e-10
"""Relative area element below which the immersion is rejected."""

FRAME_SEED_ANGLE: Final = 0.2
"""Minimal angle (radians) between a seed axis and the tangent plane."""

MASK_RADIUS: Final = 3
"""Radius, in grid steps, masked around detected pseudo-umbilic points."""

SINGULAR_REFINE_TOLERANCE: Final = 1e-8
"""Relative size of u ± Jv accepted after refining a pseudo-umbilic point."""

MAX_SINGULAR_CANDIDATES: Final = 64
"""Upper bound on grid minima refined when searching for pseudo-umbilic points."""

LOOP_NODES: Final = 512
"""Trapezoid nodes on each index loop."""

INDEX_RADII: Final[Tuple[float, ...]] = (0.2, 0.1, 0.05)
"""Default loop radii (parameter units) for index extrapolation."""

VANISHING_RAYS: Final = 8
"""Number of rays used to estimate vanishing orders."""

VANISHING_RADII: Final[Tuple[float, float]] = (1e-3, 1e-2)
"""Radial range of the vanishing-order regression."""

LATTICE_REFINEMENT: Final = 4
"""Lattice points per grid step used by path integrals (even)."""

MATE_PACK: Final = 16
"""Bonnet mates marched together in one lattice integration."""

NONTRIVIALITY_THRESHOLD: Final = 1e-2
"""Relative misfit of 𝒯 against C·f + v above which a bending field is nontrivial."""

DEFORMATION_T_VALUES: Final[Tuple[float, ...]] = (1e-2, 1e-3)
"""Deformation parameters used by the O(t²) ratio tests."""

QUADRATIC_RATIO_WINDOW: Final[Tuple[float, float]] = (80.0, 120.0)
"""Accepted deviation ratio for a 10x change of t when the deviation is O(t²)."""

LINEAR_RATIO_WINDOW: Final[Tuple[float, float]] = (8.0, 12.0)
"""Accepted deviation ratio for a 10x change of t when the deviation is O(t)."""

CONGRUENCE_RESIDUAL: Final = 1e-3
"""Procrustes residual, relative to the diameter, separating congruent surfaces."""

DISTORTION_THRESHOLD: Final = 1e-3
"""Relative sup-norm of Q above which a mate counts as distorted."""

CURVE_STEPS: Final = 4096
"""RK4 nodes used to tabulate curves given by their curvature."""

MIN_GRID: Final = 16
"""Smallest grid accepted per axis."""

DEFAULT_GRID: Final = 64
"""Default grid size per axis."""

REPORT_DOWNSAMPLE: Final = 16
"""Maximal number of samples per axis written for grids in the JSON report."""

THREADS_ENVVAR: Final = 'BONNETLAB_THREADS'
"""Environment variable capping worker threads."""

CHUNK_SIZE: Final = 8192
"""Points evaluated per vectorized batch."""

FRAME_DRIFT_LIMIT: Final = 1e-3
"""Orthonormality defect of a reconstructed frame before polar projection that aborts a march."""

QUADRATURE_TOLERANCE: Final = 1e-8
"""Relative accuracy demanded of closed-surface curvature integrals."""

INDEX_TOLERANCE: Final = 0.05
"""Accepted error of an index sum against 2χ ± χ_N."""

STRUCTURE_TOLERANCE: Final = 1e-4
"""Relative bound on dΩ± + (2K ± K_N) dM and on the Chern-form identities."""

RICCI_TOLERANCE: Final = 1e-4
"""Relative bound on the Ricci-like residual Δ log B± − 2K ∓ K_N − ‖τ‖²/4B²."""

CROSS_CHECK_TOLERANCE: Final = 1e-5
"""Relative agreement expected between d⋆Ω± and −(4/λ²) Im h±_z."""

LOCAL_CHECK_POINTS: Final = 1024
"""Upper bound on grid points visited by pointwise local checks."""

FUNDAMENTAL_TOLERANCE: Final = 1e-4
"""Relative bound on fundamental-system and bending residuals of a variation."""

SUPERCONFORMAL_TOLERANCE: Final = 1e-3
"""Bound on the first variation of the Gauss-lift conformality functional, relative to max(1, G)."""

DEVIATION_FLOOR: Final = 1e-13
"""Deviations below this count as exactly zero in ratio tests."""

FACT_TOLERANCE: Final = 1e-9
"""Bound on pointwise identities certified for analytic-jet zoo charts."""

COCLOSED_TOLERANCE: Final = 1e-5
"""Bound on |d⋆Ω±| / scale² certifying strong isotropic isothermicity."""

HOLOMORPHY_TOLERANCE: Final = 1e-5
"""Bound on finite-difference residuals of certified facts (∂̄φ±, ∇⊥H) relative to the scale."""

MATE_TOLERANCE: Final = 1e-4
"""Bound on the relative metric, ‖H‖ and K_N errors of a reconstructed Bonnet mate."""

IDENTITY_TOLERANCE: Final = 1e-5
"""Alignment residual, relative to the diameter, of the θ ≡ 0 mate against its source."""

MATE_THETAS: Final[Tuple[float, ...]] = tuple(2.0 * math.pi * k / 8 for k in range(8))
"""Default θ₀ samples of a mate family (8 points on the circle)."""

RUN_COMMANDS: Final[Tuple[str, ...]] = (
    'analyze', 'classify', 'lines', 'index', 'global-checks', 'mates', 'deform', 'verify'
)
"""Commands a run configuration may list."""

TOLERANCE_KEYS: Final[Tuple[str, ...]] = (
    'eps_scale', 'isothermic_tolerance', 'quadrature_tolerance', 'index_tolerance',
    'structure_tolerance', 'ricci_tolerance', 'fact_tolerance', 'coclosed_tolerance',
    'holomorphy_tolerance', 'fundamental_tolerance', 'nontriviality_threshold',
    'superconformal_tolerance', 'mate_tolerance', 'identity_tolerance', 'congruence_residual',
    'closure_tolerance'
)
"""Constants a run configuration may override, by lower-case name."""
