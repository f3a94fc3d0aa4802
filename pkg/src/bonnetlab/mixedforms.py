"""Mixed connection forms Ω± = 2ω12 ± ω34± and everything computed from them.

The isotropic normal frame (e₃±, e₄±) aligns e₃± with u ± J v, so it is
defined away from the pseudo-umbilic set where B± = ‖u ± J v‖ vanishes. Grid
fields carry a mask that excludes those points and a few grid steps around
every isolated one.
"""

import functools
import logging
import math

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from numpy.lib.stride_tricks import sliding_window_view

from bonnetlab.config import (
    CHUNK_SIZE,
    CROSS_CHECK_TOLERANCE,
    DOMAIN_MARGIN,
    EPS_SCALE,
    H_CONN,
    H_OUTER,
    INDEX_RADII,
    INDEX_TOLERANCE,
    ISOTHERMIC_TOLERANCE,
    LATTICE_REFINEMENT,
    LOCAL_CHECK_POINTS,
    LOOP_NODES,
    MASK_RADIUS,
    MAX_SINGULAR_CANDIDATES,
    QUADRATURE_TOLERANCE,
    RICCI_TOLERANCE,
    SINGULAR_REFINE_TOLERANCE,
    STRUCTURE_TOLERANCE,
    VANISHING_RADII,
    VANISHING_RAYS,
)
from bonnetlab.dataobjects import CheckResult, SampleGrid
from bonnetlab.dataobjects.forms import (
    BonnetAnalyticData,
    ConformalCurvatureField,
    FactorizationResult,
    GlobalReport,
    IndexResult,
    IsothermicityMap,
    MixedFormField,
)
from bonnetlab.dataobjects.surface import AdaptedFrame, SurfaceChart
from bonnetlab.exception import (
    EmptyMask,
    LoopThroughSingularity,
    MaskViolation,
    NonIsothermalChart,
    NotCompactChart,
    NumericalError,
)
from bonnetlab.integrate import integrate_lattice, sample_lattice
from bonnetlab.invariants import (
    invariants_from_data,
    point_invariants,
    rot90,
    second_fundamental_from_jet,
)
from bonnetlab.surface import (
    FrameRule,
    coframe,
    connection_sample,
    eval_jet,
    frame_from_jet,
    metric,
    second_fundamental_ambient,
)
from bonnetlab.utils import (
    chunked,
    finite_max,
    grid_derivative,
    parallel_map,
    sign_value,
    stencil_derivatives,
    unwrap_rows,
)

_logger = logging.getLogger(__name__)

GLOBAL_CHECKS: Tuple[str, ...] = ('gauss_bonnet', 'normal_euler', 'index_theorem', 'index_sum')
"""Checks that integrate over a closed surface."""

LOCAL_CHECKS: Tuple[str, ...] = ('structure_equation', 'ricci_like', 'chern_forms')
"""Checks evaluated pointwise on mask-true grid points."""

PointFunction = Callable[[np.ndarray, np.ndarray], Dict[str, np.ndarray]]


def rotate_normal_frame(frame: AdaptedFrame, cos: np.ndarray, sin: np.ndarray) -> AdaptedFrame:
    """Rotate (e3, e4) so that the new e3 is cos·e3 + sin·e4."""
    c = np.asarray(cos)[..., None]
    s = np.asarray(sin)[..., None]
    return AdaptedFrame(frame.e1, frame.e2, c * frame.e3 + s * frame.e4,
                        -s * frame.e3 + c * frame.e4, frame.lam)


def isotropic_rule(sign: str) -> FrameRule:
    """Frame rule with the adapted tangent frame and the normal frame (e₃±, e₄±).

    e₃± = (u ± J v)/B± does not depend on the normal gauge it is computed
    in, so the rule is a smooth frame field wherever B± > 0.

    Args:
        sign: ``+`` or ``-``.

    Returns:
        A [FrameRule][bonnetlab.surface.FrameRule] raising MaskViolation
        where B± falls below the pseudo-umbilic threshold.
    """
    s = sign_value(sign)

    def rule(chart: SurfaceChart, u, v, reference: Optional[AdaptedFrame] = None):
        jet = eval_jet(chart, u, v)
        frame = frame_from_jet(chart, jet, None if reference is None else reference.e3)
        data = second_fundamental_from_jet(jet, frame)
        n = data.u_vec + s * rot90(data.v_vec)
        norm = np.linalg.norm(n, axis=-1)
        if np.any(~(norm > EPS_SCALE * np.maximum(1.0, data.norm))):
            raise MaskViolation(f'e3{sign} is undefined at a pseudo-umbilic point of {chart.name}',
                                'isotropic_rule')
        return rotate_normal_frame(frame, n[..., 0] / norm, n[..., 1] / norm)

    return rule


def mixed_form_values(chart: SurfaceChart, u, v, sign: str) -> Dict[str, np.ndarray]:
    """Pointwise samples of Ω± and its ingredients.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        sign: ``+`` or ``-``.

    Returns:
        Dict with ``omega``, ``omega12``, ``omega34`` (values on e1, e2),
        ``coframe``, ``angle`` (of e₃± in the adapted normal frame), ``B``,
        ``scale``, ``K`` and ``K_N``.

    Raises:
        MaskViolation: If B± vanishes at a stencil point.
    """
    s = sign_value(sign)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    conn = connection_sample(chart, u, v, isotropic_rule(sign))
    jet = eval_jet(chart, u, v)
    inv = invariants_from_data(second_fundamental_from_jet(jet, frame_from_jet(chart, jet)),
                               chart.ambient_c)
    n = inv.data.u_vec + s * rot90(inv.data.v_vec)
    return {
        'omega': 2.0 * conn.omega12 + s * conn.omega34,
        'omega12': conn.omega12,
        'omega34': conn.omega34,
        'coframe': conn.coframe,
        'angle': np.arctan2(n[..., 1], n[..., 0]),
        'B': inv.B_plus if s > 0 else inv.B_minus,
        'scale': inv.scale,
        'K': inv.K,
        'K_N': inv.K_N,
    }


def find_singular_points(chart: SurfaceChart, grid: SampleGrid, sign: str,
                         B: Optional[np.ndarray] = None,
                         scale: Optional[np.ndarray] = None) -> Tuple[Tuple[float, float], ...]:
    """Locate isolated zeros of B± on a grid.

    Strict local minima of B± over the 3x3 neighbourhoods of the grid, plus
    the chart's known seeds, are refined by nonlinear least squares on the
    normal vector u ± J v. A refined point is accepted when ‖u ± J v‖ falls
    below the refinement tolerance times the curvature scale.

    Args:
        chart: Chart to search.
        grid: Sample grid.
        sign: ``+`` or ``-``.
        B: Precomputed B± on the grid.
        scale: Precomputed curvature scale on the grid.

    Returns:
        Refined points, without duplicates.
    """
    s = sign_value(sign)
    if B is None or scale is None:
        uu, vv = grid.mesh()
        inv = point_invariants(chart, uu, vv, hopf=False)
        B = inv.B_plus if s > 0 else inv.B_minus
    candidates = list(chart.singular_seeds) + _grid_minima(grid, B)
    found: List[Tuple[float, float]] = []
    for candidate in candidates:
        point = _refine_singular(chart, candidate, s)
        if point is None:
            continue
        if any(_parameter_distance(chart, point, other) < 0.5 * min(grid.du, grid.dv)
               for other in found):
            continue
        found.append(point)
    _logger.debug('%d pseudo-umbilic points of sign %s on %s (%d candidates)', len(found), sign,
                  chart.name, len(candidates))
    return tuple(found)


def _pad(values: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    width = [(0, 0)] * values.ndim
    width[axis] = (1, 1)
    if periodic:
        return np.pad(values, width, mode='wrap')
    return np.pad(values, width, mode='constant', constant_values=np.inf)


def _grid_minima(grid: SampleGrid, B: np.ndarray) -> List[Tuple[float, float]]:
    values = np.where(np.isfinite(B), B, np.inf)
    padded = _pad(_pad(values, 0, grid.periodic_u), 1, grid.periodic_v)
    windows = sliding_window_view(padded, (3, 3)).reshape(values.shape + (9,))
    others = np.delete(windows, 4, axis=-1)
    strict = np.all(values[..., None] < others, axis=-1) & np.isfinite(values)
    iu, iv = np.nonzero(strict)
    order = np.argsort(values[iu, iv], kind='stable')[:MAX_SINGULAR_CANDIDATES]
    return [(float(grid.u[iu[k]]), float(grid.v[iv[k]])) for k in order]


def _refine_singular(chart: SurfaceChart, candidate: Sequence[float],
                     s: float) -> Optional[Tuple[float, float]]:
    u0, u1, v0, v1 = chart.domain
    lower = [-np.inf if chart.periodic_u else u0 - DOMAIN_MARGIN,
             -np.inf if chart.periodic_v else v0 - DOMAIN_MARGIN]
    upper = [np.inf if chart.periodic_u else u1 + DOMAIN_MARGIN,
             np.inf if chart.periodic_v else v1 + DOMAIN_MARGIN]
    x0 = np.clip(np.asarray(candidate, dtype=float), lower, upper)
    try:
        seed = frame_from_jet(chart, eval_jet(chart, x0[0], x0[1])).e3

        def residual(x: np.ndarray) -> np.ndarray:
            jet = eval_jet(chart, x[0], x[1])
            data = second_fundamental_from_jet(jet, frame_from_jet(chart, jet, seed))
            return data.u_vec + s * rot90(data.v_vec)

        solution = scipy.optimize.least_squares(residual, x0, bounds=(lower, upper),
                                                xtol=1e-12, ftol=1e-12, gtol=1e-12,
                                                max_nfev=200)
        jet = eval_jet(chart, solution.x[0], solution.x[1])
        data = second_fundamental_from_jet(jet, frame_from_jet(chart, jet, seed))
    except NumericalError as error:
        _logger.debug('refinement from %s abandoned: %s', tuple(candidate), error.message)
        return None
    size = float(np.linalg.norm(data.u_vec + s * rot90(data.v_vec)))
    if size >= SINGULAR_REFINE_TOLERANCE * max(1.0, float(data.norm)):
        return None
    u, v = (float(x) for x in solution.x)
    if chart.periodic_u:
        u = u0 + (u - u0) % (u1 - u0)
    elif not u0 <= u <= u1:
        return None
    if chart.periodic_v:
        v = v0 + (v - v0) % (v1 - v0)
    elif not v0 <= v <= v1:
        return None
    return (u, v)


def _axis_offset(delta: np.ndarray, period: float, periodic: bool) -> np.ndarray:
    if periodic:
        delta = (delta + 0.5 * period) % period - 0.5 * period
    return np.abs(delta)


def _parameter_distance(chart: SurfaceChart, p: Sequence[float], q: Sequence[float]) -> float:
    u0, u1, v0, v1 = chart.domain
    du = _axis_offset(np.asarray(p[0] - q[0]), u1 - u0, chart.periodic_u)
    dv = _axis_offset(np.asarray(p[1] - q[1]), v1 - v0, chart.periodic_v)
    return float(np.hypot(du, dv))


def _away_from(grid: SampleGrid, points: Sequence[Tuple[float, float]],
               radius: float = MASK_RADIUS) -> np.ndarray:
    uu, vv = grid.mesh()
    u0, u1, v0, v1 = grid.domain
    keep = np.ones(grid.shape, dtype=bool)
    for pu, pv in points:
        di = _axis_offset(uu - pu, u1 - u0, grid.periodic_u) / grid.du
        dj = _axis_offset(vv - pv, v1 - v0, grid.periodic_v) / grid.dv
        keep &= np.hypot(di, dj) > radius
    return keep


def _guarded(fn: PointFunction, u: np.ndarray, v: np.ndarray) -> Dict[str, np.ndarray]:
    try:
        out = dict(fn(u, v))
        out['ok'] = np.ones(u.shape, dtype=bool)
        return out
    except MaskViolation:
        if u.size == 1:
            return {'ok': np.zeros(1, dtype=bool)}
        mid = u.size // 2
        return _merge(_guarded(fn, u[:mid], v[:mid]), _guarded(fn, u[mid:], v[mid:]))


def _merge(a: Dict[str, np.ndarray], b: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    out = {'ok': np.concatenate([a['ok'], b['ok']])}
    for key in (set(a) | set(b)) - {'ok'}:
        template = a[key] if key in a else b[key]
        parts = [part[key] if key in part else
                 np.full((part['ok'].size,) + template.shape[1:], np.nan, dtype=template.dtype)
                 for part in (a, b)]
        out[key] = np.concatenate(parts)
    return out


def evaluate_guarded(fn: PointFunction, u: np.ndarray, v: np.ndarray,
                     threads: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Evaluate a pointwise function on flat points, isolating points that raise MaskViolation.

    Returns:
        The function's arrays (NaN rows at failed points) plus a boolean ``ok``.
    """
    bounds = [(i, min(i + CHUNK_SIZE, u.size)) for i in range(0, u.size, CHUNK_SIZE)]
    parts = parallel_map(lambda b: _guarded(fn, u[b[0]:b[1]], v[b[0]:b[1]]), bounds, threads)
    return functools.reduce(_merge, parts)


def _scatter(mask: np.ndarray, values: np.ndarray, dtype=float) -> np.ndarray:
    out = np.full(mask.shape + values.shape[1:], np.nan, dtype=dtype)
    out[mask] = values
    return out


def mixed_form_field(chart: SurfaceChart, grid: SampleGrid, sign: str,
                     threads: Optional[int] = None) -> MixedFormField:
    """Sample Ω± over a grid.

    Args:
        chart: Chart to sample.
        grid: Sample grid.
        sign: ``+`` or ``-``.
        threads: Worker cap.

    Returns:
        The mixed form with its mask and the ingredients it was built from.

    Raises:
        EmptyMask: If B± vanishes on the whole grid (superconformal of that sign).
    """
    s = sign_value(sign)
    uu, vv = grid.mesh()
    jet = eval_jet(chart, uu, vv)
    adapted = frame_from_jet(chart, jet)
    inv = invariants_from_data(second_fundamental_from_jet(jet, adapted), chart.ambient_c,
                               adapted.lam)
    B = inv.B_plus if s > 0 else inv.B_minus
    defined = B > EPS_SCALE * inv.scale
    if not np.any(defined):
        raise EmptyMask(f'B{sign} vanishes on the whole grid of {chart.name}',
                        'mixed_form_field')
    singular = find_singular_points(chart, grid, sign, B, inv.scale)
    mask = defined & _away_from(grid, singular)
    if np.any(mask):
        samples = evaluate_guarded(lambda a, b: mixed_form_values(chart, a, b, sign),
                                   uu[mask], vv[mask], threads)
        mask[mask] = samples['ok']
    if not np.any(mask):
        raise EmptyMask(f'no grid point of {chart.name} is away from B{sign} zeros',
                        'mixed_form_field')
    keep = samples['ok']
    n = inv.data.u_vec + s * rot90(inv.data.v_vec)
    angle = unwrap_rows(np.arctan2(n[..., 1], n[..., 0]))
    _logger.debug('Ω%s on %s: %d of %d grid points unmasked', sign, chart.name,
                  int(mask.sum()), mask.size)
    return MixedFormField(
        grid=grid,
        sign=sign,
        omega=_scatter(mask, samples['omega'][keep]),
        omega12=_scatter(mask, samples['omega12'][keep]),
        omega34=_scatter(mask, samples['omega34'][keep]),
        coframe=coframe(jet, adapted),
        e3_angle=np.where(mask, angle, np.nan),
        B=B,
        scale=inv.scale,
        mask=mask,
        K=inv.K,
        K_N=inv.K_N,
        singular_points=singular,
        lam=adapted.lam,
    )


def _inverse2(m: np.ndarray) -> np.ndarray:
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    inv = np.stack([np.stack([m[..., 1, 1], -m[..., 0, 1]], axis=-1),
                    np.stack([-m[..., 1, 0], m[..., 0, 0]], axis=-1)], axis=-2)
    return inv / det[..., None, None]


def hodge_star(values: np.ndarray) -> np.ndarray:
    """⋆ of a 1-form given on (e1, e2): ⋆ω1 = ω2, ⋆ω2 = −ω1."""
    return np.stack([-values[..., 1], values[..., 0]], axis=-1)


def costar_derivative(field: MixedFormField, values: Optional[np.ndarray] = None) -> np.ndarray:
    """d⋆ of a sampled 1-form, evaluated on (e1, e2).

    For Ω = a ω1 + b ω2 this is e1(a) + e2(b) − b ω12(e1) + a ω12(e2), with
    the frame derivatives taken from grid differences.

    Args:
        field: Field providing the grid, coframe and ω12.
        values: One-form samples on (e1, e2); Ω± of the field when omitted.

    Returns:
        Scalar samples, NaN wherever the stencil touches a masked point.
    """
    omega = field.omega if values is None else values
    grid = field.grid
    a, b = omega[..., 0], omega[..., 1]
    c = _inverse2(field.coframe)
    da = [grid_derivative(a, grid.du, 0, grid.periodic_u),
          grid_derivative(a, grid.dv, 1, grid.periodic_v)]
    db = [grid_derivative(b, grid.du, 0, grid.periodic_u),
          grid_derivative(b, grid.dv, 1, grid.periodic_v)]
    e1a = c[..., 0, 0] * da[0] + c[..., 0, 1] * da[1]
    e2b = c[..., 1, 0] * db[0] + c[..., 1, 1] * db[1]
    return e1a + e2b - b * field.omega12[..., 0] + a * field.omega12[..., 1]


def exterior_derivative(field: MixedFormField, values: Optional[np.ndarray] = None) -> np.ndarray:
    """d of a sampled 1-form, evaluated on (e1, e2), from grid differences."""
    omega = field.omega if values is None else values
    grid = field.grid
    coords = np.einsum('...wj,...j->...w', field.coframe, omega)
    curl = (grid_derivative(coords[..., 1], grid.du, 0, grid.periodic_u)
            - grid_derivative(coords[..., 0], grid.dv, 1, grid.periodic_v))
    return curl / field.area_element


def structure_defect(chart: SurfaceChart, u, v, sign: str,
                     step: float = H_OUTER) -> Tuple[np.ndarray, np.ndarray]:
    """Pointwise dΩ±(e1, e2) + 2K ± K_N by nested stencils.

    Returns:
        The defect and the curvature scale at every point.
    """
    s = sign_value(sign)

    def coords(uu, vv):
        values = mixed_form_values(chart, uu, vv, sign)
        return np.einsum('...wj,...j->...w', values['coframe'], values['omega'])

    d = stencil_derivatives(coords, u, v, step)
    centre = mixed_form_values(chart, u, v, sign)
    area = np.linalg.det(centre['coframe'])
    d_omega = (d[..., 0, 1] - d[..., 1, 0]) / area
    return d_omega + 2.0 * centre['K'] + s * centre['K_N'], centre['scale']


def hopf_connection(chart: SurfaceChart, u, v, sign: str, step: float = H_CONN) -> np.ndarray:
    """h± = ∂̄ log(λ² B±) ∓ i ω34±(∂̄), the coefficient in ∇⊥_∂̄ φ± = h± φ±.

    Raises:
        NonIsothermalChart: On general charts.
        MaskViolation: Where B± vanishes at a stencil point.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'h{sign} needs an isothermal chart, {chart.name} is not',
                                 'analytic_data')
    s = sign_value(sign)

    def log_density(uu, vv):
        inv = point_invariants(chart, uu, vv)
        B = inv.B_plus if s > 0 else inv.B_minus
        return np.log(inv.lam ** 2 * B)

    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = stencil_derivatives(log_density, u, v, step)
    conn = connection_sample(chart, u, v, isotropic_rule(sign), step)
    w = np.einsum('...wj,...j->...w', conn.coframe, conn.omega34)
    d_bar = 0.5 * (d[..., 0] + 1j * d[..., 1])
    w_bar = 0.5 * (w[..., 0] + 1j * w[..., 1])
    return d_bar - s * 1j * w_bar


def hopf_connection_derivative(chart: SurfaceChart, u, v, sign: str,
                               step: float = H_OUTER) -> np.ndarray:
    """∂h±/∂z by an outer stencil around [hopf_connection][bonnetlab.mixedforms.hopf_connection]."""
    d = stencil_derivatives(lambda a, b: hopf_connection(chart, a, b, sign), u, v, step)
    return 0.5 * (d[..., 0] - 1j * d[..., 1])


def analytic_data(chart: SurfaceChart, grid: SampleGrid, sign: str,
                  field: Optional[MixedFormField] = None,
                  threads: Optional[int] = None) -> BonnetAnalyticData:
    """h±, h±_z and A± = i(h±_z − |h±|²) on the mask-true points of a grid.

    Args:
        chart: Isothermal chart.
        grid: Sample grid.
        sign: ``+`` or ``-``.
        field: Mixed form field providing the mask; computed when omitted.
        threads: Worker cap.

    Returns:
        The analytic data, NaN where masked.

    Raises:
        NonIsothermalChart: On general charts.
        EmptyMask: If B± vanishes on the whole grid.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'h{sign} needs an isothermal chart, {chart.name} is not',
                                 'analytic_data')
    if field is None:
        field = mixed_form_field(chart, grid, sign, threads)
    uu, vv = grid.mesh()
    mask = field.mask.copy()

    def sample(a, b):
        return {'h': hopf_connection(chart, a, b, sign),
                'hz': hopf_connection_derivative(chart, a, b, sign)}

    values = evaluate_guarded(sample, uu[mask], vv[mask], threads)
    keep = values['ok']
    mask[mask] = keep
    h = _scatter(mask, values['h'][keep], complex)
    hz = _scatter(mask, values['hz'][keep], complex)
    A = 1j * (hz - np.abs(h) ** 2)
    data = BonnetAnalyticData(grid, sign, h, hz, A, mask, field.scale)
    _logger.debug('A%s on %s: sup |A|/scale = %.3e', sign, chart.name, data.involutivity)
    return data


def isothermicity_classify(chart: SurfaceChart, grid: SampleGrid,
                           eps: float = ISOTHERMIC_TOLERANCE, threads: Optional[int] = None,
                           cross_check: bool = True) -> IsothermicityMap:
    """Flag the grid points where Ω⁻ and Ω⁺ are co-closed.

    A sign whose mask is empty (superconformal of that sign) is reported as
    masked everywhere. On isothermal charts d⋆Ω± is compared against
    −(4/λ²) Im h±_z; the largest relative deviation lands in ``cross_check``.

    Args:
        chart: Chart to classify.
        grid: Sample grid.
        eps: Relative threshold on |d⋆Ω±|.
        threads: Worker cap.
        cross_check: Whether to run the h±_z comparison on isothermal charts.

    Returns:
        Per-point flags for both signs.
    """
    scale = point_invariants(chart, *grid.mesh(), hopf=False).scale
    threshold = eps * scale
    results = {}
    cross = {}
    for sign, name in (('-', 'minus'), ('+', 'plus')):
        try:
            field = mixed_form_field(chart, grid, sign, threads)
        except EmptyMask as error:
            _logger.info('%s: sign %s treated as masked', error.message, sign)
            results[sign] = (np.full(grid.shape, np.nan), np.zeros(grid.shape, dtype=bool))
            continue
        costar = costar_derivative(field)
        mask = field.mask & np.isfinite(costar)
        results[sign] = (costar, mask)
        if cross_check and chart.isothermal:
            data = analytic_data(chart, grid, sign, field, threads)
            predicted = -4.0 / field.lam ** 2 * data.hz.imag
            both = mask & data.mask
            deviation = finite_max((np.abs(costar - predicted) / scale ** 2)[both])
            cross[f'costar_{name}'] = deviation
            if deviation > CROSS_CHECK_TOLERANCE:
                _logger.warning('d⋆Ω%s deviates from −(4/λ²) Im h_z by %.3e on %s', sign,
                                deviation, chart.name)
    flags = {}
    for sign, (costar, mask) in results.items():
        magnitude = np.where(mask, np.abs(np.nan_to_num(costar, nan=np.inf)), np.inf)
        flags[sign] = mask & (magnitude < threshold)
    costar_minus, mask_minus = results['-']
    costar_plus, mask_plus = results['+']
    return IsothermicityMap(grid, costar_minus, costar_plus, flags['-'], flags['+'], mask_minus,
                            mask_plus, threshold, cross)


def index(chart: SurfaceChart, point: Sequence[float], sign: str,
          radii: Sequence[float] = INDEX_RADII, nodes: int = LOOP_NODES) -> IndexResult:
    """Index of Ω± at an isolated pseudo-umbilic point.

    Loop integrals (1/2π)∮Ω± over counterclockwise parameter circles are
    computed by the periodic trapezoid rule and extrapolated linearly in r²
    to r = 0. The vanishing order of B± is the mean log-log slope along
    rays.

    Args:
        chart: Chart containing the point.
        point: Loop centre (u, v).
        sign: ``+`` or ``-``.
        radii: Loop radii in parameter units.
        nodes: Trapezoid nodes per loop.

    Returns:
        The loop integrals, their limit and the vanishing order estimate.

    Raises:
        LoopThroughSingularity: If a loop meets a zero of B±.
    """
    s = sign_value(sign)
    centre = np.asarray(point, dtype=float)
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    radii = tuple(sorted((float(r) for r in radii), reverse=True))
    integrals = []
    for r in radii:
        u = centre[0] + r * np.cos(t)
        v = centre[1] + r * np.sin(t)
        inv = point_invariants(chart, u, v, hopf=False)
        B = inv.B_plus if s > 0 else inv.B_minus
        if np.any(~(B > EPS_SCALE * inv.scale)):
            raise LoopThroughSingularity(f'loop of radius {r} around {tuple(centre)} meets a '
                                         f'zero of B{sign}', 'index')
        try:
            values = mixed_form_values(chart, u, v, sign)
        except MaskViolation as error:
            raise LoopThroughSingularity(error.message, 'index') from error
        coords = np.einsum('...wj,...j->...w', values['coframe'], values['omega'])
        velocity = np.stack([-r * np.sin(t), r * np.cos(t)], axis=-1)
        total = np.sum(coords * velocity) * (2.0 * np.pi / nodes)
        integrals.append(float(total / (2.0 * np.pi)))
    if len(radii) > 1:
        extrapolated = float(np.polyfit(np.square(radii), integrals, 1)[1])
    else:
        extrapolated = integrals[0]
    order = _vanishing_order(chart, centre, s)
    _logger.debug('index of Ω%s at %s: %s -> %.6f (order %.3f)', sign, tuple(centre),
                  integrals, extrapolated, order)
    return IndexResult((float(centre[0]), float(centre[1])), sign, radii, tuple(integrals),
                       extrapolated, order)


def _vanishing_order(chart: SurfaceChart, centre: np.ndarray, s: float) -> float:
    angles = 2.0 * np.pi * np.arange(VANISHING_RAYS) / VANISHING_RAYS
    rs = np.geomspace(VANISHING_RADII[0], VANISHING_RADII[1], 6)
    u = centre[0] + rs[:, None] * np.cos(angles)
    v = centre[1] + rs[:, None] * np.sin(angles)
    inv = point_invariants(chart, u, v, hopf=False)
    B = inv.B_plus if s > 0 else inv.B_minus
    logs = np.log(np.maximum(B, np.finfo(float).tiny))
    slopes = [np.polyfit(np.log(rs), logs[:, k], 1)[0] for k in range(VANISHING_RAYS)]
    return float(np.mean(slopes))


def laplace_beltrami(chart: SurfaceChart, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                     u, v, inner: float = H_CONN, outer: float = H_OUTER) -> np.ndarray:
    """Δ_g of a pointwise scalar function, as the divergence of √g g⁻¹ ∇fn by nested stencils."""

    def density(uu, vv):
        g = metric(eval_jet(chart, uu, vv))
        return np.sqrt(np.linalg.det(g)), _inverse2(g)

    def flux(uu, vv):
        root, ginv = density(uu, vv)
        grad = stencil_derivatives(fn, uu, vv, inner)
        return root[..., None] * np.einsum('...wx,...x->...w', ginv, grad)

    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = stencil_derivatives(flux, u, v, outer)
    return (d[..., 0, 0] + d[..., 1, 1]) / density(u, v)[0]


def isotropic_mean_curvature(chart: SurfaceChart, u, v, sign: str) -> np.ndarray:
    """Components (H³, H⁴) of the mean curvature vector in the frame (e₃±, e₄±)."""
    frame = isotropic_rule(sign)(chart, u, v, None)
    jet = eval_jet(chart, u, v)
    alpha = second_fundamental_ambient(jet, frame.e1, frame.e2)
    H = 0.5 * (alpha[..., 0, 0, :] + alpha[..., 1, 1, :])
    return np.stack([np.sum(H * frame.e3, axis=-1), np.sum(H * frame.e4, axis=-1)], axis=-1)


def tension_norm2(chart: SurfaceChart, u, v, sign: str) -> np.ndarray:
    """‖τ‖² = 4((H³₁ ∓ H⁴₂)² + (H³₂ ± H⁴₁)²) of the Gauss lift of sign ±.

    H^a_j = e_j(H^a) + Σ_b H^b ω_ba(e_j) is the normal covariant derivative
    of H in the isotropic gauge.
    """
    s = sign_value(sign)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    grad = stencil_derivatives(lambda a, b: isotropic_mean_curvature(chart, a, b, sign), u, v,
                               H_CONN)
    conn = connection_sample(chart, u, v, isotropic_rule(sign))
    c = _inverse2(conn.coframe)
    along = np.einsum('...jw,...wa->...ja', c, grad)
    H = isotropic_mean_curvature(chart, u, v, sign)
    w34 = conn.omega34
    H3 = along[..., :, 0] - H[..., 1, None] * w34
    H4 = along[..., :, 1] + H[..., 0, None] * w34
    return 4.0 * ((H3[..., 0] - s * H4[..., 1]) ** 2 + (H3[..., 1] + s * H4[..., 0]) ** 2)


def ricci_like_terms(chart: SurfaceChart, u, v,
                     sign: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Both sides of Δ log B± − 2K ∓ K_N = ‖τ‖²/(4B±²).

    Returns:
        Left side, right side and the curvature scale.
    """
    s = sign_value(sign)

    def log_b(a, b):
        inv = point_invariants(chart, a, b, hopf=False)
        return np.log(inv.B_plus if s > 0 else inv.B_minus)

    lap = laplace_beltrami(chart, log_b, u, v)
    inv = point_invariants(chart, u, v, hopf=False)
    B = inv.B_plus if s > 0 else inv.B_minus
    lhs = lap - 2.0 * inv.K - s * inv.K_N
    rhs = tension_norm2(chart, u, v, sign) / (4.0 * B ** 2)
    return lhs, rhs, inv.scale


def chern_forms(chart: SurfaceChart, u, v, sign: str) -> Dict[str, np.ndarray]:
    """Chern-type forms a₁± = d log B± − ⋆Ω±, a₂± = ⋆a₁± and the terms they are compared with.

    Two-forms are evaluated on (e1, e2).

    Returns:
        Dict with ``da1``, ``da2``, ``wedge`` (a₁∧a₂), ``re_hz``, ``im_hz``
        and ``abs_h2`` (each of the last three times 4/λ²) and ``scale``.

    Raises:
        NonIsothermalChart: On general charts.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'chern forms need an isothermal chart, {chart.name} is not',
                                 'chern_forms')
    s = sign_value(sign)

    def log_b(a, b):
        inv = point_invariants(chart, a, b, hopf=False)
        return np.log(inv.B_plus if s > 0 else inv.B_minus)

    def a1(a, b):
        values = mixed_form_values(chart, a, b, sign)
        coords = np.einsum('...wj,...j->...w', values['coframe'], values['omega'])
        return stencil_derivatives(log_b, a, b, H_CONN) - np.stack(
            [-coords[..., 1], coords[..., 0]], axis=-1)

    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = stencil_derivatives(a1, u, v, H_OUTER)
    first = a1(u, v)
    inv = point_invariants(chart, u, v)
    lam2 = inv.lam ** 2
    h = hopf_connection(chart, u, v, sign)
    hz = hopf_connection_derivative(chart, u, v, sign)
    return {
        'da1': (d[..., 0, 1] - d[..., 1, 0]) / lam2,
        'da2': (d[..., 0, 0] + d[..., 1, 1]) / lam2,
        'wedge': (first[..., 0] ** 2 + first[..., 1] ** 2) / lam2,
        're_hz': 4.0 / lam2 * hz.real,
        'im_hz': 4.0 / lam2 * hz.imag,
        'abs_h2': 4.0 / lam2 * np.abs(h) ** 2,
        'scale': inv.scale,
    }


def _surface_integrals(chart: SurfaceChart, grid: SampleGrid) -> Tuple[float, float]:
    u0, u1, v0, v1 = chart.domain
    du = (u1 - u0) / grid.nu
    u = u0 + du * np.arange(grid.nu)
    if chart.periodic_v:
        dv = (v1 - v0) / grid.nv
        v = v0 + dv * np.arange(grid.nv)
        weights = np.full(grid.nv, du * dv)
    else:
        nodes, w = np.polynomial.legendre.leggauss(grid.nv)
        half = 0.5 * (v1 - v0)
        v = v0 + half * (nodes + 1.0)
        weights = du * half * w
    uu, vv = np.meshgrid(u, v, indexing='ij')
    jet = eval_jet(chart, uu, vv)
    area = np.sqrt(np.linalg.det(metric(jet)))
    inv = invariants_from_data(second_fundamental_from_jet(jet, frame_from_jet(chart, jet)),
                               chart.ambient_c)
    K_total = float(np.sum(inv.K * area * weights[None, :]))
    KN_total = float(np.sum(inv.K_N * area * weights[None, :]))
    return K_total, KN_total


def _check_points(field: MixedFormField,
                  limit: int = LOCAL_CHECK_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    uu, vv = field.grid.mesh()
    iu, iv = np.nonzero(field.mask)
    stride = max(1, math.ceil(iu.size / limit))
    return uu[iu[::stride], iv[::stride]], vv[iu[::stride], iv[::stride]]


def global_checks(chart: SurfaceChart, grid: SampleGrid, sign: str,
                  include: Optional[Sequence[str]] = None,
                  threads: Optional[int] = None) -> GlobalReport:
    """Integral identities and pointwise structure checks of one sign.

    Closed-surface checks (``gauss_bonnet``, ``normal_euler``,
    ``index_theorem``, ``index_sum``) need a compact chart with known Euler
    characteristic and normal Euler number; they are skipped on open
    patches unless requested explicitly. Local checks
    (``structure_equation``, ``ricci_like``, ``chern_forms``) run on a
    subsample of the mask-true grid points; ``chern_forms`` needs an
    isothermal chart.

    Args:
        chart: Chart to check.
        grid: Grid for quadrature and sample points.
        sign: ``+`` or ``-``.
        include: Checks to run; every applicable check when omitted.
        threads: Worker cap.

    Returns:
        The checks, the indices used by ``index_sum`` and report-only values.

    Raises:
        NotCompactChart: If a closed-surface check is requested on an open
            patch or on a chart without topology data.
    """
    s = sign_value(sign)
    if include is None:
        names = LOCAL_CHECKS + (GLOBAL_CHECKS if chart.compact else ())
    else:
        names = tuple(include)
    unknown = set(names) - set(GLOBAL_CHECKS) - set(LOCAL_CHECKS)
    if unknown:
        raise ValueError(f'unknown global checks: {sorted(unknown)}')
    checks: List[CheckResult] = []
    indices: Tuple[IndexResult, ...] = ()
    extras: Dict[str, float] = {}
    if any(name in GLOBAL_CHECKS for name in names):
        if not chart.compact:
            raise NotCompactChart(f'chart {chart.name} does not cover a closed surface',
                                  'global_checks')
        if chart.euler_characteristic is None or chart.normal_euler_number is None:
            raise NotCompactChart(f'chart {chart.name} carries no topology data', 'global_checks')
        chi, chi_n = chart.euler_characteristic, chart.normal_euler_number
        K_total, KN_total = _surface_integrals(chart, grid)

        def quadrature(name, value, target):
            tolerance = QUADRATURE_TOLERANCE * max(1.0, abs(target))
            checks.append(CheckResult.compare(name, value, target, tolerance))

        if 'gauss_bonnet' in names:
            quadrature('gauss_bonnet', K_total, 2.0 * np.pi * chi)
        if 'normal_euler' in names:
            quadrature('normal_euler', KN_total, 2.0 * np.pi * chi_n)
        if 'index_theorem' in names:
            quadrature('index_theorem', 2.0 * K_total + s * KN_total,
                       2.0 * np.pi * (2 * chi + s * chi_n))
        if 'index_sum' in names:
            indices = _singular_indices(chart, grid, sign)
            if indices is None:
                extras['index_sum_skipped'] = 1.0
                indices = ()
            else:
                total = sum(result.extrapolated for result in indices)
                checks.append(CheckResult.compare('index_sum', total, 2 * chi + s * chi_n,
                                                  INDEX_TOLERANCE))
    local = [name for name in names if name in LOCAL_CHECKS]
    if local:
        try:
            field = mixed_form_field(chart, grid, sign, threads)
        except EmptyMask as error:
            _logger.info('local checks skipped: %s', error.message)
            extras['local_checks_skipped'] = 1.0
            local = []
    if local:
        u, v = _check_points(field)
        if 'structure_equation' in local:
            values = chunked(lambda a, b: np.stack(structure_defect(chart, a, b, sign), -1),
                             u, v, threads=threads)
            checks.append(CheckResult.bound(
                'structure_equation', finite_max(np.abs(values[:, 0]) / values[:, 1] ** 2),
                STRUCTURE_TOLERANCE))
        if 'ricci_like' in local:
            values = chunked(lambda a, b: np.stack(ricci_like_terms(chart, a, b, sign), -1),
                             u, v, threads=threads)
            residual = np.abs(values[:, 0] - values[:, 1]) / values[:, 2] ** 2
            checks.append(CheckResult.bound('ricci_like', finite_max(residual), RICCI_TOLERANCE))
            extras['ricci_rhs_max'] = finite_max(values[:, 1])
        if 'chern_forms' in local and chart.isothermal:
            values = chunked(lambda a, b: chern_forms(chart, a, b, sign), u, v, threads=threads)
            scale2 = values['scale'] ** 2
            checks.append(CheckResult.bound(
                'chern_d_star_a1', finite_max(np.abs(values['da2'] - values['re_hz']) / scale2),
                STRUCTURE_TOLERANCE))
            checks.append(CheckResult.bound(
                'chern_wedge', finite_max(np.abs(values['wedge'] - values['abs_h2']) / scale2),
                STRUCTURE_TOLERANCE))
            extras['chern_da1'] = finite_max(np.abs(values['da1']))
            extras['chern_da2_minus_wedge'] = finite_max(np.abs(values['da2'] - values['wedge']))
    report = GlobalReport(sign, tuple(checks), indices, extras)
    for check in report.checks:
        _logger.info('%s (%s) on %s: value %.6g target %.6g -> %s', check.name, sign, chart.name,
                     check.value, check.target, 'pass' if check.passed else 'FAIL')
    return report


def _singular_indices(chart: SurfaceChart, grid: SampleGrid,
                      sign: str) -> Optional[Tuple[IndexResult, ...]]:
    s = sign_value(sign)
    uu, vv = grid.mesh()
    inv = point_invariants(chart, uu, vv, hopf=False)
    B = inv.B_plus if s > 0 else inv.B_minus
    if not np.any(B > EPS_SCALE * inv.scale):
        _logger.info('index sum skipped: B%s vanishes on %s', sign, chart.name)
        return None
    points = find_singular_points(chart, grid, sign, B, inv.scale)
    return tuple(index(chart, point, sign) for point in points)


def factorization(chart: SurfaceChart, grid: SampleGrid, sign: str,
                  refinement: int = LATTICE_REFINEMENT,
                  threads: Optional[int] = None) -> FactorizationResult:
    """Factor φ± = D± ξ± with ξ± = r (e₃± ± i e₄±) holomorphic.

    log r solves d log r = ±⋆ω34± and is path-integrated from the grid
    centre; it exists exactly where Ω± is co-closed.

    Raises:
        NonIsothermalChart: On general charts.
        MaskViolation: If B± vanishes at a lattice node.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'factorization needs an isothermal chart, {chart.name} is not',
                                 'factorization')
    s = sign_value(sign)

    def omega34(a, b):
        values = mixed_form_values(chart, a, b, sign)
        return np.einsum('...wj,...j->...w', values['coframe'], values['omega34'])

    w = sample_lattice(omega34, grid, refinement, threads)
    slope = np.stack([-s * w[..., 1], s * w[..., 0]], axis=-1)

    def rhs(axis, iu, iv, state):
        return slope[iu, iv, axis][:, None]

    solution = integrate_lattice(rhs, [0.0], grid, refinement)
    log_r = solution.values[..., 0]
    nodes = w[::refinement, ::refinement]
    inv = point_invariants(chart, *grid.mesh())
    B = inv.B_plus if s > 0 else inv.B_minus
    D = inv.lam ** 2 * B / (4.0 * np.exp(log_r))
    d_bar = 0.5 * (grid_derivative(log_r, grid.du, 0, False)
                   + 1j * grid_derivative(log_r, grid.dv, 1, False))
    w_bar = 0.5 * (nodes[..., 0] + 1j * nodes[..., 1])
    residual = finite_max(np.abs(d_bar - s * 1j * w_bar).ravel())
    _logger.debug('factorization of φ%s on %s: closure %.3e, ∂̄ residual %.3e', sign, chart.name,
                  solution.closure_residual, residual)
    return FactorizationResult(grid, sign, log_r, D, solution.closure_residual, residual)


def conformal_metric_curvature(chart: SurfaceChart, grid: SampleGrid, sign: str,
                               threads: Optional[int] = None) -> ConformalCurvatureField:
    """Gaussian curvature of μ ds² with μ = ‖τ‖²/(4B±²), compared with −1.

    K̃ = (K − ½ Δ log μ)/μ with Δ from grid differences. When τ vanishes
    identically the metric degenerates and the deviation is NaN.
    """
    s = sign_value(sign)
    field = mixed_form_field(chart, grid, sign, threads)
    uu, vv = grid.mesh()
    tension = chunked(lambda a, b: tension_norm2(chart, a, b, sign), uu[field.mask],
                      vv[field.mask], threads=threads)
    mu = _scatter(field.mask, tension / (4.0 * field.B[field.mask] ** 2))
    if finite_max(mu) <= EPS_SCALE:
        _logger.info('Gauss lift of sign %s on %s has no vertical tension', sign, chart.name)
        return ConformalCurvatureField(grid, sign, mu, np.full(grid.shape, np.nan), math.nan)
    log_mu = np.log(np.where(mu > 0, mu, np.nan))
    g = metric(eval_jet(chart, uu, vv))
    root = np.sqrt(np.linalg.det(g))
    ginv = _inverse2(g)
    grad = np.stack([grid_derivative(log_mu, grid.du, 0, grid.periodic_u),
                     grid_derivative(log_mu, grid.dv, 1, grid.periodic_v)], axis=-1)
    flux = root[..., None] * np.einsum('...wx,...x->...w', ginv, grad)
    lap = (grid_derivative(flux[..., 0], grid.du, 0, grid.periodic_u)
           + grid_derivative(flux[..., 1], grid.dv, 1, grid.periodic_v)) / root
    curvature = (field.K - 0.5 * lap) / mu
    deviation = finite_max(np.abs(curvature + 1.0).ravel())
    _logger.debug('conformal metric of sign %s on %s: sup |K + 1| = %.3e', s, chart.name,
                  deviation)
    return ConformalCurvatureField(grid, sign, mu, curvature, deviation)
