"""Pointwise second-order invariants, point classification and curvature lines.

Normal vectors are handled through their components in the normal frame
(e3, e4); J denotes the rotation (x3, x4) ↦ (−x4, x3) of the oriented normal
plane.
"""

import logging

from typing import Dict, List, Optional, Tuple

import numpy as np

from bonnetlab.config import EPS_SCALE, H_CONN
from bonnetlab.dataobjects import SampleGrid
from bonnetlab.dataobjects.invariants import (
    CurvatureDirections,
    PointClass,
    PointInvariants,
    PointTag,
    SecondFundamentalData,
)
from bonnetlab.dataobjects.surface import AdaptedFrame, Jet3, SurfaceChart
from bonnetlab.exception import MaskViolation, NonIsothermalChart, UndefinedDirections
from bonnetlab.surface import (
    adapted_rule,
    axis_seed,
    connection_sample,
    eval_jet,
    frame_from_jet,
    frame_from_normal,
    reduce_point,
    second_fundamental_ambient,
    tangent_coefficients,
    tangent_frame,
)
from bonnetlab.utils import stencil_derivatives

_logger = logging.getLogger(__name__)


def rot90(x: np.ndarray) -> np.ndarray:
    """Apply J to normal components."""
    return np.stack([-x[..., 1], x[..., 0]], axis=-1)


def second_fundamental_from_jet(jet: Jet3, frame: AdaptedFrame) -> SecondFundamentalData:
    """Normal components of α in the given frame."""
    alpha = second_fundamental_ambient(jet, frame.e1, frame.e2)
    normals = np.stack([frame.e3, frame.e4], axis=-1)[..., None, None, :, :]
    comps = (alpha[..., None, :] @ normals)[..., 0, :]
    return SecondFundamentalData(comps[..., 0, 0, :], comps[..., 0, 1, :], comps[..., 1, 1, :])


def second_fundamental(chart: SurfaceChart, u, v,
                       frame: Optional[AdaptedFrame] = None) -> SecondFundamentalData:
    """Second fundamental form at sample points.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        frame: Frame to express α in; the adapted frame when omitted.

    Returns:
        α11, α12, α22 in the (e3, e4) basis.

    Raises:
        DegenerateImmersion: If the chart is singular at a point.
    """
    jet = eval_jet(chart, u, v)
    if frame is None:
        frame = frame_from_jet(chart, jet)
    return second_fundamental_from_jet(jet, frame)


def invariants_from_data(data: SecondFundamentalData, ambient_c: float = 0.0,
                         lam: Optional[np.ndarray] = None) -> PointInvariants:
    """Compute every scalar invariant from the second fundamental form.

    ``lam`` enables the Hopf parts φ±, which are only meaningful on
    isothermal charts.
    """
    uu, vv, H = data.u_vec, data.v_vec, data.H
    K = ambient_c + np.sum(data.alpha11 * data.alpha22, axis=-1) - np.sum(vv * vv, axis=-1)
    K_N = 2.0 * (uu[..., 0] * vv[..., 1] - uu[..., 1] * vv[..., 0])
    B_minus = np.linalg.norm(uu - rot90(vv), axis=-1)
    B_plus = np.linalg.norm(uu + rot90(vv), axis=-1)
    m = np.stack([uu, vv], axis=-1)
    left, sing, _ = np.linalg.svd(m)
    major = left[..., :, 0]
    circle = (sing[..., 0] - sing[..., 1]) <= EPS_SCALE * np.maximum(1.0, data.norm)
    major = np.where(circle[..., None], np.nan, major)
    phi_minus = phi_plus = None
    if lam is not None:
        phi_minus, phi_plus = hopf_parts(data, lam)
    return PointInvariants(data, K, K_N, np.sum(H * H, axis=-1), B_minus, B_plus,
                           sing[..., 0], sing[..., 1], major, ambient_c, lam, phi_minus,
                           phi_plus)


def hopf_parts(data: SecondFundamentalData, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Isotropic parts (φ⁻, φ⁺) of φ = α(∂, ∂) = (λ²/2)(u − i v)."""
    xi = data.u_vec - 1j * data.v_vec
    jxi = rot90(xi)
    scale = (np.asarray(lam) ** 2 / 4.0)[..., None]
    return scale * (xi - 1j * jxi), scale * (xi + 1j * jxi)


def point_invariants(chart: SurfaceChart, u, v, frame: Optional[AdaptedFrame] = None,
                     hopf: Optional[bool] = None) -> PointInvariants:
    """All pointwise invariants of a chart.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        frame: Frame for the normal components; the adapted frame when omitted.
        hopf: Whether φ± are required. ``None`` computes them on isothermal
            charts only.

    Returns:
        The invariants at every point.

    Raises:
        NonIsothermalChart: If φ± are requested on a non-isothermal chart.
    """
    if hopf and not chart.isothermal:
        raise NonIsothermalChart(f'φ± need an isothermal chart, {chart.name} is not',
                                 'point_invariants')
    jet = eval_jet(chart, u, v)
    if frame is None:
        frame = frame_from_jet(chart, jet)
    data = second_fundamental_from_jet(jet, frame)
    lam = None
    if chart.isothermal and hopf is not False:
        lam = np.linalg.norm(jet.fu, axis=-1)
    return invariants_from_data(data, chart.ambient_c, lam)


def hopf_rotation(inv: PointInvariants, tau) -> Tuple[np.ndarray, np.ndarray]:
    """φ± expressed in the tangent frame rotated by ``tau``.

    Rotating (e1, e2) by τ multiplies u − i v, and with it both isotropic
    parts, by e^{2iτ}; the normal gauge is unchanged.

    Raises:
        NonIsothermalChart: If ``inv`` carries no Hopf parts.
    """
    if inv.phi_minus is None or inv.phi_plus is None:
        raise NonIsothermalChart('φ± are only defined on isothermal charts', 'hopf_rotation')
    phase = np.exp(2j * np.asarray(tau))[..., None]
    return phase * inv.phi_minus, phase * inv.phi_plus


def classify_point(inv: PointInvariants, eps_scale: float = EPS_SCALE) -> PointClass:
    """Classify sample points as umbilic, pseudo-umbilic, minimal or generic.

    The threshold is ε = eps_scale × max(1, ‖α‖).
    """
    eps = eps_scale * inv.scale
    plus = inv.B_plus < eps
    minus = inv.B_minus < eps
    umbilic = plus & minus
    minimal = np.sqrt(inv.normH2) < eps
    tag = np.full(np.shape(eps), PointTag.GENERIC.value, dtype=object)
    tag = np.where(minimal, PointTag.MINIMAL.value, tag)
    tag = np.where(minus, PointTag.PSEUDO_UMBILIC_MINUS.value, tag)
    tag = np.where(plus, PointTag.PSEUDO_UMBILIC_PLUS.value, tag)
    tag = np.where(umbilic, PointTag.UMBILIC.value, tag)
    margins = {
        'B_plus': inv.B_plus,
        'B_minus': inv.B_minus,
        'normH': np.sqrt(inv.normH2),
        'threshold': eps,
    }
    return PointClass(tag, plus, minus, umbilic, minimal, margins)


def principal_angles(inv: PointInvariants, eps_scale: float = EPS_SCALE) -> np.ndarray:
    """Principal directions θ₀ + kπ/2 (k = 0..3) or NaN at pseudo-umbilic points.

    The directions maximize ‖α(X_θ, X_θ) − H‖ = ‖cos 2θ u + sin 2θ v‖.
    """
    uu, vv = inv.data.u_vec, inv.data.v_vec
    theta0 = 0.25 * np.arctan2(2 * np.sum(uu * vv, axis=-1),
                               np.sum(uu * uu, axis=-1) - np.sum(vv * vv, axis=-1))
    angles = np.mod(theta0[..., None] + 0.5 * np.pi * np.arange(4), 2 * np.pi)
    undefined = np.minimum(inv.B_plus, inv.B_minus) < eps_scale * inv.scale
    return np.where(undefined[..., None], np.nan, angles)


def mean_directional_angles(inv: PointInvariants, eps_scale: float = EPS_SCALE) -> np.ndarray:
    """Directions with α(X, X) parallel to H, two orthogonal angles in [0, π) or NaN."""
    H = inv.data.H
    det_u = H[..., 0] * inv.data.u_vec[..., 1] - H[..., 1] * inv.data.u_vec[..., 0]
    det_v = H[..., 0] * inv.data.v_vec[..., 1] - H[..., 1] * inv.data.v_vec[..., 0]
    eps = eps_scale * inv.scale
    undefined = (np.sqrt(inv.normH2) < eps) | (np.hypot(det_u, det_v) < eps * eps)
    theta = 0.5 * np.arctan2(-det_u, det_v)
    angles = np.mod(theta[..., None] + 0.5 * np.pi * np.arange(2), np.pi)
    return np.where(undefined[..., None], np.nan, angles)


def curvature_line_directions(chart: SurfaceChart, u, v,
                              eps_scale: float = EPS_SCALE) -> CurvatureDirections:
    """Principal and mean-directional curvature-line directions.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        eps_scale: Relative threshold for pseudo-umbilic points.

    Returns:
        Tangent angles measured from e1 = f_u/‖f_u‖.

    Raises:
        UndefinedDirections: If some point is pseudo-umbilic.
    """
    inv = point_invariants(chart, u, v, hopf=False)
    principal = principal_angles(inv, eps_scale)
    if np.any(np.isnan(principal)):
        raise UndefinedDirections('principal directions are undefined at pseudo-umbilic points',
                                  'curvature_line_directions')
    return CurvatureDirections(principal, mean_directional_angles(inv, eps_scale))


def rotate_tangent_frame(frame: AdaptedFrame, tau) -> AdaptedFrame:
    """Rotate (e1, e2) by ``tau`` keeping the normal frame."""
    c = np.cos(tau)[..., None] if np.ndim(tau) else np.cos(tau)
    s = np.sin(tau)[..., None] if np.ndim(tau) else np.sin(tau)
    return AdaptedFrame(c * frame.e1 + s * frame.e2, -s * frame.e1 + c * frame.e2,
                        frame.e3, frame.e4, frame.lam)


def principal_rule(chart: SurfaceChart, u, v,
                   reference: Optional[AdaptedFrame] = None) -> AdaptedFrame:
    """Frame rule whose e1 follows the principal direction nearest to the reference.

    Raises:
        MaskViolation: At pseudo-umbilic points.
    """
    jet = eval_jet(chart, u, v)
    e1, e2 = tangent_frame(jet)
    seed = axis_seed(e1, e2) if reference is None else reference.e3
    frame = frame_from_normal(e1, e2, seed)
    inv = invariants_from_data(second_fundamental_from_jet(jet, frame), chart.ambient_c)
    theta = principal_angles(inv)[..., 0]
    if np.any(np.isnan(theta)):
        raise MaskViolation('principal frame undefined at a pseudo-umbilic point',
                            'principal_rule')
    if reference is not None:
        ref = np.arctan2(np.sum(reference.e1 * e2, axis=-1), np.sum(reference.e1 * e1, axis=-1))
        theta = theta + 0.5 * np.pi * np.round((ref - theta) / (0.5 * np.pi))
    return rotate_tangent_frame(frame, theta)


def mean_curvature_rule(chart: SurfaceChart, u, v,
                        reference: Optional[AdaptedFrame] = None) -> AdaptedFrame:
    """Frame rule with e3 = H/‖H‖.

    Raises:
        MaskViolation: Where H vanishes.
    """
    jet = eval_jet(chart, u, v)
    e1, e2 = tangent_frame(jet)
    alpha = second_fundamental_ambient(jet, e1, e2)
    H = 0.5 * (alpha[..., 0, 0, :] + alpha[..., 1, 1, :])
    norm = np.linalg.norm(H, axis=-1)
    if np.any(~(norm > EPS_SCALE)):
        raise MaskViolation('mean curvature vanishes', 'mean_curvature_rule')
    lam = np.linalg.norm(jet.fu, axis=-1) if chart.isothermal else None
    return frame_from_normal(e1, e2, H, lam)


def hopf_derivative_residuals(chart: SurfaceChart, u, v,
                              step: float = H_CONN) -> Dict[str, np.ndarray]:
    """Codazzi and holomorphy residuals of φ± on an isothermal chart.

    Returns a dict with ``codazzi_minus``, ``codazzi_plus`` (‖∇⊥_∂̄φ± −
    (λ²/2)∇⊥_∂H±‖) and ``holomorphy_minus``, ``holomorphy_plus`` (‖∇⊥_∂̄φ±‖),
    each divided by the curvature scale.

    Raises:
        NonIsothermalChart: On general charts.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'chart {chart.name} is not isothermal', 'codazzi')
    u, v = reduce_point(chart, u, v)
    centre = adapted_rule(chart, u, v, None)
    conn = connection_sample(chart, u, v)

    def fields(uu, vv):
        jet = eval_jet(chart, uu, vv)
        frame = frame_from_jet(chart, jet, centre.e3)
        inv = invariants_from_data(second_fundamental_from_jet(jet, frame), chart.ambient_c,
                                   np.linalg.norm(jet.fu, axis=-1))
        H = inv.data.H.astype(complex)
        h_minus = 0.5 * (H - 1j * rot90(H))
        h_plus = 0.5 * (H + 1j * rot90(H))
        return np.stack([inv.phi_minus, inv.phi_plus, h_minus, h_plus], axis=-2)

    values = fields(u, v)
    d = stencil_derivatives(fields, u, v, step)
    w = np.einsum('...wj,...j->...w', conn.coframe, conn.omega34)
    w_bar = 0.5 * (w[..., 0] + 1j * w[..., 1])
    w_hol = 0.5 * (w[..., 0] - 1j * w[..., 1])
    d_bar = 0.5 * (d[..., 0, :, :] + 1j * d[..., 1, :, :]) + w_bar[..., None, None] * rot90(values)
    d_hol = 0.5 * (d[..., 0, :, :] - 1j * d[..., 1, :, :]) + w_hol[..., None, None] * rot90(values)
    lam = np.linalg.norm(eval_jet(chart, u, v).fu, axis=-1)
    scale = np.maximum(1.0, second_fundamental_from_jet(eval_jet(chart, u, v), centre).norm)
    out = {}
    for k, sign in enumerate(('minus', 'plus')):
        codazzi = d_bar[..., k, :] - (lam ** 2 / 2.0)[..., None] * d_hol[..., 2 + k, :]
        out[f'codazzi_{sign}'] = np.linalg.norm(codazzi, axis=-1) / scale
        out[f'holomorphy_{sign}'] = np.linalg.norm(d_bar[..., k, :], axis=-1) / scale
    return out


def trace_lines(chart: SurfaceChart, grid: SampleGrid, family: str = 'principal',
                seeds: Optional[np.ndarray] = None, max_steps: Optional[int] = None,
                eps_scale: float = EPS_SCALE) -> List[np.ndarray]:
    """Trace curvature lines through seed points with RK4 in the direction field.

    Each seed yields one line per orthogonal direction, traced both ways
    with arclength step min(du, dv)/4. Lines stop at the domain boundary of
    open axes and where the direction field is undefined.

    Args:
        chart: Chart to trace on.
        grid: Grid providing the step and default seeds.
        family: ``principal`` or ``mean_directional``.
        seeds: Seed points ``(n, 2)``; a coarse subset of the grid by default.
        max_steps: Steps per half line; 4 × (nu + nv) by default.
        eps_scale: Relative threshold for undefined directions.

    Returns:
        List of ``(m, 2)`` arrays of parameter points.
    """
    if family not in ('principal', 'mean_directional'):
        raise ValueError(f'unknown line family {family!r}')
    if seeds is None:
        uu, vv = grid.mesh()
        stride_u, stride_v = max(1, grid.nu // 6), max(1, grid.nv // 6)
        seeds = np.stack([uu[stride_u // 2::stride_u, stride_v // 2::stride_v].ravel(),
                          vv[stride_u // 2::stride_u, stride_v // 2::stride_v].ravel()], axis=-1)
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
    step = 0.25 * min(grid.du, grid.dv)
    max_steps = max_steps or 4 * (grid.nu + grid.nv)
    bounds = (grid.u[0], grid.u[-1], grid.v[0], grid.v[-1])
    lines = []
    for which in range(2):
        halves = []
        for orientation in (1.0, -1.0):
            halves.append(_march_lines(chart, seeds, family, which, orientation, step, max_steps,
                                       eps_scale, bounds))
        for forward, backward in zip(*halves):
            line = np.concatenate([backward[::-1], forward[1:]], axis=0)
            if len(line) > 1:
                lines.append(line)
    return lines


def _direction_field(chart: SurfaceChart, p: np.ndarray, previous: np.ndarray, family: str,
                     which: int, eps_scale: float) -> np.ndarray:
    jet = eval_jet(chart, p[:, 0], p[:, 1])
    frame = frame_from_jet(chart, jet)
    inv = invariants_from_data(second_fundamental_from_jet(jet, frame), chart.ambient_c)
    if family == 'principal':
        theta = principal_angles(inv, eps_scale)[:, which]
    else:
        theta = mean_directional_angles(inv, eps_scale)[:, which]
    c = tangent_coefficients(jet, frame.e1, frame.e2)
    velocity = np.cos(theta)[:, None] * c[:, 0, :] + np.sin(theta)[:, None] * c[:, 1, :]
    flip = np.sum(velocity * previous, axis=-1) < 0
    return np.where(flip[:, None], -velocity, velocity)


def _inside(chart: SurfaceChart, p: np.ndarray, bounds: Tuple[float, ...]) -> np.ndarray:
    u0, u1, v0, v1 = bounds
    ok = np.ones(len(p), dtype=bool)
    if not chart.periodic_u:
        ok &= (p[:, 0] >= u0) & (p[:, 0] <= u1)
    if not chart.periodic_v:
        ok &= (p[:, 1] >= v0) & (p[:, 1] <= v1)
    return ok


def _march_lines(chart: SurfaceChart, seeds: np.ndarray, family: str, which: int,
                 orientation: float, step: float, max_steps: int, eps_scale: float,
                 bounds: Tuple[float, ...]) -> List[np.ndarray]:
    n = len(seeds)
    start = _direction_field(chart, seeds, np.ones((n, 2)), family, which, eps_scale)
    previous = orientation * start
    active = np.all(np.isfinite(previous), axis=-1)
    positions = seeds.copy()
    paths = [[p.copy()] for p in seeds]
    for _ in range(max_steps):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        p, prev = positions[idx], previous[idx]

        def field_at(q: np.ndarray, ref: np.ndarray) -> np.ndarray:
            return _direction_field(chart, _clip(chart, q, p, bounds), ref, family, which,
                                    eps_scale)

        k1 = _direction_field(chart, p, prev, family, which, eps_scale)
        k2 = field_at(p + 0.5 * step * k1, k1)
        k3 = field_at(p + 0.5 * step * k2, k2)
        k4 = field_at(p + step * k3, k3)
        nxt = p + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        good = np.all(np.isfinite(nxt), axis=-1) & _inside(chart, np.nan_to_num(nxt), bounds)
        for local, i in enumerate(idx):
            if good[local]:
                paths[i].append(nxt[local].copy())
        positions[idx[good]] = nxt[good]
        previous[idx[good]] = k4[good]
        active[idx[~good]] = False
    return [np.array(path) for path in paths]


def _clip(chart: SurfaceChart, p: np.ndarray, fallback: np.ndarray,
          bounds: Tuple[float, ...]) -> np.ndarray:
    u0, u1, v0, v1 = bounds
    out = np.where(np.isfinite(p), p, fallback)
    if not chart.periodic_u:
        out[:, 0] = np.clip(out[:, 0], u0, u1)
    if not chart.periodic_v:
        out[:, 1] = np.clip(out[:, 1], v0, v1)
    return out
