"""Bonnet mates: the θ± system, mate data, reconstruction and congruence tests.

A mate shares the conformal factor, the mean curvature vector and the normal
connection with its source; only the Hopf coefficient changes, from φ to

    Ψ = φ∓ + e^{∓iθ±} φ±        (one-sided families)
    Ψ = e^{iθ⁻} φ⁻ + e^{−iθ⁺} φ⁺  (``sign == 'both'``)

where θ± solves θ±_z̄ = ∓i h± (1 − e^{±iθ±}). All quantities are expressed in
the isotropic normal frame of the first requested sign, which is a smooth
gauge wherever B± > 0.
"""

import itertools
import logging
import math

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from bonnetlab.config import (
    COMPATIBILITY_TOLERANCE,
    CONGRUENCE_RESIDUAL,
    DISTORTION_THRESHOLD,
    FRAME_DRIFT_LIMIT,
    INVOLUTIVITY_TOLERANCE,
    LATTICE_REFINEMENT,
    MATE_PACK,
    RANGE_TOLERANCE,
)
from bonnetlab.dataobjects import LatticeSolution, SampleGrid
from bonnetlab.dataobjects.bonnet import (
    CongruenceResult,
    DistortionField,
    FamilyReport,
    GeometrySamples,
    MateFundamentalData,
    MateSample,
    ReconstructedSurface,
    ThetaField,
)
from bonnetlab.dataobjects.forms import BonnetAnalyticData
from bonnetlab.dataobjects.invariants import PointInvariants, SecondFundamentalData
from bonnetlab.dataobjects.surface import Jet3, SurfaceChart
from bonnetlab.exception import (
    CompatibilityViolation,
    EmptyMask,
    FrameBlowup,
    MaskViolation,
    NonIsothermalChart,
    NotInvolutive,
    RangeEscape,
)
from bonnetlab.integrate import integrate_lattice, sample_lattice
from bonnetlab.invariants import (
    invariants_from_data,
    point_invariants,
    rot90,
    second_fundamental_from_jet,
)
from bonnetlab.mixedforms import analytic_data, hopf_connection, isotropic_rule
from bonnetlab.surface import (
    connection_sample,
    eval_jet,
    frame_from_jet,
    frame_from_normal,
    metric,
    tangent_frame,
)
from bonnetlab.utils import (
    finite_max,
    grid_derivative,
    orthogonal_fit,
    parallel_map,
    polar_orthonormalize,
    sign_value,
)

_logger = logging.getLogger(__name__)

SIGNS: Tuple[str, ...] = ('-', '+', 'both')
"""Accepted family selectors."""

ThetaStart = Union[float, Sequence[float]]


def family_signs(sign: str) -> Tuple[str, ...]:
    """Isotropic signs integrated for a family selector."""
    if sign == 'both':
        return ('-', '+')
    sign_value(sign)
    return (sign,)


def _initial_values(signs: Tuple[str, ...], theta0: ThetaStart) -> Dict[str, float]:
    values = np.atleast_1d(np.asarray(theta0, dtype=float))
    if values.size != len(signs):
        raise ValueError(f'expected {len(signs)} initial value(s) for θ, got {values.size}')
    return {s: float(x) for s, x in zip(signs, values)}


def _theta_rate(h: np.ndarray, theta: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """θ_z̄ = ∓i h (1 − e^{±iθ}) per component."""
    return -signs * 1j * h * (1.0 - np.exp(signs * 1j * theta))


def _mate_hopf(theta: Dict[str, np.ndarray], phi_minus: np.ndarray,
               phi_plus: np.ndarray) -> np.ndarray:
    psi_minus, psi_plus = phi_minus, phi_plus
    if '-' in theta:
        psi_minus = np.exp(1j * np.asarray(theta['-']))[..., None] * phi_minus
    if '+' in theta:
        psi_plus = np.exp(-1j * np.asarray(theta['+']))[..., None] * phi_plus
    return psi_minus + psi_plus


def _mate_second_fundamental(lam: np.ndarray, H: np.ndarray,
                             psi: np.ndarray) -> SecondFundamentalData:
    factor = (2.0 / np.asarray(lam) ** 2)[..., None]
    u_vec = factor * psi.real
    v_vec = -factor * psi.imag
    return SecondFundamentalData(H + u_vec, v_vec, H - u_vec)


def sample_geometry(chart: SurfaceChart, grid: SampleGrid, sign: str,
                    refinement: int = LATTICE_REFINEMENT,
                    threads: Optional[int] = None) -> GeometrySamples:
    """Sample everything the θ system and the frame equations need on the lattice.

    Args:
        chart: Isothermal chart.
        grid: Grid the results are reported on.
        sign: Family selector, see `SIGNS`.
        refinement: Even lattice refinement.
        threads: Worker cap.

    Returns:
        Lattice samples in the isotropic gauge of the first requested sign.

    Raises:
        NonIsothermalChart: On general charts.
        MaskViolation: If B± vanishes at a lattice node.
    """
    if not chart.isothermal:
        raise NonIsothermalChart(f'Bonnet mates need an isothermal chart, {chart.name} is not',
                                 'sample_geometry')
    signs = family_signs(sign)
    gauge = signs[0]
    rule = isotropic_rule(gauge)

    def sample(a, b):
        conn = connection_sample(chart, a, b, rule)
        jet = eval_jet(chart, a, b)
        lam = np.linalg.norm(jet.fu, axis=-1)
        inv = invariants_from_data(second_fundamental_from_jet(jet, conn.frame),
                                   chart.ambient_c, lam)
        adapted = frame_from_jet(chart, jet)
        cos = np.sum(conn.frame.e3 * adapted.e3, axis=-1)
        sin = np.sum(conn.frame.e3 * adapted.e4, axis=-1)
        out = {
            'f': jet.f,
            'frame': conn.frame.matrix(),
            'lam': lam,
            'coframe': conn.coframe,
            'omega12': conn.omega12,
            'omega34': conn.omega34,
            'H': inv.data.H,
            'phi_minus': inv.phi_minus,
            'phi_plus': inv.phi_plus,
            'K': inv.K,
            'K_N': inv.K_N,
            'scale': inv.scale,
            'gauge_angle': np.arctan2(sin, cos),
        }
        for s in signs:
            out['h' + s] = hopf_connection(chart, a, b, s)
        return out

    values = sample_lattice(sample, grid, refinement, threads)
    h = {s: values.pop('h' + s) for s in signs}
    _logger.debug('sampled %s on a %dx%d lattice in the e3%s gauge', chart.name,
                  *values['lam'].shape, gauge)
    return GeometrySamples(grid, refinement, gauge, h=h, **values)


def check_involutive(chart: SurfaceChart, grid: SampleGrid, sign: str,
                     threads: Optional[int] = None) -> Dict[str, BonnetAnalyticData]:
    """Verify that the θ system of every requested sign is integrable on the grid.

    Returns:
        The analytic data per sign.

    Raises:
        EmptyMask: If B± vanishes on the whole grid.
        MaskViolation: If B± vanishes somewhere on the grid.
        NotInvolutive: If sup |A±|/scale exceeds the involutivity tolerance.
    """
    out = {}
    for s in family_signs(sign):
        data = analytic_data(chart, grid, s, threads=threads)
        if not np.all(data.mask):
            raise MaskViolation(f'B{s} vanishes on {chart.name}; θ{s} needs a pseudo-umbilic '
                                'free domain', 'solve_theta')
        if data.involutivity > INVOLUTIVITY_TOLERANCE:
            raise NotInvolutive(f'A{s} does not vanish on {chart.name} '
                                f'(sup |A|/scale = {data.involutivity:.3e})', 'solve_theta')
        out[s] = data
    return out


def solve_theta(chart: SurfaceChart, grid: SampleGrid, sign: str, theta0: ThetaStart,
                refinement: int = LATTICE_REFINEMENT,
                geometry: Optional[GeometrySamples] = None,
                analytic: Optional[Dict[str, BonnetAnalyticData]] = None,
                threads: Optional[int] = None) -> ThetaField:
    """Integrate θ± from its value at the grid centre.

    Args:
        chart: Isothermal chart.
        grid: Sample grid.
        sign: ``-``, ``+`` or ``both``.
        theta0: Initial value, a pair (θ⁻, θ⁺) for ``both``.
        refinement: Even lattice refinement.
        geometry: Lattice samples to reuse; sampled when omitted.
        analytic: Result of [check_involutive][bonnetlab.bonnet.check_involutive] to reuse.
        threads: Worker cap.

    Returns:
        The solution with its closure, harmonic, system and root residuals.

    Raises:
        NotInvolutive: If A± does not vanish.
        MaskViolation: If B± vanishes on the domain.
        RangeEscape: If θ leaves the strip between the constant solutions around θ₀.
    """
    signs = family_signs(sign)
    start = _initial_values(signs, theta0)
    if analytic is None:
        analytic = check_involutive(chart, grid, sign, threads)
    if geometry is None:
        geometry = sample_geometry(chart, grid, sign, refinement, threads)
    return solve_thetas(chart, sign, [[start[s] for s in signs]], geometry, analytic)[0]


def _per_member(solution: LatticeSolution, members: int) -> Tuple[np.ndarray, np.ndarray]:
    """Split packed states into ``(members, nu, nv, d)`` and the closure of each member."""
    shape = solution.values.shape[:2] + (members, -1)
    values = np.moveaxis(solution.values.reshape(shape), 2, 0)
    other = np.moveaxis(solution.transposed.reshape(shape), 2, 0)
    closure = np.linalg.norm(values - other, axis=-1).reshape(members, -1).max(axis=-1)
    return values, closure


def solve_thetas(chart: SurfaceChart, sign: str, starts: Sequence[ThetaStart],
                 geometry: GeometrySamples,
                 analytic: Dict[str, BonnetAnalyticData]) -> List[ThetaField]:
    """Integrate θ± for several initial values in one lattice march.

    Args:
        chart: Isothermal chart.
        sign: ``-``, ``+`` or ``both``.
        starts: Initial values, one entry per family member.
        geometry: Lattice samples of the chart.
        analytic: Result of [check_involutive][bonnetlab.bonnet.check_involutive].

    Returns:
        One solution per initial value.

    Raises:
        RangeEscape: If a θ leaves the strip between the constant solutions around its θ₀.
    """
    signs = family_signs(sign)
    grid = geometry.grid
    initial = [_initial_values(signs, start) for start in starts]
    y0 = np.array([[start[s] for s in signs] for start in initial]).ravel()
    h = np.stack([geometry.h[s] for s in signs], axis=-1)
    sv = np.array([sign_value(s) for s in signs])

    def rhs(axis, iu, iv, state):
        theta = state.reshape(state.shape[0], -1, len(signs))
        g = _theta_rate(h[iu, iv][:, None, :], theta, sv)
        return (2.0 * (g.real if axis == 0 else g.imag)).reshape(state.shape)

    solution = integrate_lattice(rhs, y0, grid, geometry.refinement)
    values, closure = _per_member(solution, len(initial))
    return [_theta_field(chart, sign, start, values[m], float(closure[m]), solution.base,
                         geometry, analytic)
            for m, start in enumerate(initial)]


def _theta_field(chart: SurfaceChart, sign: str, start: Dict[str, float], values: np.ndarray,
                 closure: float, base: Tuple[int, int], geometry: GeometrySamples,
                 analytic: Dict[str, BonnetAnalyticData]) -> ThetaField:
    signs = family_signs(sign)
    grid = geometry.grid
    sv = np.array([sign_value(s) for s in signs])
    theta = {s: values[..., k] for k, s in enumerate(signs)}
    for s in signs:
        floor = 2.0 * math.pi * math.floor(start[s] / (2.0 * math.pi))
        low, high = np.nanmin(theta[s]) - floor, np.nanmax(theta[s]) - floor
        if low < -RANGE_TOLERANCE or high > 2.0 * math.pi + RANGE_TOLERANCE:
            raise RangeEscape(f'θ{s} left [0, 2π] on {chart.name} (range {low:.3e}, {high:.3e})',
                              'solve_theta')

    harmonic = system = root = 0.0
    for k, s in enumerate(signs):
        t = theta[s]
        t_u = grid_derivative(t, grid.du, 0, False)
        t_v = grid_derivative(t, grid.dv, 1, False)
        lap = grid_derivative(t_u, grid.du, 0, False) + grid_derivative(t_v, grid.dv, 1, False)
        harmonic = max(harmonic, finite_max(np.abs(lap).ravel()))
        rate = _theta_rate(geometry.nodes(geometry.h[s]), t, sv[k])
        system = max(system, finite_max(np.abs(0.5 * (t_u + 1j * t_v) - rate).ravel()))
        A = analytic[s].A
        x = np.exp(sv[k] * 1j * t)
        structure = np.abs(A * x ** 2 - 2j * A.imag * x - np.conj(A)) / analytic[s].scale
        root = max(root, finite_max(structure.ravel()))
    field = ThetaField(grid, sign, theta, start, base, closure, harmonic, system, root, geometry)
    _logger.info('θ%s on %s from %s: closure %.3e, system residual %.3e', sign, chart.name,
                 start, field.closure_residual, field.system_residual)
    return field


def mate_data(chart: SurfaceChart, theta: ThetaField) -> MateFundamentalData:
    """Fundamental data of the mate selected by a θ solution.

    Args:
        chart: Source chart.
        theta: Solution of the θ system on the chart.

    Returns:
        λ, H, Ψ and the gauge normal connection at the grid nodes, with the
        Gauss, Ricci and Codazzi residuals of the new data.
    """
    geo = theta.geometry
    grid = theta.grid
    lam = geo.nodes(geo.lam)
    H = geo.nodes(geo.H)
    psi = _mate_hopf(theta.theta, geo.nodes(geo.phi_minus), geo.nodes(geo.phi_plus))
    inv = invariants_from_data(_mate_second_fundamental(lam, H, psi), chart.ambient_c)
    scale2 = geo.nodes(geo.scale) ** 2
    gauss = finite_max((np.abs(inv.K - geo.nodes(geo.K)) / scale2).ravel())
    ricci = finite_max((np.abs(inv.K_N - geo.nodes(geo.K_N)) / scale2).ravel())

    omega34 = geo.nodes(geo.omega34)
    w = np.einsum('...wj,...j->...w', geo.nodes(geo.coframe), omega34)
    w_bar = 0.5 * (w[..., 0] + 1j * w[..., 1])[..., None]
    w_hol = 0.5 * (w[..., 0] - 1j * w[..., 1])[..., None]
    d_bar = _d_bar(psi, grid) + w_bar * rot90(psi)
    d_hol = _d_hol(H, grid) + w_hol * rot90(H)
    codazzi = np.linalg.norm(d_bar - (lam ** 2 / 2.0)[..., None] * d_hol, axis=-1)
    codazzi = finite_max(_interior(codazzi / geo.nodes(geo.scale)).ravel())
    data = MateFundamentalData(theta, lam, psi, H, omega34, gauss, ricci, codazzi)
    _logger.debug('mate data on %s: gauss %.3e, ricci %.3e, codazzi %.3e', chart.name,
                  gauss, ricci, codazzi)
    return data


def _interior(values: np.ndarray) -> np.ndarray:
    """Drop the two outer rows and columns reached by one-sided stencils."""
    return values[2:-2, 2:-2]


def _partials(values: np.ndarray, grid: SampleGrid) -> Tuple[np.ndarray, np.ndarray]:
    return (grid_derivative(values, grid.du, 0, False),
            grid_derivative(values, grid.dv, 1, False))


def _d_bar(values: np.ndarray, grid: SampleGrid) -> np.ndarray:
    du, dv = _partials(values, grid)
    return 0.5 * (du + 1j * dv)


def _d_hol(values: np.ndarray, grid: SampleGrid) -> np.ndarray:
    du, dv = _partials(values, grid)
    return 0.5 * (du - 1j * dv)


def _connection_matrix(geo: GeometrySamples, iu: np.ndarray, iv: np.ndarray,
                       theta: Dict[str, np.ndarray], axis: int) -> np.ndarray:
    """W with dF/dw = W F along coordinate ``axis`` for mate frames F, ``(batch, members, 4, 4)``.

    ``theta`` holds θ per sign as ``(batch, members)``.
    """
    psi = _mate_hopf(theta, geo.phi_minus[iu, iv][:, None], geo.phi_plus[iu, iv][:, None])
    data = _mate_second_fundamental(geo.lam[iu, iv][:, None], geo.H[iu, iv][:, None], psi)
    alpha = np.stack([np.stack([data.alpha11, data.alpha12], axis=-2),
                      np.stack([data.alpha12, data.alpha22], axis=-2)], axis=-3)
    cof = geo.coframe[iu, iv, axis]
    W = np.zeros(alpha.shape[:-3] + (4, 4))
    W[..., 0, 1] = np.sum(geo.omega12[iu, iv] * cof, axis=-1)[:, None]
    W[..., 2, 3] = np.sum(geo.omega34[iu, iv] * cof, axis=-1)[:, None]
    W[..., :2, 2:] = np.einsum('...jra,...r->...ja', alpha, cof[:, None])
    return W - np.swapaxes(W, -1, -2)


def reconstruct(data: MateFundamentalData, seed_frame: Optional[np.ndarray] = None,
                seed_point: Optional[np.ndarray] = None) -> ReconstructedSurface:
    """Integrate the frame equations of mate data into an immersion.

    θ, the frame (ẽ1, ẽ2, ẽ3, ẽ4) and the position are marched together over
    the lattice of the θ solution; frames are projected back onto O(4) by
    polar decomposition after every step.

    Args:
        data: Mate data.
        seed_frame: Frame rows at the base node; the source gauge frame when omitted.
        seed_point: Position at the base node; the source position when omitted.

    Returns:
        The mate sampled on the grid.

    Raises:
        CompatibilityViolation: If the data violate the Gauss or Ricci equation.
        FrameBlowup: If a frame drifts from orthonormality before projection.
    """
    return reconstruct_family([data], seed_frame, seed_point)[0]


def reconstruct_family(family: Sequence[MateFundamentalData],
                       seed_frame: Optional[np.ndarray] = None,
                       seed_point: Optional[np.ndarray] = None) -> List[ReconstructedSurface]:
    """Reconstruct several mates of one chart in a single lattice march.

    Every member must come from θ solutions on the same geometry samples.
    The states of all members are packed side by side, so each RK4 step
    advances the whole family.

    Args:
        family: Mate data sharing their geometry samples.
        seed_frame: Frame rows at the base node; the source gauge frame when omitted.
        seed_point: Position at the base node; the source position when omitted.

    Returns:
        One reconstruction per member, in order.

    Raises:
        ValueError: If the members do not share their geometry samples.
        CompatibilityViolation: If some member violates the Gauss or Ricci equation.
        FrameBlowup: If a frame drifts from orthonormality before projection.
    """
    first = family[0].theta
    geo = first.geometry
    if any(data.theta.geometry is not geo or data.theta.sign != first.sign
           or data.theta.base != first.base for data in family):
        raise ValueError('family members must share their geometry samples, sign and base')
    for data in family:
        if max(data.gauss_residual, data.ricci_residual) > COMPATIBILITY_TOLERANCE:
            raise CompatibilityViolation(
                f'mate data violate Gauss/Ricci (residuals {data.gauss_residual:.3e}, '
                f'{data.ricci_residual:.3e})', 'reconstruct')
    grid = first.grid
    signs = family_signs(first.sign)
    k = len(signs)
    members = len(family)
    r = geo.refinement
    node = (first.base[0] * r, first.base[1] * r)
    frame0 = geo.frame[node] if seed_frame is None else np.asarray(seed_frame, dtype=float)
    point0 = geo.f[node] if seed_point is None else np.asarray(seed_point, dtype=float)
    y0 = np.concatenate([np.concatenate([[data.theta.theta0[s] for s in signs], frame0.ravel(),
                                         point0]) for data in family])
    h = np.stack([geo.h[s] for s in signs], axis=-1)
    sv = np.array([sign_value(s) for s in signs])

    def rhs(axis, iu, iv, state):
        y = state.reshape(state.shape[0], members, -1)
        th = y[..., :k]
        frames = y[..., k:k + 16].reshape(y.shape[:2] + (4, 4))
        g = _theta_rate(h[iu, iv][:, None, :], th, sv)
        d_theta = 2.0 * (g.real if axis == 0 else g.imag)
        W = _connection_matrix(geo, iu, iv, {s: th[..., j] for j, s in enumerate(signs)}, axis)
        d_frame = W @ frames
        d_point = np.einsum('bj,bmji->bmi', geo.coframe[iu, iv, axis], frames[:, :, :2])
        return np.concatenate([d_theta, d_frame.reshape(y.shape[:2] + (16,)), d_point],
                              axis=-1).reshape(state.shape)

    def project(state):
        y = state.reshape(state.shape[0], members, -1)
        frames = y[..., k:k + 16].reshape(-1, 4, 4)
        drift = np.abs(frames @ np.swapaxes(frames, -1, -2) - np.eye(4))
        if np.nanmax(drift) > FRAME_DRIFT_LIMIT:
            raise FrameBlowup(f'mate frame drifted by {np.nanmax(drift):.3e}', 'reconstruct')
        out = y.copy()
        out[..., k:k + 16] = polar_orthonormalize(frames).reshape(y.shape[:2] + (16,))
        return out.reshape(state.shape)

    solution = integrate_lattice(rhs, y0, grid, r, first.base, project)
    values, closure = _per_member(solution, members)
    beta = geo.nodes(geo.gauge_angle)
    cos, sin = np.cos(beta), np.sin(beta)
    T = np.stack([np.stack([cos, sin], axis=-1), np.stack([-sin, cos], axis=-1)], axis=-2)
    surfaces = [
        ReconstructedSurface(
            grid,
            values[m, ..., k + 16:],
            values[m, ..., k:k + 16].reshape(grid.shape + (4, 4)),
            {s: values[m, ..., j] for j, s in enumerate(signs)},
            T,
            float(closure[m]),
            data,
        )
        for m, data in enumerate(family)
    ]
    _logger.info('reconstructed %d mate(s) on %dx%d grid, worst closure %.3e', members,
                 grid.nu, grid.nv, float(closure.max()))
    return surfaces


def _fd_jet(f: np.ndarray, grid: SampleGrid) -> Jet3:
    fu, fv = _partials(f, grid)
    fuu = grid_derivative(fu, grid.du, 0, False)
    fuv = grid_derivative(fu, grid.dv, 1, False)
    fvv = grid_derivative(fv, grid.dv, 1, False)
    zero = np.zeros_like(f)
    return Jet3(f, fu, fv, fuu, fuv, fvv, zero, zero, zero, zero)


def _split(phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Isotropic parts (φ⁻, φ⁺) = ½(φ ∓ iJφ)."""
    jphi = rot90(phi)
    return 0.5 * (phi - 1j * jphi), 0.5 * (phi + 1j * jphi)


def distortion(chart: SurfaceChart, mate: ReconstructedSurface) -> DistortionField:
    """Distortion differentials of a reconstructed mate against its source.

    The mate's Hopf coefficient is recomputed from grid differences of f̃ in
    the mate normal frame, which T identifies with the source gauge.

    Raises:
        ValueError: If the mate does not carry the data it was built from.
    """
    if mate.data is None:
        raise ValueError('distortion needs a mate reconstructed from mate data')
    geo = mate.data.theta.geometry
    grid = mate.grid
    jet = _fd_jet(mate.f_tilde, grid)
    hess_zz = 0.25 * (jet.fuu - jet.fvv - 2j * jet.fuv)
    normals = mate.frames[..., 2:, :]
    phi_t = np.einsum('...i,...ai->...a', hess_zz, normals)
    mate_minus, mate_plus = _split(phi_t)
    phi_minus, phi_plus = geo.nodes(geo.phi_minus), geo.nodes(geo.phi_plus)
    q_minus = phi_minus - mate_minus
    q_plus = phi_plus - mate_plus

    expected_minus = np.zeros_like(q_minus)
    expected_plus = np.zeros_like(q_plus)
    if '-' in mate.theta:
        expected_minus = (1.0 - np.exp(1j * mate.theta['-']))[..., None] * phi_minus
    if '+' in mate.theta:
        expected_plus = (1.0 - np.exp(-1j * mate.theta['+']))[..., None] * phi_plus
    norm = geo.nodes(geo.lam) ** 2 * geo.nodes(geo.scale)
    deviation = np.maximum(np.linalg.norm(q_minus - expected_minus, axis=-1),
                           np.linalg.norm(q_plus - expected_plus, axis=-1)) / norm
    size = np.sqrt(np.linalg.norm(q_minus, axis=-1) ** 2
                   + np.linalg.norm(q_plus, axis=-1) ** 2) / norm

    w = np.einsum('...wj,...j->...w', geo.nodes(geo.coframe), geo.nodes(geo.omega34))
    w_bar = 0.5 * (w[..., 0] + 1j * w[..., 1])[..., None]
    holomorphy = 0.0
    for q in (q_minus, q_plus):
        residual = np.linalg.norm(_d_bar(q, grid) + w_bar * rot90(q), axis=-1) / norm
        holomorphy = max(holomorphy, finite_max(_interior(residual).ravel()))
    field = DistortionField(grid, q_minus, q_plus, finite_max(_interior(size).ravel()),
                            finite_max(_interior(deviation).ravel()), holomorphy)
    _logger.debug('distortion on %s: sup |Q| %.3e, closed-form deviation %.3e', chart.name,
                  field.sup_norm, field.closed_form_deviation)
    return field


def congruence_test(chart: SurfaceChart, mate: ReconstructedSurface,
                    q: Optional[DistortionField] = None) -> CongruenceResult:
    """Decide whether a mate is congruent to its source.

    The alignment is the best orthogonal map plus translation, so mirror
    images count as congruent.

    Args:
        chart: Source chart.
        mate: Sampled immersion on a grid over the chart.
        q: Distortion of the mate; computed when the mate carries its data.

    Returns:
        Best alignment; the mate is noncongruent iff the alignment residual
        exceeds the relative congruence threshold and, when measured, sup ‖Q‖
        exceeds the distortion threshold.
    """
    if mate.data is not None:
        geo = mate.data.theta.geometry
        source = geo.nodes(geo.f).reshape(-1, 4)
    else:
        source = eval_jet(chart, *mate.grid.mesh()).f.reshape(-1, 4)
    target = mate.f_tilde.reshape(-1, 4)
    rotation, translation, residual = orthogonal_fit(source, target)
    diameter = float(np.linalg.norm(np.ptp(source, axis=0)))
    if q is None and mate.data is not None:
        q = distortion(chart, mate)
    size = q.sup_norm if q is not None else math.nan
    distorted = math.isnan(size) or size > DISTORTION_THRESHOLD
    congruent = not (residual > CONGRUENCE_RESIDUAL * diameter and distorted)
    _logger.debug('congruence on %s: residual %.3e (diameter %.3e), |Q| %.3e', chart.name,
                  residual, diameter, size)
    return CongruenceResult(rotation, translation, residual, diameter, size, congruent)


def _mate_invariants(chart: SurfaceChart, mate: ReconstructedSurface) -> Tuple[np.ndarray,
                                                                                PointInvariants]:
    jet = _fd_jet(mate.f_tilde, mate.grid)
    e1, e2 = tangent_frame(jet)
    frame = frame_from_normal(e1, e2, mate.frames[..., 2, :])
    return metric(jet), invariants_from_data(second_fundamental_from_jet(jet, frame),
                                             chart.ambient_c)


def compare_mate(chart: SurfaceChart, mate: ReconstructedSurface,
                 source: Optional[PointInvariants] = None) -> MateSample:
    """Compare a reconstructed mate with its source on the interior grid nodes.

    Args:
        chart: Source chart.
        mate: Reconstruction carrying its mate data.
        source: Source invariants on the grid; computed when omitted.

    Returns:
        Metric, ‖H‖, K_N and curvature-ellipse deviations with the data
        residuals, the distortion holomorphy and the congruence verdict.
    """
    if source is None:
        source = point_invariants(chart, *mate.grid.mesh())
    data = mate.data
    g, inv = _mate_invariants(chart, mate)
    lam2 = data.lam ** 2
    scale = source.scale
    metric_error = np.max(np.abs(g - lam2[..., None, None] * np.eye(2)), axis=(-1, -2)) / lam2
    h_error = np.abs(np.sqrt(inv.normH2) - np.sqrt(source.normH2)) / scale
    kn_error = np.abs(inv.K_N - source.K_N) / scale ** 2
    ellipse = np.maximum(np.abs(inv.lambda1 - source.lambda1),
                         np.abs(inv.lambda2 - source.lambda2)) / scale
    q = distortion(chart, mate)
    return MateSample(
        dict(data.theta.theta0),
        finite_max(_interior(metric_error).ravel()),
        finite_max(_interior(h_error).ravel()),
        finite_max(_interior(kn_error).ravel()),
        finite_max(_interior(ellipse).ravel()),
        mate.closure_residual,
        data.gauss_residual,
        data.ricci_residual,
        data.codazzi_residual,
        data.theta.root_residual,
        congruence_test(chart, mate, q),
        q.holomorphy_residual,
    )


def moduli_sample(chart: SurfaceChart, grid: SampleGrid, sign: str, thetas: Sequence[float],
                  refinement: int = LATTICE_REFINEMENT,
                  threads: Optional[int] = None) -> FamilyReport:
    """Sample the family of Bonnet mates selected by ``sign``.

    One-sided families take every value of ``thetas`` as θ₀; ``both``
    samples every pair (θ⁻₀, θ⁺₀) from ``thetas`` × ``thetas``. The lattice
    samples and source invariants are computed once; mates are marched in
    packs of `MATE_PACK` and the packs run on the worker pool.

    Args:
        chart: Isothermal chart.
        grid: Sample grid.
        sign: ``-``, ``+`` or ``both``.
        thetas: Initial values.
        refinement: Even lattice refinement.
        threads: Worker cap.

    Returns:
        Per-sample comparisons and the pairwise noncongruence matrix, or a
        collapsed report when the family holds no mates.
    """
    signs = family_signs(sign)
    try:
        analytic = check_involutive(chart, grid, sign, threads)
    except (EmptyMask, NotInvolutive) as err:
        _logger.info('family %s of %s collapses: %s', sign, chart.name, err)
        return FamilyReport(sign, collapsed=True, reason=str(err))
    geometry = sample_geometry(chart, grid, sign, refinement, threads)
    source = point_invariants(chart, *grid.mesh())
    starts = list(itertools.product([float(t) for t in thetas], repeat=len(signs)))
    _logger.info('sampling %d mates of %s (%s family)', len(starts), chart.name, sign)

    def build(pack):
        fields = solve_thetas(chart, sign, pack, geometry, analytic)
        mates = reconstruct_family([mate_data(chart, theta) for theta in fields])
        return [(mate, compare_mate(chart, mate, source)) for mate in mates]

    packs = [starts[i:i + MATE_PACK] for i in range(0, len(starts), MATE_PACK)]
    built = [item for part in parallel_map(build, packs, threads) for item in part]
    clouds = [mate.f_tilde.reshape(-1, 4) for mate, _ in built]
    n = len(clouds)
    residual = np.zeros((n, n))
    distinct = np.zeros((n, n), dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        rms = orthogonal_fit(clouds[i], clouds[j])[2]
        diameter = float(np.linalg.norm(np.ptp(clouds[i], axis=0)))
        residual[i, j] = residual[j, i] = rms
        distinct[i, j] = distinct[j, i] = rms > CONGRUENCE_RESIDUAL * diameter
    report = FamilyReport(sign, tuple(sample for _, sample in built), residual, distinct)
    _logger.info('family %s of %s: %d samples, all pairwise noncongruent: %s', sign,
                 chart.name, n, report.all_noncongruent)
    return report
