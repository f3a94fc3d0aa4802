"""Jet evaluation, adapted frames and connection forms of immersion patches.

All functions are vectorized: coordinates may be scalars or arrays of any
(common) shape and results carry that shape in front of their own trailing
dimensions.
"""

import logging

from typing import Callable, Optional, Tuple

import numpy as np

from bonnetlab.config import (
    DEGENERACY_TOLERANCE,
    DOMAIN_MARGIN,
    FRAME_SEED_ANGLE,
    H_CONN,
    H_FD_ORDER_FACTORS,
    H_FD_SCALE,
)
from bonnetlab.dataobjects import SampleGrid
from bonnetlab.dataobjects.surface import AdaptedFrame, ConnectionSample, Jet3, SurfaceChart
from bonnetlab.exception import DegenerateImmersion, MaskViolation, OutOfDomain
from bonnetlab.utils import FIRST_STENCIL, cross4

_logger = logging.getLogger(__name__)

FrameRule = Callable[[SurfaceChart, np.ndarray, np.ndarray, Optional[AdaptedFrame]], AdaptedFrame]
"""Pointwise frame field: (chart, u, v, reference frame at the stencil centre) -> frame."""


def reduce_point(chart: SurfaceChart, u, v) -> Tuple[np.ndarray, np.ndarray]:
    """Wrap periodic coordinates and check the rest against the domain.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.

    Returns:
        Float arrays of the broadcast shape.

    Raises:
        OutOfDomain: If a non-periodic coordinate lies outside the domain by
            more than the stencil margin.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    u0, u1, v0, v1 = chart.domain
    if chart.periodic_u:
        u = u0 + np.mod(u - u0, u1 - u0)
    elif np.any(u < u0 - DOMAIN_MARGIN) or np.any(u > u1 + DOMAIN_MARGIN):
        raise OutOfDomain(f'u outside [{u0}, {u1}] on chart {chart.name}', 'eval_jet')
    if chart.periodic_v:
        v = v0 + np.mod(v - v0, v1 - v0)
    elif np.any(v < v0 - DOMAIN_MARGIN) or np.any(v > v1 + DOMAIN_MARGIN):
        raise OutOfDomain(f'v outside [{v0}, {v1}] on chart {chart.name}', 'eval_jet')
    return u, v


def eval_jet(chart: SurfaceChart, u, v) -> Jet3:
    """Evaluate the immersion and its partials up to order three.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.

    Returns:
        The jet at every requested point.

    Raises:
        OutOfDomain: If a point is outside the chart domain.
        DegenerateImmersion: If f_u and f_v are linearly dependent somewhere.
    """
    u, v = reduce_point(chart, u, v)
    if chart.jet_source is not None:
        jet = chart.jet_source(u, v)
    else:
        jet = _fd_jet(chart, u, v)
    _check_immersion(chart, jet)
    return jet


def _fd_jet(chart: SurfaceChart, u: np.ndarray, v: np.ndarray) -> Jet3:
    F = chart.value_source
    h = chart.h_fd or H_FD_SCALE * chart.diameter
    h1, h2, h3 = (h * k for k in H_FD_ORDER_FACTORS)
    f = F(u, v)
    fu = (F(u + h1, v) - F(u - h1, v)) / (2 * h1)
    fv = (F(u, v + h1) - F(u, v - h1)) / (2 * h1)
    fuu = (F(u + h2, v) - 2 * f + F(u - h2, v)) / h2 ** 2
    fvv = (F(u, v + h2) - 2 * f + F(u, v - h2)) / h2 ** 2
    fuv = (F(u + h2, v + h2) - F(u + h2, v - h2)
           - F(u - h2, v + h2) + F(u - h2, v - h2)) / (4 * h2 ** 2)
    fuuu = (F(u + 2 * h3, v) - 2 * F(u + h3, v)
            + 2 * F(u - h3, v) - F(u - 2 * h3, v)) / (2 * h3 ** 3)
    fvvv = (F(u, v + 2 * h3) - 2 * F(u, v + h3)
            + 2 * F(u, v - h3) - F(u, v - 2 * h3)) / (2 * h3 ** 3)
    fuuv = (F(u + h3, v + h3) - 2 * F(u, v + h3) + F(u - h3, v + h3)
            - F(u + h3, v - h3) + 2 * F(u, v - h3) - F(u - h3, v - h3)) / (2 * h3 ** 3)
    fuvv = (F(u + h3, v + h3) - 2 * F(u + h3, v) + F(u + h3, v - h3)
            - F(u - h3, v + h3) + 2 * F(u - h3, v) - F(u - h3, v - h3)) / (2 * h3 ** 3)
    return Jet3(f, fu, fv, fuu, fuv, fvv, fuuu, fuuv, fuvv, fvvv)


def _check_immersion(chart: SurfaceChart, jet: Jet3) -> None:
    guu = np.sum(jet.fu * jet.fu, axis=-1)
    gvv = np.sum(jet.fv * jet.fv, axis=-1)
    guv = np.sum(jet.fu * jet.fv, axis=-1)
    area2 = guu * gvv - guv ** 2
    if np.any(~(area2 > DEGENERACY_TOLERANCE * guu * gvv)):
        raise DegenerateImmersion(f'f_u and f_v are dependent on chart {chart.name}', 'eval_jet')


def metric(jet: Jet3) -> np.ndarray:
    """First fundamental form in coordinates, shape ``(..., 2, 2)``."""
    first = jet.first()
    return first @ np.swapaxes(first, -1, -2)


def tangent_frame(jet: Jet3) -> Tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt tangent frame: e1 = f_u/‖f_u‖, e2 from f_v."""
    e1 = jet.fu / np.linalg.norm(jet.fu, axis=-1, keepdims=True)
    w = jet.fv - np.sum(jet.fv * e1, axis=-1, keepdims=True) * e1
    e2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    return e1, e2


def tangent_coefficients(jet: Jet3, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Coefficients ``c[..., j, w]`` with e_j = Σ_w c_jw ∂_w f."""
    first = jet.first()
    pairing = np.stack([first @ e1[..., :, None], first @ e2[..., :, None]], axis=-3)[..., 0]
    gram = metric(jet)
    # c G = P, G symmetric
    return np.swapaxes(np.linalg.solve(gram, np.swapaxes(pairing, -1, -2)), -1, -2)


def coframe(jet: Jet3, frame: AdaptedFrame) -> np.ndarray:
    """ω_j(∂_w) = ⟨f_w, e_j⟩ as ``[..., w, j]``."""
    first = jet.first()
    tangents = np.stack([frame.e1, frame.e2], axis=-2)
    return first @ np.swapaxes(tangents, -1, -2)


def normal_part(x: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Component of ``x`` orthogonal to span(e1, e2)."""
    return (x - np.sum(x * e1, axis=-1, keepdims=True) * e1
            - np.sum(x * e2, axis=-1, keepdims=True) * e2)


def second_fundamental_ambient(jet: Jet3, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """α(e_j, e_k) as ambient vectors, shape ``(..., 2, 2, 4)``."""
    c = tangent_coefficients(jet, e1, e2)
    hess = jet.second()
    alpha = np.einsum('...jw,...kx,...wxi->...jki', c, c, hess)
    return normal_part(alpha, e1[..., None, None, :], e2[..., None, None, :])


def axis_seed(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """First ambient axis whose angle to the tangent plane exceeds the seed tolerance."""
    axes = np.eye(4)
    normal = normal_part(axes, e1[..., None, :], e2[..., None, :])
    sines = np.linalg.norm(normal, axis=-1)
    ok = sines > np.sin(FRAME_SEED_ANGLE)
    index = np.argmax(ok, axis=-1)
    return axes[index]


def frame_from_normal(e1: np.ndarray, e2: np.ndarray, seed: np.ndarray,
                      lam: Optional[np.ndarray] = None) -> AdaptedFrame:
    """Complete a tangent frame with the unit normal part of ``seed`` and e4 by orientation.

    Raises:
        MaskViolation: If the seed is tangent at some point.
    """
    n = normal_part(seed, e1, e2)
    norm = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(~(norm > 1e-8)):
        raise MaskViolation('normal seed is tangent to the surface', 'adapted_frame')
    e3 = n / norm
    e4 = cross4(e1, e2, e3)
    return AdaptedFrame(e1, e2, e3, e4, lam)


def frame_from_jet(chart: SurfaceChart, jet: Jet3,
                   seed: Optional[np.ndarray] = None) -> AdaptedFrame:
    """Adapted frame of a jet with the normal frame seeded by ``seed`` or an ambient axis."""
    e1, e2 = tangent_frame(jet)
    if seed is None:
        seed = axis_seed(e1, e2)
    lam = np.linalg.norm(jet.fu, axis=-1) if chart.isothermal else None
    return frame_from_normal(e1, e2, seed, lam)


def adapted_frame(chart: SurfaceChart, u, v, seed: Optional[np.ndarray] = None) -> AdaptedFrame:
    """Deterministic adapted frame of a chart.

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        seed: Optional ambient vector whose normal part defines e3.

    Returns:
        e1 = f_u/‖f_u‖, e2 by oriented Gram-Schmidt, e3 from the seed, e4 by
        det[e1 e2 e3 e4] = 1.

    Raises:
        DegenerateImmersion: If the chart is singular at a point.
    """
    return frame_from_jet(chart, eval_jet(chart, u, v), seed)


def adapted_rule(chart: SurfaceChart, u, v,
                 reference: Optional[AdaptedFrame] = None) -> AdaptedFrame:
    """Frame rule of [adapted_frame][bonnetlab.surface.adapted_frame] seeded by the reference e3."""
    return adapted_frame(chart, u, v, None if reference is None else reference.e3)


def connection_sample(chart: SurfaceChart, u, v, frame_rule: Optional[FrameRule] = None,
                      step: float = H_CONN) -> ConnectionSample:
    """Connection forms of a frame field by central differences of the frame.

    ω_kl(e_j) = ⟨∂_{e_j} e_k, e_l⟩ is assembled from five-point derivatives
    of the frame along u and v and the coordinates of e_j in (∂_u, ∂_v).

    Args:
        chart: Chart to evaluate.
        u: Coordinates along u.
        v: Coordinates along v.
        frame_rule: Pointwise frame field; defaults to the adapted frame.
        step: Stencil step.

    Returns:
        Connection sample at every point.

    Raises:
        MaskViolation: If the frame rule is undefined at a stencil point.
    """
    rule = frame_rule or adapted_rule
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    jet = eval_jet(chart, u, v)
    centre = rule(chart, u, v, None)
    mats = centre.matrix()
    derivs = []
    for axis in range(2):
        acc = np.zeros_like(mats)
        for k, w in FIRST_STENCIL:
            du, dv = (k * step, 0.0) if axis == 0 else (0.0, k * step)
            acc = acc + w * rule(chart, u + du, v + dv, centre).matrix()
        derivs.append(acc / (12.0 * step))
    dframe = np.stack(derivs, axis=-3)
    c = tangent_coefficients(jet, centre.e1, centre.e2)
    omega = np.einsum('...jw,...wki,...li->...jkl', c, dframe, mats)
    sample = ConnectionSample(centre, omega, coframe(jet, centre))
    if chart.isothermal:
        sample = _with_isothermal_check(chart, jet, sample)
    return sample


def _with_isothermal_check(chart: SurfaceChart, jet: Jet3,
                           sample: ConnectionSample) -> ConnectionSample:
    lam = np.linalg.norm(jet.fu, axis=-1)
    aligned = np.sum(sample.frame.e1 * jet.fu, axis=-1) / lam
    if np.any(np.abs(aligned - 1.0) > 1e-9):
        return sample
    lam_u = np.sum(jet.fu * jet.fuu, axis=-1) / lam
    lam_v = np.sum(jet.fu * jet.fuv, axis=-1) / lam
    expected = np.stack([-lam_v / lam ** 2, lam_u / lam ** 2], axis=-1)
    residual = np.linalg.norm(sample.omega12 - expected, axis=-1)
    scale = np.maximum(1.0, np.linalg.norm(expected, axis=-1))
    if residual.size and np.max(residual / scale) > 1e-6:
        _logger.warning('ω12 deviates from ⋆d log λ by %.3e on chart %s',
                        float(np.max(residual)), chart.name)
    return ConnectionSample(sample.frame, sample.omega, sample.coframe, residual)


def sample_grid(chart: SurfaceChart, nu: int, nv: Optional[int] = None,
                domain: Optional[Tuple[float, float, float, float]] = None) -> SampleGrid:
    """Grid over a chart (or a subdomain of it) with the chart's periodicity.

    Periodic axes are only sampled as such when the full period is covered;
    charts with poles sample cell midpoints in v.

    Args:
        chart: Chart to sample.
        nu: Samples along u.
        nv: Samples along v; ``nu`` when omitted.
        domain: Subrectangle (u0, u1, v0, v1); the chart domain when omitted.

    Returns:
        The sample grid.
    """
    nv = nu if nv is None else nv
    full = domain is None or tuple(domain) == tuple(chart.domain)
    domain = tuple(chart.domain if domain is None else domain)
    return SampleGrid(nu, nv, domain, chart.periodic_u and full, chart.periodic_v and full,
                      chart.poles and full)
