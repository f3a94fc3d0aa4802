"""Catalog of analytic-jet test surfaces.

Every entry builds a [SurfaceChart][bonnetlab.dataobjects.surface.SurfaceChart]
with exact jets and a list of certified facts. A fact is never claimed
without a check in `FACT_CHECKS` that verifies it on a grid.
"""

import dataclasses
import logging
import math

from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import numpy.polynomial.polynomial as P
import scipy.special

from numpy.polynomial import Polynomial

from bonnetlab.config import (
    COCLOSED_TOLERANCE,
    CURVE_STEPS,
    DEFAULT_GRID,
    DOMAIN_MARGIN,
    FACT_TOLERANCE,
    H_CONN,
    HOLOMORPHY_TOLERANCE,
)
from bonnetlab.dataobjects import CheckResult, SampleGrid
from bonnetlab.dataobjects.surface import Jet3, SurfaceChart
from bonnetlab.dataobjects.zoo import PlanarCurve, ZooEntry
from bonnetlab.exception import UnknownEntry
from bonnetlab.invariants import (
    hopf_derivative_residuals,
    point_invariants,
    second_fundamental_from_jet,
)
from bonnetlab.mixedforms import isothermicity_classify
from bonnetlab.surface import (
    adapted_rule,
    connection_sample,
    eval_jet,
    frame_from_jet,
    sample_grid,
)
from bonnetlab.utils import finite_max, stencil_derivatives

_logger = logging.getLogger(__name__)

_JET_AXES: Tuple[Tuple[int, ...], ...] = (
    (), (0,), (1,), (0, 0), (0, 1), (1, 1), (0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)
)

_REFLECTION = np.array([1.0, 1.0, 1.0, -1.0])


def _jet_from_partials(parts: Sequence[np.ndarray]) -> Jet3:
    return Jet3(*parts)


def curve_from_curvature(k, s_range: Tuple[float, float],
                         steps: int = CURVE_STEPS) -> PlanarCurve:
    """Integrate a unit-speed planar curve from its curvature.

    The curve starts at the origin, tangent to the x axis, at ``s_range[0]``.

    Args:
        k: Curvature as a `Polynomial` in arclength, or its coefficients.
        s_range: Arclength interval.
        steps: Number of RK4 steps over the interval.

    Returns:
        Dense RK4 nodes of (x, y, τ) with ẋ = cos τ, ẏ = sin τ, τ̇ = k.
    """
    curvature = k if isinstance(k, Polynomial) else Polynomial(np.atleast_1d(
        np.asarray(k, dtype=float)))
    s0, s1 = float(s_range[0]), float(s_range[1])
    if not s1 > s0:
        raise ValueError(f'empty arclength interval {s_range}')
    step = (s1 - s0) / steps
    nodes = np.zeros((steps + 1, 3))
    for i in range(steps):
        nodes[i + 1] = _curve_step(curvature, s0 + i * step, nodes[i], step)
    return PlanarCurve(curvature, (s0, s1), step, nodes)


def _curve_rhs(k: Polynomial, s, state: np.ndarray) -> np.ndarray:
    tau = state[..., 2]
    return np.stack([np.cos(tau), np.sin(tau), np.broadcast_to(k(s), tau.shape)], axis=-1)


def _curve_step(k: Polynomial, s, state: np.ndarray, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    hh = h[..., None]
    k1 = _curve_rhs(k, s, state)
    k2 = _curve_rhs(k, s + 0.5 * h, state + 0.5 * hh * k1)
    k3 = _curve_rhs(k, s + 0.5 * h, state + 0.5 * hh * k2)
    k4 = _curve_rhs(k, s + h, state + hh * k3)
    return state + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def curve_state(curve: PlanarCurve, s) -> np.ndarray:
    """(x, y, τ) at arbitrary arclengths by one RK4 step from the nearest dense node."""
    s = np.asarray(s, dtype=float)
    s0 = curve.s_range[0]
    index = np.clip(np.rint((s - s0) / curve.step), 0, len(curve.nodes) - 1).astype(int)
    origin = s0 + index * curve.step
    return _curve_step(curve.curvature, origin, curve.nodes[index], s - origin)


def curve_jet(curve: PlanarCurve, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """γ and its first three arclength derivatives, each of shape ``(..., 2)``."""
    state = curve_state(curve, s)
    tau = state[..., 2]
    k = curve.curvature(np.asarray(s, dtype=float))[..., None]
    dk = curve.curvature.deriv()(np.asarray(s, dtype=float))[..., None]
    tangent = np.stack([np.cos(tau), np.sin(tau)], axis=-1)
    normal = np.stack([-np.sin(tau), np.cos(tau)], axis=-1)
    return state[..., :2], tangent, k * normal, dk * normal - k * k * tangent


def _product_jet(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> Jet3:
    zero = np.zeros(a[0].shape[:-1] + (4,))
    left = [np.concatenate([x, np.zeros_like(x)], axis=-1) for x in a]
    right = [np.concatenate([np.zeros_like(y), y], axis=-1) for y in b]
    return Jet3(left[0] + right[0], left[1], right[1], left[2], zero, right[2], left[3], zero,
                zero, right[3])


def plane() -> SurfaceChart:
    """The coordinate plane f(u, v) = (u, v, 0, 0)."""
    def jets(u, v):
        zero = np.zeros(np.shape(u) + (4,))
        f = np.stack([u, v, np.zeros_like(u), np.zeros_like(u)], axis=-1)
        return Jet3(f, zero + [1.0, 0.0, 0.0, 0.0], zero + [0.0, 1.0, 0.0, 0.0],
                    *([zero] * 7))

    return SurfaceChart('plane', (-1.0, 1.0, -1.0, 1.0), jet_source=jets, isothermal=True,
                        facts=('flat_normal_bundle', 'minimal'))


def product_circles(r1: float = 0.5, r2: float = 1.0) -> SurfaceChart:
    """Clifford-type torus γ₁ × γ₂ of two circles parametrized by arclength.

    Args:
        r1: Radius of the first circle (curvature k₁ = 1/r₁).
        r2: Radius of the second circle.
    """
    if r1 <= 0 or r2 <= 0:
        raise ValueError('circle radii must be positive')

    def circle(s, r):
        t = s / r
        c, n = np.cos(t), np.sin(t)
        return (np.stack([r * c, r * n], axis=-1), np.stack([-n, c], axis=-1),
                np.stack([-c, -n], axis=-1) / r, np.stack([n, -c], axis=-1) / r ** 2)

    def jets(u, v):
        return _product_jet(circle(u, r1), circle(v, r2))

    return SurfaceChart('product_circles', (0.0, 2.0 * math.pi * r1, 0.0, 2.0 * math.pi * r2),
                        periodic_u=True, periodic_v=True, jet_source=jets, isothermal=True,
                        euler_characteristic=0, normal_euler_number=0,
                        facts=('flat_normal_bundle', 'parallel_H', 'isothermic'))


def _linear_through_origin(k: Polynomial) -> bool:
    coef = k.trim().coef
    return len(coef) == 2 and coef[0] == 0.0 and coef[1] != 0.0


def product_curves(k1: Sequence[float] = (0.0, 1.0), k2: Sequence[float] = (0.0, 1.0),
                   domain: Sequence[float] = (0.5, 1.5, 0.5, 1.5)) -> SurfaceChart:
    """Product γ₁ × γ₂ of two planar curves with polynomial curvatures.

    Args:
        k1: Curvature coefficients of the first curve in its arclength.
        k2: Curvature coefficients of the second curve.
        domain: Arclength rectangle (u0, u1, v0, v1).
    """
    u0, u1, v0, v1 = (float(x) for x in domain)
    p1 = Polynomial(np.atleast_1d(np.asarray(k1, dtype=float)))
    p2 = Polynomial(np.atleast_1d(np.asarray(k2, dtype=float)))
    first = curve_from_curvature(p1, (u0 - DOMAIN_MARGIN, u1 + DOMAIN_MARGIN))
    second = curve_from_curvature(p2, (v0 - DOMAIN_MARGIN, v1 + DOMAIN_MARGIN))

    def jets(u, v):
        return _product_jet(curve_jet(first, u), curve_jet(second, v))

    facts = ['flat_normal_bundle', 'isothermic']
    if _linear_through_origin(p1) and np.array_equal(p1.trim().coef, p2.trim().coef):
        facts += ['strongly_iso_isothermic', 'vertically_harmonic_minus']
    return SurfaceChart('product_curves', (u0, u1, v0, v1), jet_source=jets, isothermal=True,
                        facts=tuple(facts))


def _ellipsoid(name: str, a: float, b: float, c: float,
               seeds: Tuple[Tuple[float, float], ...], facts: Tuple[str, ...]) -> SurfaceChart:
    def jets(u, v):
        def part(i: int, j: int) -> np.ndarray:
            cu, su = np.cos(u + 0.5 * math.pi * i), np.sin(u + 0.5 * math.pi * i)
            sv, cv = np.sin(v + 0.5 * math.pi * j), np.cos(v + 0.5 * math.pi * j)
            z = c * cv if i == 0 else np.zeros_like(u)
            return np.stack([a * sv * cu, b * sv * su, z, np.zeros_like(u)], axis=-1)

        return Jet3(part(0, 0), part(1, 0), part(0, 1), part(2, 0), part(1, 1), part(0, 2),
                    part(3, 0), part(2, 1), part(1, 2), part(0, 3))

    return SurfaceChart(name, (0.0, 2.0 * math.pi, 0.0, math.pi), periodic_u=True,
                        jet_source=jets, poles=True, euler_characteristic=2,
                        normal_euler_number=0, singular_seeds=seeds, facts=facts)


def round_sphere(r: float = 1.0) -> SurfaceChart:
    """Round sphere of radius ``r`` in R³ ⊂ R⁴ in geographic coordinates."""
    if r <= 0:
        raise ValueError('sphere radius must be positive')
    return _ellipsoid('round_sphere', r, r, r, (), ('flat_normal_bundle', 'totally_umbilic'))


def triaxial_ellipsoid(a: float = 1.0, b: float = 1.2, c: float = 1.5) -> SurfaceChart:
    """Ellipsoid x²/a² + y²/b² + z²/c² = 1 in R³ ⊂ R⁴ with a < b < c.

    Its four umbilics lie in the xz plane at
    x = ±a √((b² − a²)/(c² − a²)), z = ±c √((c² − b²)/(c² − a²)).
    """
    if not 0 < a < b < c:
        raise ValueError(f'ellipsoid semiaxes must satisfy 0 < a < b < c, got {(a, b, c)}')
    t = math.sqrt((c * c - b * b) / (c * c - a * a))
    seeds = tuple((u, math.acos(z)) for u in (0.0, math.pi) for z in (t, -t))
    return _ellipsoid('triaxial_ellipsoid', a, b, c, seeds, ('flat_normal_bundle',))


def graph_surface(R: Sequence[Sequence[float]] = ((0.0,),),
                  S: Sequence[Sequence[float]] = ((0.0,),),
                  domain: Sequence[float] = (-1.0, 1.0, -1.0, 1.0), isothermal: bool = False,
                  name: str = 'graph_surface', facts: Tuple[str, ...] = ()) -> SurfaceChart:
    """Graph f(u, v) = (u, v, R(u, v), S(u, v)) of two polynomials.

    Args:
        R: Coefficients ``R[i][j]`` of uⁱ vʲ.
        S: Coefficients of the fourth coordinate.
        domain: Parameter rectangle.
        isothermal: Whether the graph is conformal (holomorphic curves).
        name: Chart name.
        facts: Certified facts.
    """
    coeffs = [np.atleast_2d(np.asarray(R, dtype=float)), np.atleast_2d(np.asarray(S, dtype=float))]

    def height(c: np.ndarray, axes: Tuple[int, ...], u, v) -> np.ndarray:
        for axis in (0, 1):
            count = axes.count(axis)
            if count:
                c = P.polyder(c, count, axis=axis)
        return P.polyval2d(u, v, c)

    def jets(u, v):
        parts = []
        for axes in _JET_AXES:
            base = np.zeros(np.shape(u) + (2,))
            if not axes:
                base = np.stack([u, v], axis=-1)
            elif len(axes) == 1:
                base[..., axes[0]] = 1.0
            tail = np.stack([height(c, axes, u, v) for c in coeffs], axis=-1)
            parts.append(np.concatenate([base, np.broadcast_to(tail, base.shape)], axis=-1))
        return _jet_from_partials(parts)

    return SurfaceChart(name, tuple(float(x) for x in domain), jet_source=jets,
                        isothermal=isothermal, facts=tuple(facts))


def holomorphic_curve(w: Sequence[float] = (0.0, 0.0, 1.0), w_imag: Sequence[float] = (),
                      domain: Sequence[float] = (-1.0, 1.0, -1.0, 1.0)) -> SurfaceChart:
    """Graph (z, w(z)) of a complex polynomial, a minimal superconformal surface.

    Args:
        w: Real parts of the coefficients of w, constant term first.
        w_imag: Imaginary parts of the coefficients (zeros when omitted).
        domain: Parameter rectangle.
    """
    n = max(len(w), len(w_imag))
    coef = np.zeros(n, dtype=complex)
    coef[:len(w)] += np.asarray(w, dtype=float)
    coef[:len(w_imag)] += 1j * np.asarray(w_imag, dtype=float)
    expanded = np.zeros((n, n), dtype=complex)
    for m, a in enumerate(coef):
        for k in range(m + 1):
            expanded[m - k, k] += a * scipy.special.comb(m, k, exact=True) * 1j ** k
    return graph_surface(expanded.real, expanded.imag, domain, isothermal=True,
                         name='holomorphic_curve', facts=('minimal', 'superconformal_plus'))


def catenoid() -> SurfaceChart:
    """Catenoid (cosh v cos u, cosh v sin u, v, 0), a minimal surface in R³ ⊂ R⁴."""
    def jets(u, v):
        def part(i: int, j: int) -> np.ndarray:
            ch = np.cosh(v) if j % 2 == 0 else np.sinh(v)
            cu, su = np.cos(u + 0.5 * math.pi * i), np.sin(u + 0.5 * math.pi * i)
            if i == 0:
                z = v if j == 0 else (np.ones_like(v) if j == 1 else np.zeros_like(v))
            else:
                z = np.zeros_like(v)
            return np.stack([ch * cu, ch * su, z, np.zeros_like(u)], axis=-1)

        return Jet3(part(0, 0), part(1, 0), part(0, 1), part(2, 0), part(1, 1), part(0, 2),
                    part(3, 0), part(2, 1), part(1, 2), part(0, 3))

    return SurfaceChart('catenoid', (0.0, 2.0 * math.pi, -1.0, 1.0), periodic_u=True,
                        jet_source=jets, isothermal=True, facts=('flat_normal_bundle', 'minimal'))


def _inversion_jet(jet: Jet3, center: np.ndarray) -> Jet3:
    x = jet.f - center
    s = 1.0 / np.sum(x * x, axis=-1)

    def dot(a, b):
        return np.sum(a * b, axis=-1)

    def ds(a):
        return -2.0 * dot(x, a) * s ** 2

    def d2s(a, b):
        return -2.0 * dot(a, b) * s ** 2 + 8.0 * dot(x, a) * dot(x, b) * s ** 3

    def d3s(a, b, c):
        return (8.0 * (dot(a, b) * dot(x, c) + dot(a, c) * dot(x, b) + dot(b, c) * dot(x, a))
                * s ** 3 - 48.0 * dot(x, a) * dot(x, b) * dot(x, c) * s ** 4)

    def d1(a):
        return a * s[..., None] + x * ds(a)[..., None]

    def d2(a, b):
        return a * ds(b)[..., None] + b * ds(a)[..., None] + x * d2s(a, b)[..., None]

    def d3(a, b, c):
        return (a * d2s(b, c)[..., None] + b * d2s(a, c)[..., None] + c * d2s(a, b)[..., None]
                + x * d3s(a, b, c)[..., None])

    p = jet.partial
    parts = []
    for axes in _JET_AXES:
        if not axes:
            value = x * s[..., None]
        elif len(axes) == 1:
            value = d1(p(*axes))
        elif len(axes) == 2:
            a, b = axes
            value = d2(p(a), p(b)) + d1(p(a, b))
        else:
            a, b, c = axes
            value = (d3(p(a), p(b), p(c)) + d2(p(a, b), p(c)) + d2(p(a, c), p(b))
                     + d2(p(b, c), p(a)) + d1(p(a, b, c)))
        parts.append(value * _REFLECTION)
    return _jet_from_partials(parts)


def inverted(chart: SurfaceChart,
             center: Sequence[float] = (0.0, -1.0, 0.0, -1.0)) -> SurfaceChart:
    """Compose a chart with the inversion in the unit sphere about ``center``.

    The inversion is followed by the reflection of the last coordinate so
    that the composite is an orientation-preserving conformal map of R⁴;
    pseudo-umbilic points keep their sign.

    Args:
        chart: Chart to transform; must stay away from ``center``.
        center: Centre of the inversion.
    """
    c = np.asarray(center, dtype=float)
    jet_source = value_source = None
    if chart.jet_source is not None:
        base_jets = chart.jet_source

        def jet_source(u, v):
            return _inversion_jet(base_jets(u, v), c)
    else:
        base_values = chart.value_source

        def value_source(u, v):
            x = base_values(u, v) - c
            return x / np.sum(x * x, axis=-1, keepdims=True) * _REFLECTION
    return dataclasses.replace(chart, name=f'inverted({chart.name})', jet_source=jet_source,
                               value_source=value_source, facts=())


def scaled(chart: SurfaceChart, factor: float = 2.0) -> SurfaceChart:
    """Compose a chart with the homothety x ↦ factor · x."""
    if factor <= 0:
        raise ValueError('scale factor must be positive')
    jet_source = value_source = None
    if chart.jet_source is not None:
        base_jets = chart.jet_source

        def jet_source(u, v):
            jet = base_jets(u, v)
            return _jet_from_partials([factor * jet.partial(*axes) for axes in _JET_AXES])
    else:
        base_values = chart.value_source

        def value_source(u, v):
            return factor * base_values(u, v)
    return dataclasses.replace(chart, name=f'scaled({chart.name})', jet_source=jet_source,
                               value_source=value_source, facts=())


def _transformed(transform: Callable[..., SurfaceChart], key: str):
    def builder(base: str, base_params: Optional[Mapping[str, Any]] = None, **kwargs):
        return transform(make(base, base_params), **{key: kwargs[key]})
    return builder


ZOO: Dict[str, ZooEntry] = {entry.name: entry for entry in (
    ZooEntry('plane', plane, {}, 'Coordinate plane'),
    ZooEntry('product_circles', product_circles, {'r1': 0.5, 'r2': 1.0},
             'Product of two circles (flat torus)'),
    ZooEntry('product_curves', product_curves,
             {'k1': (0.0, 1.0), 'k2': (0.0, 1.0), 'domain': (0.5, 1.5, 0.5, 1.5)},
             'Product of two planar curves with polynomial curvature'),
    ZooEntry('round_sphere', round_sphere, {'r': 1.0}, 'Round sphere in R3'),
    ZooEntry('triaxial_ellipsoid', triaxial_ellipsoid, {'a': 1.0, 'b': 1.2, 'c': 1.5},
             'Triaxial ellipsoid in R3'),
    ZooEntry('graph_surface', graph_surface,
             {'R': ((0.0,),), 'S': ((0.0,),), 'domain': (-1.0, 1.0, -1.0, 1.0)},
             'Graph of two polynomials'),
    ZooEntry('holomorphic_curve', holomorphic_curve,
             {'w': (0.0, 0.0, 1.0), 'w_imag': (), 'domain': (-1.0, 1.0, -1.0, 1.0)},
             'Graph of a complex polynomial'),
    ZooEntry('catenoid', catenoid, {}, 'Catenoid in R3'),
    ZooEntry('inverted', _transformed(inverted, 'center'),
             {'base': 'product_curves', 'base_params': {}, 'center': (0.0, -1.0, 0.0, -1.0)},
             'Inversion of another entry'),
    ZooEntry('scaled', _transformed(scaled, 'factor'),
             {'base': 'product_curves', 'base_params': {}, 'factor': 2.0},
             'Homothety of another entry'),
)}
"""Catalog entries by name."""


def make(name: str, params: Optional[Mapping[str, Any]] = None) -> SurfaceChart:
    """Build a catalog chart.

    Args:
        name: Entry name, see `ZOO`.
        params: Parameter overrides.

    Returns:
        The chart, with the parameters it was built from in ``params``.

    Raises:
        UnknownEntry: If no entry has this name.
        ValueError: For unknown or invalid parameters.
    """
    try:
        entry = ZOO[name]
    except KeyError:
        raise UnknownEntry(f'no zoo entry named {name!r}', 'zoo') from None
    params = dict(params or {})
    unknown = set(params) - set(entry.defaults)
    if unknown:
        raise ValueError(f'unknown parameters for {name}: {sorted(unknown)}')
    merged = {**entry.defaults, **params}
    chart = entry.builder(**merged)
    _logger.debug('built %s with %s', chart.name, merged)
    return dataclasses.replace(chart, params=merged)


def _scaled_max(values: np.ndarray, scale: np.ndarray) -> float:
    return finite_max((values / scale).ravel())


def _flat_normal_bundle(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    inv = point_invariants(chart, *grid.mesh(), hopf=False)
    return CheckResult.bound('flat_normal_bundle', _scaled_max(np.abs(inv.K_N), inv.scale ** 2),
                             FACT_TOLERANCE)


def _minimal(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    inv = point_invariants(chart, *grid.mesh(), hopf=False)
    return CheckResult.bound('minimal', _scaled_max(np.sqrt(inv.normH2), inv.scale),
                             FACT_TOLERANCE)


def _superconformal_plus(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    inv = point_invariants(chart, *grid.mesh(), hopf=False)
    return CheckResult.bound('superconformal_plus', _scaled_max(inv.B_plus, inv.scale),
                             FACT_TOLERANCE)


def _totally_umbilic(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    inv = point_invariants(chart, *grid.mesh(), hopf=False)
    worst = np.maximum(inv.B_plus, inv.B_minus)
    return CheckResult.bound('totally_umbilic', _scaled_max(worst, inv.scale), FACT_TOLERANCE)


def _isothermic(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    if not chart.isothermal:
        return CheckResult.bound('isothermic', math.inf, FACT_TOLERANCE)
    inv = point_invariants(chart, *grid.mesh(), hopf=False)
    size = np.linalg.norm(inv.data.alpha12, axis=-1)
    return CheckResult.bound('isothermic', _scaled_max(size, inv.scale), FACT_TOLERANCE)


def parallel_mean_curvature_residual(chart: SurfaceChart, u, v) -> np.ndarray:
    """‖∇⊥H‖ along ∂_u and ∂_v, relative to the curvature scale."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    centre = adapted_rule(chart, u, v, None)

    def mean(uu, vv):
        jet = eval_jet(chart, uu, vv)
        return second_fundamental_from_jet(jet, frame_from_jet(chart, jet, centre.e3)).H

    d = stencil_derivatives(mean, u, v, H_CONN)
    conn = connection_sample(chart, u, v)
    w = np.einsum('...wj,...j->...w', conn.coframe, conn.omega34)
    H = mean(u, v)
    n3 = d[..., 0] - H[..., None, 1] * w
    n4 = d[..., 1] + H[..., None, 0] * w
    scale = np.maximum(1.0, second_fundamental_from_jet(eval_jet(chart, u, v), centre).norm)
    return np.sqrt(np.sum(n3 ** 2 + n4 ** 2, axis=-1)) / scale


def _parallel_H(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    residual = parallel_mean_curvature_residual(chart, *grid.mesh())
    return CheckResult.bound('parallel_H', finite_max(residual.ravel()), HOLOMORPHY_TOLERANCE)


def _strongly_iso_isothermic(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    classes = isothermicity_classify(chart, grid, cross_check=False)
    scale2 = point_invariants(chart, *grid.mesh(), hopf=False).scale ** 2
    worst = 0.0
    for costar, mask in ((classes.costar_minus, classes.mask_minus),
                         (classes.costar_plus, classes.mask_plus)):
        worst = max(worst, finite_max((np.abs(costar) / scale2)[mask]))
    return CheckResult.bound('strongly_iso_isothermic', worst, COCLOSED_TOLERANCE)


def _vertically_harmonic_minus(chart: SurfaceChart, grid: SampleGrid) -> CheckResult:
    residuals = hopf_derivative_residuals(chart, *grid.mesh())
    return CheckResult.bound('vertically_harmonic_minus',
                             finite_max(residuals['holomorphy_minus'].ravel()),
                             HOLOMORPHY_TOLERANCE)


FACT_CHECKS: Dict[str, Callable[[SurfaceChart, SampleGrid], CheckResult]] = {
    'flat_normal_bundle': _flat_normal_bundle,
    'minimal': _minimal,
    'superconformal_plus': _superconformal_plus,
    'totally_umbilic': _totally_umbilic,
    'isothermic': _isothermic,
    'parallel_H': _parallel_H,
    'strongly_iso_isothermic': _strongly_iso_isothermic,
    'vertically_harmonic_minus': _vertically_harmonic_minus,
}
"""Check certifying each fact a catalog chart may claim."""


def verify_facts(chart: SurfaceChart, grid: Optional[SampleGrid] = None) -> Tuple[CheckResult, ...]:
    """Run the checks of every certified fact of a chart.

    Args:
        chart: Chart whose ``facts`` are verified.
        grid: Sample grid; the chart's default grid when omitted.

    Returns:
        One check per fact, in the order the chart lists them.
    """
    grid = grid or sample_grid(chart, DEFAULT_GRID)
    results = []
    for fact in chart.facts:
        check = FACT_CHECKS[fact](chart, grid)
        _logger.info('%s: %s = %.3e (tolerance %.1e)', chart.name, fact, check.value,
                     check.tolerance)
        results.append(check)
    return tuple(results)
