"""Path integration of first-order systems over sample lattices.

Every path integral in bonnetlab (θ± solutions, mate reconstruction, log L
and bending fields, factorization radii) goes through
[integrate_lattice][bonnetlab.integrate.integrate_lattice]: the grid is
refined by an even factor, source geometry is sampled at lattice nodes, and
an RK4 step spans two lattice cells so that its middle stages land on the
lattice node in between.
"""

import logging

from typing import Any, Callable, Optional, Tuple

import numpy as np

from bonnetlab.config import LATTICE_REFINEMENT
from bonnetlab.dataobjects import LatticeSolution, SampleGrid
from bonnetlab.utils import chunked

_logger = logging.getLogger(__name__)

LatticeRhs = Callable[[int, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
"""(axis, lattice u indices, lattice v indices, states ``(batch, d)``) -> derivative along axis."""

Projection = Callable[[np.ndarray], np.ndarray]
"""Map applied to the states ``(batch, d)`` after every step."""


def sample_lattice(fn: Callable[[np.ndarray, np.ndarray], Any], grid: SampleGrid,
                   refinement: int = LATTICE_REFINEMENT, threads: Optional[int] = None) -> Any:
    """Evaluate a pointwise function on every node of the refined lattice.

    Results are indexed ``[iu, iv, ...]`` by lattice node, matching the
    indices passed to a [LatticeRhs][bonnetlab.integrate.LatticeRhs].
    """
    lattice = grid.refined(refinement)
    uu, vv = lattice.mesh()
    return chunked(fn, uu, vv, threads=threads)


def integrate_lattice(rhs: LatticeRhs, y0, grid: SampleGrid,
                      refinement: int = LATTICE_REFINEMENT,
                      base: Optional[Tuple[int, int]] = None,
                      project: Optional[Projection] = None) -> LatticeSolution:
    """Integrate a path-independent system from a base node to every grid node.

    The row-first march integrates along u through the base node, then
    along v from every node of that row. The column-first march does the
    same with the axes swapped; the discrepancy between both is the closure
    residual.

    Args:
        rhs: Derivative of the state along u (axis 0) or v (axis 1).
        y0: Initial state at the base node, shape ``(d,)``.
        grid: Grid the values are reported on.
        refinement: Even number of lattice cells per grid step.
        base: Grid index of the base node; the grid centre by default.
        project: Optional map applied after each RK4 step.

    Returns:
        States at the grid nodes for both marching orders.
    """
    if refinement < 2 or refinement % 2:
        raise ValueError(f'lattice refinement must be even, got {refinement}')
    lattice = grid.refined(refinement)
    if base is None:
        base = (grid.nu // 2, grid.nv // 2)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    start = (base[0] * refinement, base[1] * refinement)
    steps = (lattice.du, lattice.dv)
    sizes = (lattice.nu, lattice.nv)
    outputs = []
    for order in ((0, 1), (1, 0)):
        outputs.append(_sweep(rhs, y0, order, start, sizes, steps, refinement, project))
    solution = LatticeSolution(grid, outputs[0], outputs[1], tuple(base), refinement)
    _logger.debug('lattice integration on %dx%d (refinement %d): closure %.3e',
                  grid.nu, grid.nv, refinement, solution.closure_residual)
    return solution


def _sweep(rhs: LatticeRhs, y0: np.ndarray, order: Tuple[int, int], start: Tuple[int, int],
           sizes: Tuple[int, int], steps: Tuple[float, float], refinement: int,
           project: Optional[Projection]) -> np.ndarray:
    first, second = order
    line = _march(rhs, y0[None, :], first, start[first], np.array([start[second]]),
                  sizes[first], steps[first], project)
    nodes = np.arange(0, sizes[first], refinement)
    seeds = line[nodes, 0, :]
    block = _march(rhs, seeds, second, start[second], nodes, sizes[second], steps[second],
                   project)
    values = block[::refinement]
    # (second, first, d) -> (u, v, d)
    values = np.swapaxes(values, 0, 1) if first == 0 else values
    return values


def _march(rhs: LatticeRhs, y: np.ndarray, axis: int, start: int, fixed: np.ndarray,
           length: int, step: float, project: Optional[Projection]) -> np.ndarray:
    out = np.full((length,) + y.shape, np.nan)
    out[start] = y
    for direction in (1, -1):
        state = y
        k = start
        h = 2.0 * step * direction
        while 0 <= k + 2 * direction < length:
            mid, end = k + direction, k + 2 * direction
            k1 = _evaluate(rhs, axis, k, fixed, state)
            k2 = _evaluate(rhs, axis, mid, fixed, state + 0.5 * h * k1)
            k3 = _evaluate(rhs, axis, mid, fixed, state + 0.5 * h * k2)
            k4 = _evaluate(rhs, axis, end, fixed, state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if project is not None:
                state = project(state)
            out[end] = state
            k = end
    return out


def _evaluate(rhs: LatticeRhs, axis: int, k: int, fixed: np.ndarray,
              state: np.ndarray) -> np.ndarray:
    moving = np.full(fixed.shape, k)
    if axis == 0:
        return rhs(axis, moving, fixed, state)
    return rhs(axis, fixed, moving, state)
