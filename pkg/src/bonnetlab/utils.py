"""bonnetlab utility methods/objects."""

import logging
import os

from argparse import Action
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import scipy.linalg

from bonnetlab.config import CHUNK_SIZE, THREADS_ENVVAR

_logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

FIRST_STENCIL: Tuple[Tuple[int, float], ...] = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
"""Five-point fourth-order first derivative (offset, weight), divided by 12h."""


class EnvDefault(Action):
    """Argparse action whose default is read from an environment variable."""

    def __init__(self, envvar: str, required=True, default=None, **kwargs) -> None:
        """Initialize the action.

        Args:
            envvar: Name of the environment variable to read the argument value from.
            required: ```True``` to make the argument mandatory, otherwise ```False```.
            default: Default value if neither the user nor the environment provides one.
            kwargs: Extra argument configuration options.
        """
        if envvar and os.getenv(envvar):
            default = os.getenv(envvar)

        if required and default is not None:
            required = False

        super(EnvDefault, self).__init__(
            default=default,
            required=required,
            **kwargs
        )

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)


def thread_count(requested: Optional[int] = None) -> int:
    """Number of worker threads allowed for grid and family sweeps.

    Args:
        requested: Explicit cap; when omitted, ``BONNETLAB_THREADS`` is consulted.

    Returns:
        A positive thread count.
    """
    if requested is None:
        env = os.getenv(THREADS_ENVVAR)
        if env:
            try:
                requested = int(env)
            except ValueError:
                _logger.warning('ignoring non-integer %s=%r', THREADS_ENVVAR, env)
    if requested is None or requested < 1:
        requested = os.cpu_count() or 1
    return requested


def parallel_map(fn: Callable[[T], R], items: Sequence[T],
                 threads: Optional[int] = None) -> List[R]:
    """Map ``fn`` over ``items`` on a thread pool, preserving order."""
    workers = min(thread_count(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunked(fn: Callable[[np.ndarray, np.ndarray], Any], u: np.ndarray, v: np.ndarray,
            chunk: int = CHUNK_SIZE, threads: Optional[int] = None) -> Any:
    """Evaluate a pointwise array function in flat batches on the worker pool.

    Args:
        fn: Function of flat coordinate arrays returning ``(n, ...)`` arrays,
            or a dict of such arrays.
        u: Coordinates along u, any nonempty shape.
        v: Coordinates along v, same shape as ``u``.
        chunk: Batch size.
        threads: Worker cap, see [thread_count][bonnetlab.utils.thread_count].

    Returns:
        ``fn`` values reshaped to ``u.shape + trailing`` (per key for dicts).
    """
    shape = np.shape(u)
    uf = np.ravel(u)
    vf = np.ravel(v)
    bounds = [(i, min(i + chunk, uf.size)) for i in range(0, uf.size, chunk)]
    parts = parallel_map(lambda b: fn(uf[b[0]:b[1]], vf[b[0]:b[1]]), bounds, threads)

    def join(arrays):
        out = np.concatenate(arrays)
        return out.reshape(shape + out.shape[1:])

    if isinstance(parts[0], dict):
        return {key: join([part[key] for part in parts]) for key in parts[0]}
    return join(parts)


def sign_value(sign: str) -> float:
    """+1.0 for ``+`` and -1.0 for ``-``."""
    if sign == '+':
        return 1.0
    if sign == '-':
        return -1.0
    raise ValueError(f'sign must be "+" or "-", got {sign!r}')


def stencil_derivatives(fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                        u: np.ndarray, v: np.ndarray, step: float) -> np.ndarray:
    """Fourth-order central first derivatives of a pointwise function.

    Args:
        fn: Array function of (u, v) returning ``(..., *trailing)``.
        u: Evaluation coordinates.
        v: Evaluation coordinates.
        step: Stencil step.

    Returns:
        Array of shape ``(..., 2, *trailing)`` holding the u and v derivatives.
    """
    du = sum(w * fn(u + k * step, v) for k, w in FIRST_STENCIL) / (12.0 * step)
    dv = sum(w * fn(u, v + k * step) for k, w in FIRST_STENCIL) / (12.0 * step)
    return np.stack([du, dv], axis=np.ndim(u))


def grid_derivative(values: np.ndarray, step: float, axis: int, periodic: bool) -> np.ndarray:
    """Differentiate sampled values along a grid axis.

    Periodic axes without missing values are differentiated spectrally.
    Otherwise a fourth-order central stencil is used, with fourth-order
    one-sided stencils at the two first and last nodes of open axes. NaN
    entries (masked samples) propagate to every derivative whose stencil
    touches them.

    Args:
        values: Sampled field.
        step: Grid spacing along ``axis``.
        axis: Axis to differentiate along.
        periodic: Whether the axis wraps around.

    Returns:
        Derivative array of the same shape as ``values``.
    """
    values = np.asarray(values)
    if periodic and np.all(np.isfinite(values)):
        n = values.shape[axis]
        k = np.fft.fftfreq(n, d=step) * 2.0 * np.pi
        if n % 2 == 0:
            k[n // 2] = 0.0
        shape = [1] * values.ndim
        shape[axis] = n
        spectrum = np.fft.fft(values, axis=axis) * (1j * k.reshape(shape))
        result = np.fft.ifft(spectrum, axis=axis)
        return result if np.iscomplexobj(values) else result.real
    moved = np.moveaxis(values, axis, 0)
    out = np.empty_like(moved)
    if periodic:
        out[...] = sum(w * np.roll(moved, -k, axis=0) for k, w in FIRST_STENCIL)
    else:
        out[2:-2] = sum(w * moved[2 + k:moved.shape[0] - 2 + k] for k, w in FIRST_STENCIL)
        out[0] = -25 * moved[0] + 48 * moved[1] - 36 * moved[2] + 16 * moved[3] - 3 * moved[4]
        out[1] = -3 * moved[0] - 10 * moved[1] + 18 * moved[2] - 6 * moved[3] + moved[4]
        out[-1] = 25 * moved[-1] - 48 * moved[-2] + 36 * moved[-3] - 16 * moved[-4] + 3 * moved[-5]
        out[-2] = 3 * moved[-1] + 10 * moved[-2] - 18 * moved[-3] + 6 * moved[-4] - moved[-5]
    return np.moveaxis(out / (12.0 * step), 0, axis)


def wrap_angle(angle: np.ndarray) -> np.ndarray:
    """Reduce angles to [-π, π)."""
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


def unwrap_rows(angle: np.ndarray) -> np.ndarray:
    """Unwrap a grid of angles along rows, then along the first column.

    Every jump larger than π is corrected to the nearest branch so that the
    field becomes a continuous section wherever it is smooth.
    """
    out = np.unwrap(angle, axis=1)
    first = np.unwrap(out[:, 0])
    return out + (first - out[:, 0])[:, None]


def cross4(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vector X with ⟨X, d⟩ = det[a b c d] for every d (4-d cross product)."""
    rows = np.stack(np.broadcast_arrays(a, b, c), axis=-2)
    out = np.empty(rows.shape[:-2] + (4,))
    for i in range(4):
        minor = np.delete(rows, i, axis=-1)
        out[..., i] = (-1) ** (i + 3) * np.linalg.det(minor)
    return out


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bivector a∧b as the skew matrix a bᵀ − b aᵀ."""
    return a[..., :, None] * b[..., None, :] - b[..., :, None] * a[..., None, :]


def polar_orthonormalize(mats: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrices (polar factor) of a stack of square matrices."""
    u, _, vh = np.linalg.svd(mats)
    return u @ vh


def orthogonal_fit(source: np.ndarray, target: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """Least-squares orthogonal map and translation taking ``source`` onto ``target``.

    The map ranges over all of O(d), reflections included.

    Args:
        source: Points of shape ``(n, d)``.
        target: Points of shape ``(n, d)``.

    Returns:
        Orthogonal ``R``, translation ``t`` and the RMS residual of ``R x + t``.
    """
    centroid_s = source.mean(axis=0)
    centroid_t = target.mean(axis=0)
    fitted, _ = scipy.linalg.orthogonal_procrustes(source - centroid_s, target - centroid_t)
    rotation = fitted.T
    translation = centroid_t - rotation @ centroid_s
    residual = target - (source @ rotation.T + translation)
    rms = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=-1))))
    return rotation, translation, rms


def finite_max(values: Iterable[float]) -> float:
    """Maximum of the finite entries, 0 when there are none."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, float)
    arr = arr[np.isfinite(arr)]
    return float(arr.max()) if arr.size else 0.0
