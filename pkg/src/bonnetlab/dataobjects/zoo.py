"""Data objects of the surface catalog."""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Tuple

import numpy as np

from numpy.polynomial import Polynomial

from bonnetlab.dataobjects.surface import SurfaceChart


@dataclass(frozen=True)
class PlanarCurve:
    """Unit-speed planar curve given by its curvature as a function of arclength.

    ``nodes`` holds (x, y, τ) at ``s_range[0] + k * step``; positions between
    nodes are re-integrated from the nearest node.

    _See Also_:
        [curve_from_curvature][bonnetlab.zoo.curve_from_curvature]
    """

    curvature: Polynomial
    """Signed curvature k(s)."""

    s_range: Tuple[float, float]
    """Arclength interval covered by the dense nodes."""

    step: float
    """Spacing of the dense nodes."""

    nodes: np.ndarray
    """(x, y, τ) at the dense nodes, shape ``(n, 3)``."""


@dataclass(frozen=True)
class ZooEntry:
    """A named chart constructor of the catalog."""

    name: str
    """Catalog name."""

    builder: Callable[..., SurfaceChart]
    """Constructor taking the entry parameters as keyword arguments."""

    defaults: Dict[str, Any] = field(default_factory=dict)
    """Default parameters."""

    summary: str = field(default_factory=str)
    """One-line description."""
