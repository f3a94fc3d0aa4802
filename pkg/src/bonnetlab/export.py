"""Artifact writers: JSON reports, OBJ meshes, CSV grids and polylines.

Nothing written here depends on the clock or the host, so identical inputs
produce byte-identical files.
"""

import csv
import dataclasses
import json
import logging
import math

from enum import Enum
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np

from bonnetlab.config import REPORT_DOWNSAMPLE
from bonnetlab.dataobjects import CheckResult, SampleGrid
from bonnetlab.dataobjects.run import Report

_logger = logging.getLogger(__name__)


def check_to_dict(check: CheckResult) -> dict:
    """JSON block of a check; ``pass`` is recomputable from the other fields."""
    return {
        'name': check.name,
        'value': check.value,
        'target': check.target,
        'tolerance': check.tolerance,
        'abs_error': check.abs_error,
        'kind': check.kind,
        'pass': check.passed,
    }


def downsample(values: np.ndarray, limit: int = REPORT_DOWNSAMPLE) -> np.ndarray:
    """Every k-th sample per grid axis so that at most ``limit`` remain."""
    values = np.asarray(values)
    if values.ndim < 2:
        return values
    su = max(1, math.ceil(values.shape[0] / limit))
    sv = max(1, math.ceil(values.shape[1] / limit))
    return values[::su, ::sv]


def to_jsonable(value: Any) -> Any:
    """Convert results into plain JSON types; non-finite floats become ``None``."""
    if isinstance(value, CheckResult):
        return check_to_dict(value)
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def report_json(report: Report) -> str:
    """Serialize a report with sorted keys and two-space indentation."""
    payload = {
        'provenance': report.provenance,
        'commands': report.blocks,
        'checks': {name: list(checks) for name, checks in report.checks.items()},
        'pass': report.passed,
    }
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_report(report: Report, directory: Path) -> Path:
    """Write ``report.json`` into ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / 'report.json'
    path.write_text(report_json(report), encoding='utf-8')
    _logger.info('wrote %s', path)
    return path


def grid_triangles(nu: int, nv: int, periodic_u: bool = False,
                   periodic_v: bool = False) -> np.ndarray:
    """Triangles of a vertex grid, counterclockwise in the (u, v) parameter plane.

    Vertex ``(i, j)`` has the 0-based index ``i * nv + j``.
    """
    cells_u = nu if periodic_u else nu - 1
    cells_v = nv if periodic_v else nv - 1
    faces = []
    for i in range(cells_u):
        for j in range(cells_v):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces.append((a, b, c))
            faces.append((a, c, d))
    return np.asarray(faces, dtype=int).reshape(-1, 3)


def write_obj(path: Path, positions: np.ndarray, grid: SampleGrid) -> Tuple[Path, Path]:
    """Write a sampled surface as OBJ plus a CSV sidecar with the fourth coordinate.

    Args:
        path: Target ``.obj`` file.
        positions: Points ``(nu, nv, 4)``.
        grid: Grid the points were sampled on (for periodic closing).

    Returns:
        Paths of the OBJ file and the ``.w.csv`` sidecar.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    points = np.asarray(positions, dtype=float).reshape(-1, 4)
    faces = grid_triangles(grid.nu, grid.nv, grid.periodic_u, grid.periodic_v)
    lines = [f'# bonnetlab mesh {grid.nu}x{grid.nv}']
    lines += [f'v {x:.12g} {y:.12g} {z:.12g}' for x, y, z in points[:, :3]]
    lines += [f'f {a + 1} {b + 1} {c + 1}' for a, b, c in faces]
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    sidecar = path.with_suffix('.w.csv')
    with sidecar.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['vertex', 'w'])
        writer.writerows((k + 1, f'{w:.12g}') for k, w in enumerate(points[:, 3]))
    _logger.info('wrote %s (%d vertices, %d faces)', path, len(points), len(faces))
    return path, sidecar


def write_grid_csv(path: Path, grid: SampleGrid, values: np.ndarray) -> Path:
    """Write a scalar grid as rows ``u, v, value``; NaN becomes an empty cell."""
    path.parent.mkdir(parents=True, exist_ok=True)
    uu, vv = grid.mesh()
    values = np.asarray(values, dtype=float)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['u', 'v', 'value'])
        for a, b, x in zip(uu.ravel(), vv.ravel(), values.ravel()):
            writer.writerow([f'{a:.12g}', f'{b:.12g}', f'{x:.12g}' if math.isfinite(x) else ''])
    return path


def write_polylines(path: Path, lines: Sequence[np.ndarray]) -> Path:
    """Write parameter-space polylines as rows ``line, point, u, v``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['line', 'point', 'u', 'v'])
        for k, line in enumerate(lines):
            for m, (a, b) in enumerate(np.asarray(line, dtype=float)):
                writer.writerow([k, m, f'{a:.12g}', f'{b:.12g}'])
    return path


def read_polylines(path: Path) -> List[np.ndarray]:
    """Read polylines written by [write_polylines][bonnetlab.export.write_polylines]."""
    lines: List[List[Tuple[float, float]]] = []
    with path.open(newline='', encoding='utf-8') as handle:
        for row in csv.DictReader(handle):
            k = int(row['line'])
            while len(lines) <= k:
                lines.append([])
            lines[k].append((float(row['u']), float(row['v'])))
    return [np.asarray(line) for line in lines]


def artifact_names(paths: Iterable[Path], root: Path) -> List[str]:
    """Artifact paths relative to the output directory, for the report."""
    return sorted(str(Path(p).relative_to(root)) for p in paths)
