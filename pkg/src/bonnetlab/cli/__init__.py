"""Run-configuration loading shared by the bonnetlab CLI.

A run is described by a TOML file::

    commands = ["analyze", "index"]

    [surface]
    name = "triaxial_ellipsoid"
    [surface.params]
    a = 1.0

    [grid]
    nu = 64
    nv = 64

    [tolerances]
    index_tolerance = 0.05

    [output]
    dir = "out"

    [mates]
    sign = "-"
"""

import dataclasses
import importlib
import logging
import re

from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from bonnetlab.config import MIN_GRID, RUN_COMMANDS, TOLERANCE_KEYS
from bonnetlab.dataobjects.run import GridSpec, RunConfig, Session, SurfaceSpec
from bonnetlab.dataobjects.surface import SurfaceChart
from bonnetlab.exception import ConfigError, UnknownEntry
from bonnetlab.surface import sample_grid
from bonnetlab.zoo import make

_logger = logging.getLogger(__name__)

_LOCATION = re.compile(r'at line (\d+), column (\d+)')

_TOP_LEVEL = ('commands', 'surface', 'grid', 'tolerances', 'output') + RUN_COMMANDS

_SURFACE_KEYS = ('name', 'params', 'callable', 'domain', 'periodic_u', 'periodic_v',
                 'isothermal')


def read_run_config(path: Path) -> RunConfig:
    """Read and validate a TOML run configuration.

    Args:
        path: Configuration file.

    Returns:
        The validated configuration.

    Raises:
        ConfigError: If the file is missing, is not valid TOML or fails
            validation. Syntax errors carry the line and column.
    """
    path = Path(path)
    try:
        with path.open('rb') as infile:
            data = tomllib.load(infile)
    except OSError as error:
        raise ConfigError(f'cannot read configuration: {error.strerror}', str(path)) from error
    except tomllib.TOMLDecodeError as error:
        match = _LOCATION.search(str(error))
        line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
        message = _LOCATION.sub('', str(error)).strip(' ()')
        raise ConfigError(message, str(path), line, column) from error
    _logger.debug('loaded %s', path)
    return parse_run_config(data, path)


def parse_run_config(data: Mapping[str, Any], path: Optional[Path] = None) -> RunConfig:
    """Validate a decoded configuration mapping.

    Raises:
        ConfigError: On unknown keys, unknown commands, grids below the
            minimum size or non-positive tolerances.
    """
    where = str(path) if path else None
    _reject_unknown(data, _TOP_LEVEL, 'configuration', where)

    surface = _table(data, 'surface', where)
    _reject_unknown(surface, _SURFACE_KEYS, '[surface]', where)
    if bool(surface.get('name')) == bool(surface.get('callable')):
        raise ConfigError('[surface] needs exactly one of "name" and "callable"', where)
    spec = SurfaceSpec(
        name=str(surface.get('name', '')),
        params=dict(_table(surface, 'params', where)),
        callable=surface.get('callable'),
        domain=_domain(surface.get('domain'), '[surface] domain', where),
        periodic_u=bool(surface.get('periodic_u', False)),
        periodic_v=bool(surface.get('periodic_v', False)),
        isothermal=bool(surface.get('isothermal', False)),
    )
    if spec.callable and spec.domain is None:
        raise ConfigError('[surface] callable charts need a domain', where)

    grid = _table(data, 'grid', where)
    _reject_unknown(grid, ('nu', 'nv', 'domain'), '[grid]', where)
    defaults = GridSpec()
    grid_spec = GridSpec(int(grid.get('nu', defaults.nu)), int(grid.get('nv', defaults.nv)),
                         _domain(grid.get('domain'), '[grid] domain', where))
    _check_grid(grid_spec, where)

    commands = data.get('commands', [])
    if isinstance(commands, str) or not isinstance(commands, list):
        raise ConfigError('"commands" must be a list of command names', where)
    for name in commands:
        if name not in RUN_COMMANDS:
            raise ConfigError(f'unknown command {name!r}', where)

    tolerances = {key: _tolerance(key, value, where)
                  for key, value in _table(data, 'tolerances', where).items()}

    output = _table(data, 'output', where)
    _reject_unknown(output, ('dir',), '[output]', where)
    out_dir = Path(output['dir']) if 'dir' in output else RunConfig.output_dir
    if path is not None and not out_dir.is_absolute():
        out_dir = Path(path).parent / out_dir

    sections = {name: dict(_table(data, name, where)) for name in RUN_COMMANDS if name in data}
    return RunConfig(spec, grid_spec, tuple(commands), tolerances, out_dir, sections,
                     Path(path) if path else None)


def apply_overrides(config: RunConfig, out: Optional[str] = None, grid: Optional[str] = None,
                    tolerances: Iterable[str] = ()) -> RunConfig:
    """Apply ``--out``, ``--grid NxM`` and ``--tol KEY=VAL`` on top of a configuration."""
    changes: Dict[str, Any] = {}
    if out:
        changes['output_dir'] = Path(out)
    if grid:
        nu, nv = parse_grid(grid)
        spec = dataclasses.replace(config.grid, nu=nu, nv=nv)
        _check_grid(spec, None)
        changes['grid'] = spec
    overrides = dict(config.tolerances)
    for item in tolerances or ():
        key, value = parse_tolerance(item)
        overrides[key] = value
    changes['tolerances'] = overrides
    return dataclasses.replace(config, **changes)


def parse_grid(text: str) -> Tuple[int, int]:
    """Parse ``NxM``."""
    match = re.fullmatch(r'\s*(\d+)\s*[xX]\s*(\d+)\s*', text)
    if not match:
        raise ConfigError(f'grid must look like 64x64, got {text!r}')
    return int(match.group(1)), int(match.group(2))


def parse_tolerance(text: str) -> Tuple[str, float]:
    """Parse ``KEY=VAL`` into a validated tolerance override."""
    key, sep, value = text.partition('=')
    if not sep:
        raise ConfigError(f'tolerance override must look like KEY=VAL, got {text!r}')
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f'tolerance {key.strip()!r} is not a number: {value!r}') from None
    return key.strip().lower(), _tolerance(key.strip().lower(), number, None)


def build_chart(spec: SurfaceSpec) -> SurfaceChart:
    """Build the chart a surface spec names.

    Raises:
        ConfigError: For unknown catalog entries or parameters and for
            callables that cannot be imported.
    """
    if spec.name:
        try:
            return make(spec.name, spec.params)
        except UnknownEntry as error:
            raise ConfigError(error.message) from error
        except (TypeError, ValueError) as error:
            raise ConfigError(f'surface {spec.name}: {error}') from error
    module_name, _, attribute = spec.callable.partition(':')
    try:
        source = getattr(importlib.import_module(module_name), attribute)
    except (ImportError, AttributeError, ValueError) as error:
        raise ConfigError(f'cannot import chart {spec.callable!r}: {error}') from error
    return SurfaceChart(name=spec.callable, domain=tuple(spec.domain),
                        periodic_u=spec.periodic_u, periodic_v=spec.periodic_v,
                        value_source=source, isothermal=spec.isothermal)


def open_session(config: RunConfig, threads: Optional[int] = None) -> Session:
    """Build the chart and grid of a configuration."""
    chart = build_chart(config.surface)
    grid = sample_grid(chart, config.grid.nu, config.grid.nv, config.grid.domain)
    _logger.info('session on %s with a %dx%d grid', chart.name, grid.nu, grid.nv)
    return Session(config, chart, grid, threads)


def _table(data: Mapping[str, Any], key: str, where: Optional[str]) -> Mapping[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f'"{key}" must be a table', where)
    return value


def _reject_unknown(data: Mapping[str, Any], allowed: Sequence[str], context: str,
                    where: Optional[str]) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f'unknown key(s) in {context}: {", ".join(unknown)}', where)


def _domain(value: Any, context: str,
            where: Optional[str]) -> Optional[Tuple[float, float, float, float]]:
    if value is None:
        return None
    try:
        u0, u1, v0, v1 = (float(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError(f'{context} must be four numbers [u0, u1, v0, v1]', where) from None
    if not (u0 < u1 and v0 < v1):
        raise ConfigError(f'{context} must satisfy u0 < u1 and v0 < v1', where)
    return (u0, u1, v0, v1)


def _check_grid(spec: GridSpec, where: Optional[str]) -> None:
    if spec.nu < MIN_GRID or spec.nv < MIN_GRID:
        raise ConfigError(f'grid {spec.nu}x{spec.nv} is below the minimum '
                          f'{MIN_GRID}x{MIN_GRID}', where)


def _tolerance(key: str, value: Any, where: Optional[str]) -> float:
    if key not in TOLERANCE_KEYS:
        raise ConfigError(f'unknown tolerance {key!r}', where)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f'tolerance {key!r} must be positive, got {value!r}', where)
    return float(value)
