"""Data objects describing a lab run: its configuration, session state and report."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from bonnetlab.config import DEFAULT_GRID
from bonnetlab.dataobjects import CheckResult, SampleGrid
from bonnetlab.dataobjects.surface import SurfaceChart


@dataclass(frozen=True)
class SurfaceSpec:
    """Surface to analyze: a catalog entry or an external chart function.

    _See Also_:
        [make][bonnetlab.zoo.make]
    """

    name: str = field(default_factory=str)
    """Catalog name; empty when ``callable`` is given."""

    params: Dict[str, Any] = field(default_factory=dict)
    """Catalog parameter overrides."""

    callable: Optional[str] = None
    """``module:function`` of a value-only chart ``(u, v) -> (..., 4)``."""

    domain: Optional[Tuple[float, float, float, float]] = None
    """Domain of an external chart."""

    periodic_u: bool = False
    """External chart is periodic in u."""

    periodic_v: bool = False
    """External chart is periodic in v."""

    isothermal: bool = False
    """External chart is conformal."""


@dataclass(frozen=True)
class GridSpec:
    """Requested sample grid."""

    nu: int = DEFAULT_GRID
    """Samples along u."""

    nv: int = DEFAULT_GRID
    """Samples along v."""

    domain: Optional[Tuple[float, float, float, float]] = None
    """Subdomain (u0, u1, v0, v1); the chart domain when omitted."""


@dataclass(frozen=True)
class RunConfig:
    """A parsed and validated run configuration.

    _See Also_:
        [read_run_config][bonnetlab.cli.read_run_config]
    """

    surface: SurfaceSpec
    """Surface to analyze."""

    grid: GridSpec = field(default_factory=GridSpec)
    """Sample grid."""

    commands: Tuple[str, ...] = field(default_factory=tuple)
    """Commands executed in order by ``run``."""

    tolerances: Dict[str, float] = field(default_factory=dict)
    """Tolerance overrides keyed by lower-case constant name."""

    output_dir: Path = Path('bonnetlab-out')
    """Directory receiving the report and artifacts."""

    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    """Per-command option tables."""

    path: Optional[Path] = None
    """File the configuration was read from."""

    def options(self, command: str) -> Dict[str, Any]:
        """Option table of one command, empty when absent."""
        return dict(self.sections.get(command, {}))


@dataclass
class Session:
    """State shared by the commands of one run."""

    config: RunConfig
    """Configuration in force, command-line overrides applied."""

    chart: SurfaceChart
    """Chart built from the surface spec."""

    grid: SampleGrid
    """Sample grid over the chart."""

    threads: Optional[int] = None
    """Worker cap."""

    artifacts: List[Path] = field(default_factory=list)
    """Files written so far."""

    @property
    def out_dir(self) -> Path:
        """Output directory."""
        return self.config.output_dir

    def tolerance(self, key: str, default: float) -> float:
        """Override for ``key`` if configured, else ``default``."""
        return float(self.config.tolerances.get(key, default))


@dataclass
class Report:
    """Machine-readable outcome of a run.

    Every check keeps its value, target and tolerance so that ``pass`` can be
    recomputed from the report alone.

    _See Also_:
        [report_json][bonnetlab.export.report_json]
    """

    provenance: Dict[str, Any] = field(default_factory=dict)
    """Versions, grid and tolerances in force."""

    blocks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    """Result block per executed command."""

    checks: Dict[str, List[CheckResult]] = field(default_factory=dict)
    """Checks per executed command."""

    @property
    def passed(self) -> bool:
        """Every check of every command holds."""
        return all(check.passed for checks in self.checks.values() for check in checks)
