"""CLI commands that run the bonnetlab analyses and write their reports."""

import dataclasses
import json
import logging

from abc import ABC, abstractmethod
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy

from bonnetlab import __version__
from bonnetlab import config as defaults
from bonnetlab.cli import apply_overrides, open_session, read_run_config
from bonnetlab.config import THREADS_ENVVAR, TOLERANCE_KEYS
from bonnetlab.dataobjects import CheckResult
from bonnetlab.dataobjects.run import Report, Session
from bonnetlab.exception import ConfigError
from bonnetlab.export import artifact_names, write_report

_logger = logging.getLogger(__name__)

CommandResult = Tuple[Dict[str, Any], List[CheckResult]]
"""Result block and checks of one command."""

CHECK_TOLERANCES: Dict[str, str] = {
    'gauss_bonnet': 'quadrature_tolerance',
    'normal_euler': 'quadrature_tolerance',
    'index_theorem': 'quadrature_tolerance',
    'index_sum': 'index_tolerance',
    'structure_equation': 'structure_tolerance',
    'chern_d_star_a1': 'structure_tolerance',
    'chern_wedge': 'structure_tolerance',
    'ricci_like': 'ricci_tolerance',
    'ellipse_inequality': 'fact_tolerance',
    'flat_normal_bundle': 'fact_tolerance',
    'minimal': 'fact_tolerance',
    'superconformal_plus': 'fact_tolerance',
    'totally_umbilic': 'fact_tolerance',
    'isothermic': 'fact_tolerance',
    'strongly_iso_isothermic': 'coclosed_tolerance',
    'parallel_H': 'holomorphy_tolerance',
    'vertically_harmonic_minus': 'holomorphy_tolerance',
    'bending': 'fundamental_tolerance',
    'vf12': 'fundamental_tolerance',
    'vfja': 'fundamental_tolerance',
    'dfja': 'fundamental_tolerance',
    'df1234': 'fundamental_tolerance',
    'nontrivial': 'nontriviality_threshold',
    'gauss_lift_variation': 'superconformal_tolerance',
}
"""Tolerance key that governs each library check, by check name."""


def default_tolerance(key: str) -> float:
    """Library default of a tolerance key."""
    return float(getattr(defaults, key.upper()))


def rebound(session: Session, check: CheckResult) -> CheckResult:
    """Re-evaluate a library check against the tolerance configured for it.

    Scaled tolerances keep their scaling: the configured value replaces the
    library default it was derived from. A ``[sign]`` suffix on the check name
    is ignored for the lookup.
    """
    key = CHECK_TOLERANCES.get(check.name.split('[')[0])
    if key is None or key not in session.config.tolerances:
        return check
    override = session.config.tolerances[key]
    if check.kind == 'above':
        return CheckResult.above(check.name, check.value, override)
    factor = override / default_tolerance(key)
    return CheckResult.compare(check.name, check.value, check.target, check.tolerance * factor)


def signed(check: CheckResult, sign: str) -> CheckResult:
    """Tag a check with the sign it was computed for."""
    return dataclasses.replace(check, name=f'{check.name}[{sign}]')


def provenance(session: Session) -> Dict[str, Any]:
    """Versions, surface, grid and tolerances in force; nothing host or time dependent."""
    grid = session.grid
    tolerances = {key: session.tolerance(key, default_tolerance(key)) for key in TOLERANCE_KEYS}
    return {
        'versions': {'bonnetlab': __version__, 'numpy': np.__version__,
                     'scipy': scipy.__version__},
        'surface': {'name': session.chart.name, 'params': session.chart.params,
                    'analytic': session.chart.analytic,
                    'isothermal': session.chart.isothermal},
        'grid': {'nu': grid.nu, 'nv': grid.nv, 'domain': grid.domain,
                 'periodic_u': grid.periodic_u, 'periodic_v': grid.periodic_v},
        'tolerances': tolerances,
    }


class CommandBase(ABC):
    """Base class for bonnetlab CLI commands."""

    def __init__(self, cli: ArgumentParser) -> None:
        """Initialise the sub-command.

        Args:
            cli: ArgParse parser that will execute this command.
        """
        self._cli = cli

    @abstractmethod
    def execute(self, args: Namespace) -> int:
        """Execute the command.

        Args:
            args: User provided CLI arguments.

        Returns:
            Process exit status.
        """
        pass


class PipelineCommand(CommandBase):
    """A command that analyzes the configured surface and reports checks.

    Subclasses implement [run][bonnetlab.commands.PipelineCommand.run];
    this class loads the configuration, writes ``report.json`` and prints
    a one-line JSON summary to stdout.

    _See Also_:
        [RunCommand][bonnetlab.commands.run.RunCommand]
    """

    name: str = ''
    """Command name used as the report block key."""

    def execute(self, args: Namespace) -> int:
        """Run the command on the configuration named by ``--config``.

        Args:
            args: User provided CLI arguments.

        Returns:
            0 when every check passes, 1 otherwise.

        Raises:
            ConfigError: If the configuration is missing or invalid.
            NumericalError: If a numerical stage fails.
        """
        session = session_from_args(args)
        report = Report(provenance(session))
        report.provenance['commands'] = [self.name]
        self.record(session, report)
        return finish(session, report)

    def record(self, session: Session, report: Report) -> None:
        """Run on a session and store the block and re-evaluated checks in ``report``."""
        _logger.info('running %s on %s', self.name, session.chart.name)
        before = len(session.artifacts)
        block, checks = self.run(session)
        block['artifacts'] = artifact_names(session.artifacts[before:], session.out_dir)
        report.blocks[self.name] = block
        report.checks[self.name] = [rebound(session, check) for check in checks]

    @abstractmethod
    def run(self, session: Session) -> CommandResult:
        """Compute the command's result block and checks.

        Args:
            session: Chart, grid and configuration of the run.

        Returns:
            The JSON block and the checks.
        """
        pass


def session_from_args(args: Namespace) -> Session:
    """Load the configuration and apply the command-line overrides."""
    if not getattr(args, 'config', None):
        raise ConfigError('no configuration given (use --config)')
    config = read_run_config(Path(args.config))
    config = apply_overrides(config, getattr(args, 'out', None), getattr(args, 'grid', None),
                             getattr(args, 'tol', None) or ())
    return open_session(config, _threads(getattr(args, 'threads', None)))


def _threads(value: Any) -> Optional[int]:
    if value is None or value == '':
        return None
    try:
        threads = int(value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f'--threads (or {THREADS_ENVVAR}) must be an integer, '
                          f'got {value!r}') from error
    if threads < 1:
        raise ConfigError(f'--threads (or {THREADS_ENVVAR}) must be positive, got {threads}')
    return threads


def finish(session: Session, report: Report) -> int:
    """Write the report, print a summary and return the exit status."""
    path = write_report(report, session.out_dir)
    failed = [f'{name}: {check.name}' for name, checks in report.checks.items()
              for check in checks if not check.passed]
    for item in failed:
        _logger.warning('check failed: %s', item)
    print(json.dumps({'pass': report.passed, 'report': str(path), 'failed': failed},
                     sort_keys=True))
    return 0 if report.passed else 1
