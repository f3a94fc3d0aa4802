"""bonnetlab CLI: analyze surfaces in R⁴ and write machine-readable reports.

Exit status is 0 when every check passes, 1 when a check fails, 2 on a
configuration error and 3 when a numerical stage fails.
"""

import logging
import sys

from argparse import SUPPRESS, ArgumentParser, Namespace, _SubParsersAction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type

from bonnetlab.cli import read_run_config
from bonnetlab.commands import PipelineCommand
from bonnetlab.commands.analysis import (
    AnalyzeCommand,
    ClassifyCommand,
    GlobalChecksCommand,
    IndexCommand,
    LinesCommand,
    VerifyCommand,
)
from bonnetlab.commands.construction import DeformCommand, MatesCommand
from bonnetlab.commands.run import RunCommand
from bonnetlab.config import THREADS_ENVVAR
from bonnetlab.exception import BonnetLabError, ConfigError
from bonnetlab.utils import EnvDefault

_logger = logging.getLogger(__name__)

_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

_HELP = {
    'analyze': 'Sample invariants and export the surface mesh.',
    'classify': 'Classify points and isotropic isothermicity.',
    'lines': 'Trace curvature lines as polylines.',
    'index': 'Indices of the mixed connection forms at pseudo-umbilic points.',
    'global-checks': 'Integral identities and structure-equation checks.',
    'mates': 'Sample a family of Bonnet mates.',
    'deform': 'Build and verify an infinitesimal isometric deformation.',
    'verify': 'Verify the certified facts of a catalog surface.',
}


def _configfile_parser() -> ArgumentParser:
    """Pre-parser that only reads ``--config``.

    Returns:
        Parser shared as parent of the main parser.
    """
    parser = ArgumentParser(prog='bonnetlab', add_help=False)
    parser.add_argument('--config', default=None, help='Path to the TOML run configuration.')
    return parser


def _load_config(args: Namespace) -> Dict[str, Any]:
    """Defaults the configuration file contributes to the command line.

    The file is validated here so that syntax errors surface before argument
    parsing; only the output directory feeds back into the parser defaults.

    Args:
        args: Namespace of the pre-parser.
    """
    if not args.config:
        return {}
    config = read_run_config(Path(args.config))
    return {'out': str(config.output_dir)}


def _cli(parser: ArgumentParser, defaults: Dict[str, Any]) -> ArgumentParser:
    """Create the main CLI parser.

    Args:
        parser: Parser used to read the configuration file.
        defaults: Dictionary that contains the CLI argument default values.

    Returns:
        The main bonnetlab parser.
    """
    parser = ArgumentParser(prog='bonnetlab', description='Numerical lab for surfaces in R⁴.',
                            parents=[parser])
    parser.set_defaults(**defaults)
    return parser


def _add_standard_args(parser: ArgumentParser) -> None:
    """Arguments shared by every sub-command.

    Args:
        parser: Sub-command parser.
    """
    parser.add_argument('--config', default=SUPPRESS, help='Path to the TOML run configuration.')
    parser.add_argument('--out', default=SUPPRESS, help='Output directory for the report.')
    parser.add_argument('--grid', default=SUPPRESS, help='Sample grid as NxM, e.g. 64x64.')
    parser.add_argument('--tol', action='append', default=SUPPRESS, metavar='KEY=VAL',
                        help='Tolerance override, repeatable.')
    parser.add_argument('--threads', required=False, action=EnvDefault, envvar=THREADS_ENVVAR,
                        help='Worker thread cap.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log INFO (-v) or DEBUG (-vv) messages to stderr.')


def _add_pipeline_command(subparser: _SubParsersAction, name: str,
                          command: Type[PipelineCommand]) -> None:
    """Sub-command running one analysis.

    Args:
        subparser: Parent that the sub-command will belong to.
        name: Sub-command name.
        command: Command class executed by the sub-command.
    """
    parser = subparser.add_parser(name, help=_HELP[name])
    _add_standard_args(parser)
    parser.set_defaults(cmd=command(parser))


def _add_run_command(subparser: _SubParsersAction) -> None:
    """Sub-command executing the command list of the configuration.

    Args:
        subparser: Parent that the sub-command will belong to.
    """
    parser = subparser.add_parser('run', help='Run every command listed in the configuration.')
    _add_standard_args(parser)
    parser.set_defaults(cmd=RunCommand(parser))


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the bonnetlab utility.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when omitted.

    Returns:
        Process exit status.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    config_argparse = _configfile_parser()
    config_args, _ = config_argparse.parse_known_args(argv)

    try:
        defaults = _load_config(config_args)
    except ConfigError as error:
        print(f'error: {error}', file=sys.stderr)
        return error.exit_code

    parser = _cli(config_argparse, defaults)
    subparser = parser.add_subparsers(dest='command')
    for name, command in (
        ('analyze', AnalyzeCommand),
        ('classify', ClassifyCommand),
        ('lines', LinesCommand),
        ('index', IndexCommand),
        ('global-checks', GlobalChecksCommand),
        ('mates', MatesCommand),
        ('deform', DeformCommand),
        ('verify', VerifyCommand),
    ):
        _add_pipeline_command(subparser, name, command)
    _add_run_command(subparser)

    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return 2 if stop.code else 0
    if not getattr(args, 'cmd', None):
        parser.print_help(sys.stderr)
        return 2

    _configure_logging(args.verbose)
    return _execute(args)


def _configure_logging(verbosity: int) -> None:
    level = _LOG_LEVELS[min(verbosity, len(_LOG_LEVELS) - 1)]
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger('bonnetlab').setLevel(level)


def _execute(args: Namespace) -> int:
    try:
        return args.cmd.execute(args)
    except BonnetLabError as error:
        parts: List[str] = ['error']
        if error.check and not isinstance(error, ConfigError):
            parts.append(error.check)
        parts.append(str(error))
        print(': '.join(parts), file=sys.stderr)
        _logger.debug('failure details', exc_info=True)
        return error.exit_code


def main() -> None:
    """Console-script wrapper exiting with the status of [cli][bonnetlab.cli.lab.cli]."""
    sys.exit(cli())
