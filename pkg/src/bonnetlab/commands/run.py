"""Command that executes the command list of a run configuration."""

import logging

from argparse import Namespace
from typing import Dict, Type

from bonnetlab.commands import CommandBase, PipelineCommand, finish, provenance, session_from_args
from bonnetlab.commands.analysis import (
    AnalyzeCommand,
    ClassifyCommand,
    GlobalChecksCommand,
    IndexCommand,
    LinesCommand,
    VerifyCommand,
)
from bonnetlab.commands.construction import DeformCommand, MatesCommand
from bonnetlab.dataobjects.run import Report
from bonnetlab.exception import ConfigError

_logger = logging.getLogger(__name__)

PIPELINE: Dict[str, Type[PipelineCommand]] = {
    command.name: command for command in (
        AnalyzeCommand, ClassifyCommand, LinesCommand, IndexCommand, GlobalChecksCommand,
        MatesCommand, DeformCommand, VerifyCommand,
    )
}
"""Pipeline commands by name."""


class RunCommand(CommandBase):
    """Execute every command listed in the configuration, in order, into one report.

    _See Also_:
        [PipelineCommand][bonnetlab.commands.PipelineCommand]
    """

    def execute(self, args: Namespace) -> int:
        """Run the configured commands.

        Args:
            args: User provided CLI arguments.

        Returns:
            0 when every check of every command passes, 1 otherwise.

        Raises:
            ConfigError: If the configuration lists no commands.
        """
        session = session_from_args(args)
        if not session.config.commands:
            raise ConfigError('the configuration lists no commands', str(session.config.path))
        report = Report(provenance(session))
        report.provenance['commands'] = list(session.config.commands)
        for name in session.config.commands:
            PIPELINE[name](self._cli).record(session, report)
        return finish(session, report)
