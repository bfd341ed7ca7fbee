"""
Dispatch a validated run configuration to its command.

Failures are translated to exit codes here, once, for every command:

    0  success
    1  usage or configuration error
    2  I/O or parse error
    3  numerical failure
    4  unexpected internal error

Outputs are committed only when the command returns normally.
"""

import logging

import click
import numpy as np
from pydantic import ValidationError

from polynomial_sdf.commands.evaluate import evaluate_model
from polynomial_sdf.commands.fit import fit, update
from polynomial_sdf.commands.query import query
from polynomial_sdf.commands.reconstruct import reconstruct
from polynomial_sdf.commands.simulate import simulate
from polynomial_sdf.exceptions import ConfigError, NumericalError, ParseError
from polynomial_sdf.models.enums import Command
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.utils.files import OutputSet

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_INTERNAL = 4

HANDLERS = {
    Command.FIT: fit,
    Command.UPDATE: update,
    Command.QUERY: query,
    Command.RECONSTRUCT: reconstruct,
    Command.EVAL: evaluate_model,
    Command.SIMULATE: simulate,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigError, ValidationError, click.UsageError)):
        return EXIT_USAGE
    if isinstance(error, (ParseError, OSError)):
        return EXIT_IO
    if isinstance(error, (NumericalError, np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    if isinstance(error, ValueError):
        return EXIT_USAGE
    return EXIT_INTERNAL


def run(command: Command | str, config: RunConfig) -> int:
    """Execute one command; returns its exit status."""
    handler = HANDLERS[Command(command)]
    outputs = OutputSet()
    try:
        handler(config, outputs)
        outputs.commit()
    except Exception as e:
        outputs.discard()
        code = exit_code_for(e)
        if code == EXIT_INTERNAL:
            click.echo(f"error: internal error: {type(e).__name__}: {e}", err=True)
        else:
            click.echo(f"error: {e}", err=True)
        logger.debug("%s failed", Command(command).value, exc_info=True)
        return code
    return EXIT_OK
