"""
Polynomial SDF command-line application.

    polysdf fit --in cloud.xyz --out model.psdf
    polysdf update --model model.psdf --in more.xyz --out model.psdf
    polysdf query --model model.psdf --points points.txt
    polysdf reconstruct --model model.psdf --out grid.raw
    polysdf eval --model model.psdf --mesh truth.obj
    polysdf simulate --out trajectory.txt
"""

import sys

import click

from polynomial_sdf.commands.options import run_options
from polynomial_sdf.commands.runner import EXIT_USAGE, exit_code_for, run
from polynomial_sdf.config import get_settings, setup_logging
from polynomial_sdf.exceptions import ConfigError
from polynomial_sdf.models.enums import Command
from polynomial_sdf.services.config_service import parse_config

settings = get_settings()


def _make_command(command: Command, help_text: str) -> click.Command:
    @click.pass_context
    def callback(ctx: click.Context, config_path, **flags):
        try:
            config = parse_config(config_path, flags)
        except (ConfigError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(exit_code_for(e))
        setup_logging(config.log_level)
        ctx.exit(run(command, config))

    return click.command(name=command.value, help=help_text)(run_options(callback))


@click.group(help=f"{settings.APP_NAME}: incremental polynomial signed distance fields.")
@click.version_option(settings.APP_VERSION, prog_name="polysdf")
def cli():
    pass


cli.add_command(_make_command(Command.FIT, "Train a model from a point cloud."))
cli.add_command(_make_command(
    Command.UPDATE,
    "Ingest more samples into a snapshot. Samples must lie inside the model domain, "
    "which is the padded fit cloud bounds unless fit was given --domain.",
))
cli.add_command(_make_command(Command.QUERY, "Print distance and gradient at points."))
cli.add_command(_make_command(Command.RECONSTRUCT, "Export a grid and its level set."))
cli.add_command(_make_command(Command.EVAL, "Score a snapshot against a mesh."))
cli.add_command(_make_command(Command.SIMULATE, "Run a 2-D surveying episode."))


def main(argv: list[str] | None = None) -> int:
    """Entry point; usage errors exit with 1 instead of click's 2."""
    try:
        result = cli.main(args=argv, prog_name="polysdf", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
