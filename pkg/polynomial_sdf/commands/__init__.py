"""Command layer: one module per subcommand, dispatched by the runner."""

from polynomial_sdf.commands.runner import run

__all__ = ["run"]
