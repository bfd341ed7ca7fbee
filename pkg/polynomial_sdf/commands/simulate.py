"""
simulate command: one 2-D surveying episode around a hidden shape.

Writes the trajectory log to --out and the final model next to it as
<out stem>.psdf. With --snapshot-interval, intermediate snapshots go
to <out stem>_snapshots/.
"""

import logging
from pathlib import Path

import click

from polynomial_sdf.commands.fit import require
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.services.field_service import init_spherical_prior
from polynomial_sdf.services.snapshot_service import snapshot_bytes
from polynomial_sdf.services.survey_service import build_shape, run_episode, write_trajectory
from polynomial_sdf.utils.files import OutputSet

logger = logging.getLogger(__name__)


def simulate(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "output_path")
    target = Path(config.output_path)
    basis = config.basis(dim=2)
    prior_spec = config.prior()
    prior = init_spherical_prior(basis, prior_spec.resolved_center(basis),
                                 prior_spec.radius, prior_spec.strength)
    episode = config.episode()

    snapshot_dir = None
    if episode.snapshot_interval:
        snapshot_dir = target.with_name(f"{target.stem}_snapshots")
        snapshot_dir.mkdir(exist_ok=True)

    result = run_episode(build_shape(config.shape_spec()), prior,
                         config.regularizer(), episode, snapshot_dir)

    write_trajectory(result.trajectory, outputs.path(target))
    outputs.path(target.with_suffix(".psdf")).write_bytes(snapshot_bytes(result.model))

    summary = f"steps {len(result.trajectory)}\nmae_near {result.final_mae_near!r}\n"
    if result.halted:
        summary += f"halted {result.halted}\n"
    click.echo(summary, nl=False)
