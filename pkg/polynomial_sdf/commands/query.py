"""
query command: distance and gradient at points, in input units.
"""

import click
import numpy as np

from polynomial_sdf.commands.fit import require
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.schemas.sample import DomainTransform
from polynomial_sdf.services.field_service import query_batch
from polynomial_sdf.services.ingest_service import load_points
from polynomial_sdf.services.snapshot_service import load_snapshot
from polynomial_sdf.utils.files import OutputSet


def format_rows(points: np.ndarray, distances: np.ndarray, gradients: np.ndarray) -> str:
    """One `x.. f g..` line per point."""
    return "".join(
        " ".join(repr(float(v)) for v in (*p, f, *g)) + "\n"
        for p, f, g in zip(points, distances, gradients)
    )


def query(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "model_path", "points_path")
    model = load_snapshot(config.model_path)
    transform = model.transform or DomainTransform.identity(model.config.dim)
    raw = load_points(config.points_path, model.config.dim)

    distances, gradients = query_batch(model, transform.to_model(raw))
    # isotropic scaling leaves the gradient unchanged
    text = format_rows(raw, transform.distance_to_raw(distances), gradients)

    if config.output_path is not None:
        outputs.path(config.output_path).write_text(text, encoding="ascii")
    else:
        click.echo(text, nl=False)
