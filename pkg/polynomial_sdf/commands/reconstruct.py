"""
reconstruct command: dense grid plus extracted level set.

The grid goes to --out (raw + .hdr sidecar, or VTK with --format vtk)
and the level set to <out stem>_levelset.obj, both in input units.
"""

import logging
from pathlib import Path

import numpy as np

from polynomial_sdf.commands.fit import require
from polynomial_sdf.exceptions import ConfigError
from polynomial_sdf.models.enums import GridFormat
from polynomial_sdf.models.grid import ContourSet, ScalarGrid
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.schemas.sample import DomainTransform
from polynomial_sdf.services.recon_service import (
    contours_text,
    eval_grid,
    extract_level_set,
    grid_header,
    grid_raw_bytes,
    mesh_text,
    vtk_text,
)
from polynomial_sdf.services.snapshot_service import load_snapshot
from polynomial_sdf.utils.files import OutputSet

logger = logging.getLogger(__name__)


def grid_to_raw(grid: ScalarGrid, transform: DomainTransform) -> ScalarGrid:
    return ScalarGrid(
        values=transform.distance_to_raw(grid.values),
        origin=tuple(transform.to_raw(np.asarray(grid.origin)).tolist()),
        spacing=tuple(s / transform.scale for s in grid.spacing),
    )


def level_set_path(output: Path) -> Path:
    return output.with_name(f"{output.stem}_levelset.obj")


def reconstruct(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "model_path", "output_path")
    try:
        grid_format = GridFormat(config.format or GridFormat.RAW.value)
    except ValueError:
        raise ConfigError(f"grid format must be raw or vtk, got {config.format!r}") from None

    model = load_snapshot(config.model_path)
    transform = model.transform or DomainTransform.identity(model.config.dim)
    grid = eval_grid(model, config.grid_res)
    level_set = extract_level_set(grid, transform.distance_to_model(config.iso))

    raw_grid = grid_to_raw(grid, transform)
    target = Path(config.output_path)
    if grid_format == GridFormat.VTK:
        outputs.path(target).write_text(vtk_text(raw_grid), encoding="ascii")
    else:
        outputs.path(target).write_bytes(grid_raw_bytes(raw_grid))
        outputs.sidecar(target, ".hdr").write_text(grid_header(raw_grid), encoding="ascii")

    if isinstance(level_set, ContourSet):
        contours = ContourSet([transform.to_raw(p) for p in level_set.polylines])
        if contours.is_empty:
            logger.warning("Level set %g is empty", config.iso)
        text = contours_text(contours)
    else:
        mesh = TriangleMesh(transform.to_raw(level_set.vertices), level_set.faces)
        if mesh.is_empty:
            logger.warning("Level set %g is empty", config.iso)
        text = mesh_text(mesh)
    outputs.path(level_set_path(target)).write_text(text, encoding="ascii")
