"""
Command-line flags shared by every subcommand.

Every flag defaults to None so that only flags actually given
override the config file; the real defaults live on RunConfig.
"""

import click

from polynomial_sdf.models.enums import ShapeKind

RUN_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False),
                 help="key=value config file; flags override its values."),
    click.option("--degree", type=int, help="Polynomial degree K (>= 2, default 3)."),
    click.option("--segments", type=int, help="Segments per axis S (default 4)."),
    click.option("--dim", type=int, help="Input dimension, 2 or 3 (default 3)."),
    click.option("--margin", type=float, help="Domain margin per side (default 0.25)."),
    click.option("--normalize/--no-normalize", default=None,
                 help="Map inputs onto the unit cube (default on)."),
    click.option("--domain",
                 help="Raw-unit box lo..,hi.. mapped onto the unit cube, e.g. 0,0,0,1,1,1 "
                      "(default: padded bounds of the fit cloud)."),
    click.option("--lambda-d", type=float, help="Distance cost weight (default 1)."),
    click.option("--lambda-g", type=float, help="Gradient cost weight (default 1)."),
    click.option("--lambda-t", type=float, help="Tension cost weight (default 0.1)."),
    click.option("--sigma2", type=float, help="Measurement noise variance (default 1e-4)."),
    click.option("--tension-points", type=int, help="Tension points per sample (default 4)."),
    click.option("--ray-extent", type=float,
                 help="Normal ray half-length (default 0.35 x domain diagonal)."),
    click.option("--prior-center", help="Prior sphere center, e.g. 0.5,0.5,0.5."),
    click.option("--prior-radius", type=float, help="Prior sphere radius (default 0.25)."),
    click.option("--prior-strength", type=float, help="Prior scale rho, P0 = rho I (default 100)."),
    click.option("--stream/--no-stream", default=None,
                 help="Train incrementally in batches instead of one batch solve."),
    click.option("--batch-size", type=int, help="Samples per streamed update (default 1)."),
    click.option("--seed", type=int, help="Random seed (default 0)."),
    click.option("--grid-res", type=int, help="Grid nodes per axis (default 64)."),
    click.option("--iso", type=float, help="Level-set value (default 0)."),
    click.option("--in", "input_path", type=click.Path(dir_okay=False),
                 help="Input point cloud (xyz or ply)."),
    click.option("--out", "output_path", type=click.Path(dir_okay=False),
                 help="Output artifact path."),
    click.option("--model", "model_path", type=click.Path(dir_okay=False),
                 help="Model snapshot to read."),
    click.option("--mesh", "mesh_path", type=click.Path(dir_okay=False),
                 help="Ground-truth mesh (obj or ply)."),
    click.option("--points", "points_path", type=click.Path(dir_okay=False),
                 help="Query points, one per line."),
    click.option("--format", help="File format (xyz/ply, obj/ply, raw/vtk)."),
    click.option("--eval-points", type=int, help="Uniform evaluation points (default 2000)."),
    click.option("--shell-points", type=int, help="Near-surface evaluation points (default 2000)."),
    click.option("--steps", type=int, help="Simulation steps (default 500)."),
    click.option("--shape", type=click.Choice([k.value for k in ShapeKind]),
                 help="Hidden shape (default circle)."),
    click.option("--shape-center", help="Hidden shape center, e.g. 0.5,0.5."),
    click.option("--shape-radius", type=float, help="Hidden shape radius (default 0.2)."),
    click.option("--rays", type=int, help="Sensor rays (default 8)."),
    click.option("--sigma-meas", type=float, help="Sensor noise (default 0.001)."),
    click.option("--target-distance", type=float, help="Surveying distance d* (default 0.1)."),
    click.option("--step-size", type=float, help="Control step h (default 0.01)."),
    click.option("--snapshot-interval", type=int, help="Steps between snapshots (0 = off)."),
    click.option("--log-level", help="Logging level, e.g. DEBUG."),
]


def run_options(func):
    for option in reversed(RUN_OPTIONS):
        func = option(func)
    return func
