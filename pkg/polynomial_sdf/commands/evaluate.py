"""
eval command: metrics of a snapshot against a ground-truth mesh.

The mesh is given in input units and mapped into the model domain,
so the near/far split at |s| = 0.05 is in model-domain units.
"""

import click

from polynomial_sdf.commands.fit import require
from polynomial_sdf.exceptions import ConfigError
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.schemas.sample import DomainTransform
from polynomial_sdf.services.ingest_service import load_mesh
from polynomial_sdf.services.oracle_service import MeshOracle, evaluate, make_eval_points
from polynomial_sdf.services.snapshot_service import load_snapshot
from polynomial_sdf.utils.files import OutputSet


def evaluate_model(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "model_path", "mesh_path")
    model = load_snapshot(config.model_path)
    if model.config.dim != 3:
        raise ConfigError("eval needs a 3-D model")
    transform = model.transform or DomainTransform.identity(3)

    raw = load_mesh(config.mesh_path, config.format)
    mesh = TriangleMesh(transform.to_model(raw.vertices), raw.faces)
    oracle = MeshOracle(mesh)
    points = make_eval_points(model.config, mesh, config.eval_points,
                              config.shell_points, config.seed, oracle)
    report = evaluate(model, mesh, points, oracle)

    click.echo(report.to_text(), nl=False)
    if config.output_path is not None:
        outputs.path(config.output_path).write_text(report.to_text(), encoding="ascii")
        outputs.sidecar(config.output_path, ".json").write_text(report.to_json(),
                                                                 encoding="ascii")
