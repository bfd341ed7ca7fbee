"""
fit and update commands.

fit trains a model from a point cloud, either with one batch solve or
streamed through the recursive update. update loads a snapshot and
streams more samples into it, using the snapshot's own coordinate map.

By default the coordinate map is fitted to the bounds of the first
cloud, so later updates must stay inside them. Pass --domain to fit
with a box that covers all data expected later.
"""

import logging
import time

import numpy as np

from polynomial_sdf.exceptions import ConfigError
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.regularizer import RegularizerSpec
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.schemas.sample import DomainTransform, SurfaceSample, samples_to_arrays
from polynomial_sdf.services.field_service import init_spherical_prior
from polynomial_sdf.services.ingest_service import fit_domain, load_point_cloud
from polynomial_sdf.services.snapshot_service import load_snapshot, save_snapshot
from polynomial_sdf.services.solver_service import OnlineFieldEstimator, batch_fit
from polynomial_sdf.utils.files import OutputSet

logger = logging.getLogger(__name__)


def require(config: RunConfig, *fields: str) -> None:
    """Raise ConfigError naming the first missing path option."""
    for name in fields:
        if getattr(config, name) is None:
            flag = RunConfig.model_fields[name].alias or name
            raise ConfigError(f"missing required option --{flag.replace('_', '-')}")


def check_inside(samples: list[SurfaceSample], basis: BasisConfig, source: object) -> None:
    """Raise ConfigError when a mapped sample falls outside the model domain."""
    if not samples:
        return
    positions, _ = samples_to_arrays(samples)
    outside = ~np.all((positions >= basis.lower) & (positions <= basis.upper), axis=1)
    if outside.any():
        raise ConfigError(
            f"{source}: {int(outside.sum())} of {len(samples)} samples lie outside the "
            "model domain; fit with --domain covering all data"
        )


def stream_samples(model: FieldModel, samples: list[SurfaceSample],
                   spec: RegularizerSpec, batch_size: int) -> FieldModel:
    """Feed samples through the recursive update in batches, logging latency."""
    estimator = OnlineFieldEstimator(model, spec)
    for start in range(0, len(samples), batch_size):
        batch = samples[start:start + batch_size]
        estimator.ingest(batch)
        logger.info("Batch %d: %d samples, %.2f ms",
                    estimator.updates, len(batch), estimator.latencies[-1] * 1e3)
    if estimator.latencies:
        latencies = np.array(estimator.latencies) * 1e3
        logger.info("Streamed %d samples in %d updates, mean %.2f ms, max %.2f ms",
                    len(samples), estimator.updates, latencies.mean(), latencies.max())
    return estimator.model


def fit(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "input_path", "output_path")
    cloud = load_point_cloud(config.input_path, config.format)
    positions, _ = samples_to_arrays(cloud.samples)
    dim = positions.shape[1] if len(cloud) else config.dim
    if dim != config.dim:
        logger.info("Using dim %d from %s", dim, config.input_path)
    basis = config.basis(dim)

    corners = config.domain_corners()
    if corners is not None:
        if len(corners[0]) != dim:
            raise ConfigError(f"--domain has {len(corners[0])} axes, samples are {dim}-D")
        transform = fit_domain(np.array(corners), margin=0.0)
    elif config.normalize and len(cloud):
        transform = fit_domain(positions, config.margin)
    else:
        transform = DomainTransform.identity(dim)
    samples = transform.apply(cloud.samples)
    check_inside(samples, basis, config.input_path)

    prior_spec = config.prior()
    prior = init_spherical_prior(
        basis, prior_spec.resolved_center(basis), prior_spec.radius, prior_spec.strength,
    ).with_transform(transform)

    spec = config.regularizer()
    if not samples:
        logger.warning("No samples in %s, writing the prior", config.input_path)
        model = prior
    elif config.stream:
        model = stream_samples(prior, samples, spec, config.batch_size)
    else:
        started = time.perf_counter()
        model = batch_fit(basis, samples, spec, prior)
        logger.info("Batch fit took %.1f ms", (time.perf_counter() - started) * 1e3)

    save_snapshot(model, outputs.path(config.output_path))


def update(config: RunConfig, outputs: OutputSet) -> None:
    require(config, "model_path", "input_path")
    model = load_snapshot(config.model_path)
    cloud = load_point_cloud(config.input_path, config.format)
    transform = model.transform or DomainTransform.identity(model.config.dim)
    samples = transform.apply(cloud.samples)

    if samples and len(samples[0].position) != model.config.dim:
        raise ConfigError(
            f"samples are {len(samples[0].position)}-D, model is {model.config.dim}-D"
        )
    check_inside(samples, model.config, config.input_path)
    if not samples:
        logger.warning("No samples in %s, model unchanged", config.input_path)
    else:
        model = stream_samples(model, samples, config.regularizer(), config.batch_size)

    save_snapshot(model, outputs.path(config.output_path or config.model_path))
