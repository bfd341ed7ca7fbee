"""
Online surveying simulator in 2-D.

An agent circles a hidden shape at a target distance, steering with
the gradient of the field it is learning, while a simulated range
sensor feeds every sighting back into the model:

    sense -> ingest -> control_step

The control law follows the level sets of the learned field with a
proportional correction towards the target distance:

    g = grad f / |grad f|,   t = rot90(g) = (-g_y, g_x)
    x <- x + h (k_t t - k_n (f(x) - d*) g)
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from polynomial_sdf.exceptions import VanishingGradientError
from polynomial_sdf.models.enums import ShapeKind
from polynomial_sdf.models.field_model import FieldModel, QueryResult
from polynomial_sdf.models.shapes import Capsule, Circle, HiddenShape, Polygon
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.metrics import NEAR_THRESHOLD, MetricsReport
from polynomial_sdf.schemas.regularizer import RegularizerSpec
from polynomial_sdf.schemas.sample import SurfaceSample
from polynomial_sdf.schemas.survey import (
    AgentState,
    ControlGains,
    EpisodeConfig,
    SensorSpec,
    ShapeSpec,
)
from polynomial_sdf.services.basis_service import clamp_to_domain
from polynomial_sdf.services.field_service import query, query_batch
from polynomial_sdf.services.oracle_service import evaluate_against
from polynomial_sdf.services.snapshot_service import save_snapshot
from polynomial_sdf.services.solver_service import OnlineFieldEstimator

logger = logging.getLogger(__name__)

MIN_GRADIENT_NORM = 1e-8

# Full metrics are logged at most this often during an episode
PROGRESS_LOG_INTERVAL = 100


@dataclass(frozen=True)
class TrajectoryRecord:
    step: int
    x: float
    y: float
    f: float
    grad_norm: float
    mae_near: float


@dataclass
class EpisodeResult:
    """Trajectory, final model and periodic metrics of one episode."""
    trajectory: list[TrajectoryRecord]
    model: FieldModel
    reports: list[tuple[int, MetricsReport]]
    step_times: list[float] = field(default_factory=list)
    snapshots: list[Path] = field(default_factory=list)
    halted: str | None = None

    @property
    def final_mae_near(self) -> float:
        return self.trajectory[-1].mae_near if self.trajectory else math.nan


def build_shape(spec: ShapeSpec) -> HiddenShape:
    if spec.kind == ShapeKind.CIRCLE:
        return Circle(spec.center, spec.radius)
    if spec.kind == ShapeKind.CAPSULE:
        half = np.array([spec.length / 2, 0.0])
        center = np.asarray(spec.center)
        return Capsule(center - half, center + half, spec.radius)
    return Polygon.regular(spec.sides, spec.center, spec.radius)


def sense(shape: HiddenShape, agent: AgentState, sensor: SensorSpec,
          rng: np.random.Generator, config: BasisConfig | None = None) -> list[SurfaceSample]:
    """
    Simulated range scan: one sample per ray that hits the shape.

    The sample normal is the exact shape normal at the hit; the
    position carries isotropic Gaussian noise. Noisy points that fall
    outside the domain of config are discarded.
    """
    origin = np.asarray(agent.position, dtype=float)
    samples = []
    for angle in sensor.ray_angles(agent.heading_angle):
        direction = np.array([math.cos(angle), math.sin(angle)])
        t = shape.raycast(origin, direction, sensor.max_range)
        if t is None:
            continue
        hit = origin + t * direction
        normal = shape.gradient(hit)[0]
        position = hit + rng.normal(0.0, sensor.sigma_meas, 2) if sensor.sigma_meas else hit
        if config is not None and not np.all(
            (position >= config.lower) & (position <= config.upper)
        ):
            continue
        samples.append(SurfaceSample(position=tuple(position), normal=tuple(normal)))
    return samples


def _query_field(source: FieldModel | HiddenShape, x: np.ndarray) -> QueryResult:
    if isinstance(source, FieldModel):
        return query(source, x)
    return source.query(x)


def control_step(source: FieldModel | HiddenShape, agent: AgentState,
                 target_distance: float, gains: ControlGains, step_size: float,
                 config: BasisConfig) -> AgentState:
    """One step along the level sets of source, corrected towards d*."""
    position = np.asarray(agent.position, dtype=float)
    result = _query_field(source, position)
    norm = result.gradient_norm
    if norm < MIN_GRADIENT_NORM:
        raise VanishingGradientError(
            f"field gradient vanishes at {position.tolist()} (|grad f| = {norm:.3g})"
        )
    g = result.gradient / norm
    tangent = np.array([-g[1], g[0]])
    velocity = gains.k_t * tangent - gains.k_n * (result.distance - target_distance) * g
    moved = clamp_to_domain(position + step_size * velocity, config)

    displacement = moved - position
    length = float(np.linalg.norm(displacement))
    heading = tuple(displacement / length) if length > 0 else agent.heading
    return AgentState(position=tuple(moved), heading=heading, step=agent.step + 1)


def initial_agent(source: FieldModel | HiddenShape, start) -> AgentState:
    """Agent at start, heading along the level set through it."""
    result = _query_field(source, np.asarray(start, dtype=float))
    if result.gradient_norm < MIN_GRADIENT_NORM:
        return AgentState(position=tuple(start), heading=(0.0, 1.0))
    g = result.gradient / result.gradient_norm
    return AgentState(position=tuple(start), heading=(-g[1], g[0]))


def shell_points(shape: HiddenShape, config: BasisConfig, count: int,
                 rng: np.random.Generator, max_rounds: int = 50) -> np.ndarray:
    """Uniform domain points with exact |sd| < NEAR_THRESHOLD, by rejection."""
    lower, upper = np.array(config.lower), np.array(config.upper)
    kept = []
    total = 0
    for _ in range(max_rounds):
        candidates = lower + rng.random((4 * count, 2)) * (upper - lower)
        near = candidates[np.abs(shape.signed_distance(candidates)) < NEAR_THRESHOLD]
        kept.append(near)
        total += len(near)
        if total >= count:
            break
    return np.vstack(kept)[:count]


def _eval_sets(shape: HiddenShape, config: BasisConfig, episode: EpisodeConfig,
               rng: np.random.Generator):
    lower, upper = np.array(config.lower), np.array(config.upper)
    shell = shell_points(shape, config, episode.n_shell, rng)
    uniform = lower + rng.random((episode.n_uniform, 2)) * (upper - lower)
    points = np.vstack([uniform, shell])
    return shell, shape.signed_distance(shell), points, shape.signed_distance(points), shape.gradient(points)


def write_trajectory(records: list[TrajectoryRecord], path: str | Path) -> None:
    """Text log, one `step x y f |grad f| mae_near` record per line."""
    lines = ["# step x y f |grad f| mae_near"]
    lines += [
        f"{r.step} {r.x!r} {r.y!r} {r.f!r} {r.grad_norm!r} {r.mae_near!r}"
        for r in records
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def run_episode(shape: HiddenShape, prior: FieldModel, spec: RegularizerSpec,
                episode: EpisodeConfig, snapshot_dir: str | Path | None = None) -> EpisodeResult:
    """
    Run sense -> ingest -> control_step for episode.steps steps.

    Near-surface MAE against the exact shape is recorded every step,
    full metrics every eval_interval steps. A vanishing gradient ends
    the episode early with the reason in EpisodeResult.halted.
    """
    config = prior.config
    if config.dim != 2:
        raise ValueError(f"surveying runs in 2-D, model is {config.dim}-D")
    sensor_seed, eval_seed = np.random.SeedSequence(episode.seed).spawn(2)
    sensor_rng = np.random.default_rng(sensor_seed)
    shell, shell_truth, points, truth, truth_gradient = _eval_sets(
        shape, config, episode, np.random.default_rng(eval_seed)
    )

    estimator = OnlineFieldEstimator(prior, spec)
    agent = initial_agent(prior, clamp_to_domain(episode.start, config))
    result = EpisodeResult(trajectory=[], model=prior, reports=[])

    for step in range(1, episode.steps + 1):
        started = time.perf_counter()
        samples = sense(shape, agent, episode.sensor, sensor_rng, config)
        model = estimator.ingest(samples) if samples else estimator.model
        try:
            next_agent = control_step(model, agent, episode.target_distance,
                                      episode.gains, episode.step_size, config)
        except VanishingGradientError as e:
            result.halted = str(e)
            logger.warning("Episode halted at step %d: %s", step, e)
            break
        result.step_times.append(time.perf_counter() - started)

        here = query(model, np.asarray(agent.position))
        estimate, _ = query_batch(model, shell)
        mae_near = float(np.mean(np.abs(estimate - shell_truth)))
        result.trajectory.append(TrajectoryRecord(
            step=step, x=agent.position[0], y=agent.position[1],
            f=here.distance, grad_norm=here.gradient_norm, mae_near=mae_near,
        ))
        agent = next_agent

        if step % episode.eval_interval == 0:
            report = evaluate_against(model, points, truth, truth_gradient)
            result.reports.append((step, report))
            if step % PROGRESS_LOG_INTERVAL == 0:
                logger.info("Step %d: near MAE %.4f, GCD %.4f",
                            step, report.mae_near_mean or math.nan,
                            report.gcd_mean or math.nan)
        if snapshot_dir is not None and episode.snapshot_interval \
                and step % episode.snapshot_interval == 0:
            path = Path(snapshot_dir) / f"step_{step:05d}.psdf"
            save_snapshot(model, path)
            result.snapshots.append(path)

    result.model = estimator.model
    return result
