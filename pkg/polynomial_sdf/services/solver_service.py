"""
Solver service: cost assembly, batch fit and the recursive update.

Every surface sample contributes up to three blocks of rows to the
stacked least-squares system A w = s:

    lambda_d * Psi(x)            target 0
    lambda_g * dPsi/dx_d(x)      target lambda_g * g_d   (D rows)
    lambda_t * H_Psi(p)          target 0                (per tension point)

Tension rows are the distinct second-derivative features (D diagonal
plus D(D-1)/2 mixed, the mixed rows scaled by sqrt(2)) so that the
squared row sum equals the Hessian Frobenius norm.

The recursive update keeps the matrix P of the gain recursion. With
prior (w0, P0) the batch fit solves the same posterior, so feeding the
samples in any number of ordered batches gives the batch solution.
"""

import logging
import math
import threading
import time

import numpy as np
from scipy import linalg

from polynomial_sdf.config import get_settings
from polynomial_sdf.exceptions import NumericalError, OutOfDomainError
from polynomial_sdf.models.field_model import FieldModel, SystemRows
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.regularizer import RegularizerSpec
from polynomial_sdf.schemas.sample import SurfaceSample, samples_to_arrays
from polynomial_sdf.services.field_service import features_batch, unit_orders

logger = logging.getLogger(__name__)


def tension_offsets(count: int, extent: float) -> np.ndarray:
    """
    Signed offsets along the normal ray, zero excluded.

    Candidates are 2*ceil(R/2) uniform offsets spanning [-e, +e];
    they are taken outermost first, alternating sides, and cut at R.
    """
    if count < 1:
        return np.zeros(0)
    half = math.ceil(count / 2)
    magnitudes = extent * np.arange(half, 0, -1) / half
    ordered = np.column_stack([-magnitudes, magnitudes]).ravel()[:count]
    return np.sort(ordered)


def _inside(points: np.ndarray, config: BasisConfig) -> np.ndarray:
    lower, upper = np.array(config.lower), np.array(config.upper)
    return np.all((points >= lower) & (points <= upper), axis=-1)


def tension_points(sample: SurfaceSample, spec: RegularizerSpec,
                   config: BasisConfig) -> list[np.ndarray]:
    """Control points on the normal ray of a sample; points outside the domain are dropped."""
    if spec.tension_points < 1:
        return []
    offsets = tension_offsets(spec.tension_points, spec.resolved_ray_extent(config))
    position = np.asarray(sample.position)
    normal = np.asarray(sample.normal)
    points = position + offsets[:, None] * normal
    return list(points[_inside(points, config)])


def _tension_points_batch(positions: np.ndarray, normals: np.ndarray,
                          spec: RegularizerSpec, config: BasisConfig) -> np.ndarray:
    """All control points of a batch, sample-major, offsets ascending."""
    offsets = tension_offsets(spec.tension_points, spec.resolved_ray_extent(config))
    points = positions[:, None, :] + offsets[None, :, None] * normals[:, None, :]
    points = points.reshape(-1, config.dim)
    return points[_inside(points, config)]


def _check_in_domain(positions: np.ndarray, config: BasisConfig) -> None:
    inside = _inside(positions, config)
    if not inside.all():
        bad = positions[~inside][0]
        raise OutOfDomainError(
            f"sample position {bad.tolist()} outside domain {list(config.domain)}"
        )


def hessian_rows_batch(config: BasisConfig, points: np.ndarray) -> np.ndarray:
    """
    Tension rows for a batch of control points, point-major.

    Per point: the D diagonal rows f_ii, then the mixed rows sqrt(2) f_ij
    for i < j in lexicographic order.
    """
    dim = config.dim
    pairs = [(i, i) for i in range(dim)]
    pairs += [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    blocks = []
    for i, j in pairs:
        rows = features_batch(config, points, unit_orders(dim, i, j))
        blocks.append(rows if i == j else math.sqrt(2.0) * rows)
    stacked = np.stack(blocks, axis=1)
    return stacked.reshape(points.shape[0] * len(pairs), config.n_weights)


def assemble_rows(samples: list[SurfaceSample], spec: RegularizerSpec,
                  config: BasisConfig) -> SystemRows:
    """
    Stack the distance, gradient and tension rows of a batch.

    Blocks are ordered [distance; gradient; tension]. A block whose
    weight is zero is left out, as are tension rows when R = 0.
    """
    n = config.n_weights
    if not samples:
        return SystemRows(A=np.zeros((0, n)), s=np.zeros(0))

    positions, normals = samples_to_arrays(samples)
    if positions.shape[1] != config.dim:
        raise OutOfDomainError(
            f"samples are {positions.shape[1]}-D, basis is {config.dim}-D"
        )
    _check_in_domain(positions, config)

    A_blocks, s_blocks = [], []
    if spec.lambda_d > 0:
        A_blocks.append(spec.lambda_d * features_batch(config, positions))
        s_blocks.append(np.zeros(len(samples)))

    if spec.lambda_g > 0:
        partials = [
            features_batch(config, positions, unit_orders(config.dim, d))
            for d in range(config.dim)
        ]
        # sample-major: the D gradient rows of a sample are adjacent
        A_blocks.append(spec.lambda_g * np.stack(partials, axis=1).reshape(-1, n))
        s_blocks.append(spec.lambda_g * normals.reshape(-1))

    if spec.uses_tension:
        points = _tension_points_batch(positions, normals, spec, config)
        if len(points):
            H = hessian_rows_batch(config, points)
            A_blocks.append(spec.lambda_t * H)
            s_blocks.append(np.zeros(H.shape[0]))

    return SystemRows(A=np.vstack(A_blocks), s=np.concatenate(s_blocks))


def _chunks(samples: list, size: int):
    for start in range(0, len(samples), size):
        yield samples[start:start + size]


def batch_fit(config: BasisConfig, samples: list[SurfaceSample],
              spec: RegularizerSpec, prior: FieldModel) -> FieldModel:
    """
    Batch Bayesian fit of all samples against the prior (w0, P0).

    Solves (A^T A + sigma2 P0^-1) w = A^T s + sigma2 P0^-1 w0 and returns
    P = (P0^-1 + A^T A / sigma2)^-1, the matrix the recursive update
    would reach after the same rows.
    """
    if prior.config != config:
        raise ValueError("prior model was built for a different basis")
    if not samples:
        return prior

    n = config.n_weights
    AtA = np.zeros((n, n))
    Ats = np.zeros(n)
    rows = 0
    for chunk in _chunks(samples, get_settings().ROW_CHUNK):
        system = assemble_rows(chunk, spec, config)
        AtA += system.A.T @ system.A
        Ats += system.A.T @ system.s
        rows += len(system)

    try:
        prior_info = linalg.cho_solve(linalg.cho_factor(prior.P), np.eye(n))
        lhs = AtA + spec.sigma2 * prior_info
        rhs = Ats + spec.sigma2 * (prior_info @ prior.w)
        factor = linalg.cho_factor(lhs)
        w = linalg.cho_solve(factor, rhs)
        P = spec.sigma2 * linalg.cho_solve(factor, np.eye(n))
    except linalg.LinAlgError as e:
        raise NumericalError(f"batch normal equations are singular: {e}") from e

    P = 0.5 * (P + P.T)
    logger.info("Batch fit: %d samples, %d rows, %d weights", len(samples), rows, n)
    return FieldModel(config=config, w=w, P=P, transform=prior.transform)


def rls_update(model: FieldModel, rows: SystemRows, sigma2: float) -> FieldModel:
    """
    One recursive least-squares step over a block of rows.

        Kg = P A^T (sigma2 I + A P A^T)^-1
        P <- P - Kg A P,  symmetrized
        w <- w + Kg (s - A w)
    """
    if sigma2 <= 0:
        raise NumericalError(f"sigma2 must be positive, got {sigma2}")
    if len(rows) == 0:
        return model
    A, s = rows.A, rows.s
    if A.shape[1] != model.n_weights:
        raise ValueError(
            f"rows have {A.shape[1]} columns, model has {model.n_weights} weights"
        )

    PAt = model.P @ A.T
    innovation_cov = sigma2 * np.eye(A.shape[0]) + A @ PAt
    try:
        factor = linalg.cho_factor(innovation_cov)
    except linalg.LinAlgError as e:
        raise NumericalError(
            f"innovation covariance is not invertible: {e}"
        ) from e
    # gain = PAt @ inv(innovation_cov), innovation_cov symmetric
    gain = linalg.cho_solve(factor, PAt.T).T

    w = model.w + gain @ (s - A @ model.w)
    P = model.P - gain @ PAt.T
    P = 0.5 * (P + P.T)
    return FieldModel(config=model.config, w=w, P=P, transform=model.transform)


def ingest(model: FieldModel, samples: list[SurfaceSample],
           spec: RegularizerSpec) -> FieldModel:
    """Assemble the rows of a batch and apply one recursive update."""
    if not samples:
        return model
    rows = assemble_rows(samples, spec, model.config)
    return rls_update(model, rows, spec.sigma2)


class OnlineFieldEstimator:
    """
    Single-writer holder of the current field model.

    ingest() builds the updated model off to the side and swaps the
    reference under a lock, so readers of `model` see either the old
    or the new model, never a partial update.
    """

    def __init__(self, model: FieldModel, spec: RegularizerSpec):
        self._model = model
        self.spec = spec
        self._lock = threading.Lock()
        self.latencies: list[float] = []

    @property
    def model(self) -> FieldModel:
        return self._model

    @property
    def updates(self) -> int:
        return len(self.latencies)

    def ingest(self, samples: list[SurfaceSample]) -> FieldModel:
        """Apply one update and return the model now visible to readers."""
        with self._lock:
            if not samples:
                logger.warning("Empty sample batch, model unchanged")
                return self._model
            started = time.perf_counter()
            updated = ingest(self._model, samples, self.spec)
            elapsed = time.perf_counter() - started
            self._model = updated
            self.latencies.append(elapsed)
        logger.debug("Ingested %d samples in %.2f ms", len(samples), elapsed * 1e3)
        return updated
