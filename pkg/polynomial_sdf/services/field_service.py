"""
Tensor-product features and queries of the learned field.

Multi-dimensional features are Kronecker products of the per-axis
rows, axis 1 outermost: Psi(x, y, z) = phi(x) (x) phi(y) (x) phi(z).
The weight vector is therefore the C-order flattening of a
(M, M, ..., M) tensor indexed by (i_x, i_y, i_z).

The gradient is the stack of the D partial-derivative features,
each dotted with w, and the Hessian entry (i, j) uses the feature
row differentiated once along i and once along j.
"""

import logging
from functools import reduce

import numpy as np
from scipy import linalg

from polynomial_sdf.config import get_settings
from polynomial_sdf.exceptions import NumericalError, OutOfDomainError
from polynomial_sdf.models.field_model import FieldModel, QueryResult
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.services.basis_service import axis_bases

logger = logging.getLogger(__name__)

# Ridge used when fitting the spherical prior on the grid
PRIOR_RIDGE = 1e-10


def param_count(config: BasisConfig) -> int:
    """Number of weights, M^D with M = (K - 1) S + 2."""
    return config.free_per_axis ** config.dim


def _check_orders(orders: tuple[int, ...], dim: int) -> tuple[int, ...]:
    orders = tuple(int(o) for o in orders)
    if len(orders) != dim:
        raise ValueError(f"need {dim} derivative orders, got {len(orders)}")
    if any(o < 0 or o > 2 for o in orders) or sum(orders) > 2:
        raise ValueError(f"orders must be in [0, 2] with sum <= 2, got {orders}")
    return orders


def _as_points(points, dim: int) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != dim:
        raise OutOfDomainError(
            f"points must have {dim} coordinates, got shape {points.shape}"
        )
    return points


def _row_kron(rows: list[np.ndarray]) -> np.ndarray:
    """Row-wise Kronecker product of (n, M_d) blocks, first block outermost."""
    def combine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)
    return reduce(combine, rows)


def features(config: BasisConfig, x, orders: tuple[int, ...] | None = None) -> np.ndarray:
    """Feature row of N_w scalars at a single point x."""
    return features_batch(config, np.atleast_2d(x), orders)[0]


def features_batch(config: BasisConfig, points,
                   orders: tuple[int, ...] | None = None) -> np.ndarray:
    """Feature rows (n, N_w) for a batch of points."""
    orders = _check_orders(orders or (0,) * config.dim, config.dim)
    points = _as_points(points, config.dim)
    axes = axis_bases(config)
    rows = [axis.phi_batch(points[:, d], orders[d]) for d, axis in enumerate(axes)]
    return _row_kron(rows)


def unit_orders(dim: int, *axes: int) -> tuple[int, ...]:
    """Derivative orders with one extra derivative along each listed axis."""
    orders = [0] * dim
    for a in axes:
        orders[a] += 1
    return tuple(orders)


def query(model: FieldModel, x) -> QueryResult:
    """Distance Psi(x) w and gradient (dPsi/dx_d)(x) w at one point."""
    distances, gradients = query_batch(model, np.atleast_2d(x))
    return QueryResult(distance=float(distances[0]), gradient=gradients[0])


def query_batch(model: FieldModel, points) -> tuple[np.ndarray, np.ndarray]:
    """Distances (n,) and gradients (n, D) for a batch of points."""
    config = model.config
    points = _as_points(points, config.dim)
    axes = axis_bases(config)
    values = [axis.phi_batch(points[:, d], 0) for d, axis in enumerate(axes)]
    slopes = [axis.phi_batch(points[:, d], 1) for d, axis in enumerate(axes)]

    distances = _row_kron(values) @ model.w
    gradients = np.empty((points.shape[0], config.dim))
    for d in range(config.dim):
        rows = [slopes[a] if a == d else values[a] for a in range(config.dim)]
        gradients[:, d] = _row_kron(rows) @ model.w
    return distances, gradients


def hessian_feature_rows(config: BasisConfig, x) -> dict[tuple[int, int], np.ndarray]:
    """Second-derivative feature rows for every (i, j) with i <= j."""
    point = _as_points(x, config.dim)
    axes = axis_bases(config)
    per_axis = [
        [axis.phi_batch(point[:, d], order)[0] for order in range(3)]
        for d, axis in enumerate(axes)
    ]
    rows = {}
    for i in range(config.dim):
        for j in range(i, config.dim):
            orders = unit_orders(config.dim, i, j)
            rows[(i, j)] = reduce(
                np.kron, [per_axis[d][orders[d]] for d in range(config.dim)]
            )
    return rows


def query_hessian(model: FieldModel, x) -> np.ndarray:
    """D-by-D Hessian of the field at x; symmetric by construction."""
    dim = model.config.dim
    H = np.empty((dim, dim))
    for (i, j), row in hessian_feature_rows(model.config, x).items():
        H[i, j] = H[j, i] = row @ model.w
    return H


def _sphere_surface_hits_domain(config: BasisConfig, center: np.ndarray,
                                radius: float) -> bool:
    lower, upper = np.array(config.lower), np.array(config.upper)
    nearest = np.clip(center, lower, upper)
    farthest = np.where(center - lower > upper - center, lower, upper)
    return (np.linalg.norm(nearest - center) <= radius
            <= np.linalg.norm(farthest - center))


def init_spherical_prior(config: BasisConfig, center, radius: float,
                         strength: float) -> FieldModel:
    """
    Model encoding the sphere SDF ||x - c|| - r, with P0 = strength * I.

    The weights are a ridge fit of the analytic SDF sampled on a
    uniform grid. The grid and the basis are both tensor products,
    so the fit factors into one small regularized solve per axis.
    """
    center = np.asarray(center, dtype=float)
    if center.shape != (config.dim,):
        raise ValueError(f"center must have {config.dim} coordinates")
    if radius <= 0:
        raise ValueError(f"prior radius must be positive, got {radius}")
    if strength <= 0:
        raise ValueError(f"prior strength must be positive, got {strength}")
    if not _sphere_surface_hits_domain(config, center, radius):
        raise ValueError(
            f"sphere (center={center.tolist()}, radius={radius}) "
            "does not intersect the domain"
        )

    resolution = max(get_settings().PRIOR_GRID_RESOLUTION, config.free_per_axis + 2)
    nodes = [np.linspace(lo, hi, resolution) for lo, hi in config.domain]
    mesh = np.meshgrid(*nodes, indexing="ij")
    sdf = np.sqrt(sum((m - c) ** 2 for m, c in zip(mesh, center))) - radius

    weights = sdf
    for d, axis in enumerate(axis_bases(config)):
        Phi = axis.phi_batch(nodes[d], 0)
        gram = Phi.T @ Phi + PRIOR_RIDGE * np.eye(axis.n_free)
        try:
            solver = linalg.solve(gram, Phi.T, assume_a="pos")
        except linalg.LinAlgError as e:
            raise NumericalError(f"prior fit failed on axis {d}: {e}") from e
        # Contract axis d of the value tensor with the per-axis solver
        weights = np.moveaxis(np.tensordot(solver, weights, axes=(1, d)), 0, d)

    logger.debug(
        "Spherical prior fitted on %d^%d grid (center=%s, radius=%g)",
        resolution, config.dim, center.tolist(), radius,
    )
    n = config.n_weights
    return FieldModel(
        config=config,
        w=np.ascontiguousarray(weights).reshape(n),
        P=strength * np.eye(n),
    )
