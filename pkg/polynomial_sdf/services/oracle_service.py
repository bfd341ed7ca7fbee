"""
Ground-truth signed distances from triangle meshes, surface sampling
and the error metrics of a learned field.

Distances are exact point-triangle distances. The sign comes from the
angle-weighted pseudo-normal of the closest feature (face, edge or
vertex): negative when (p - q) points against it. Dot products are
written out per component so a point gets bit-identical results
whether it was evaluated alone, in a batch or through the tree.
"""

import logging

import numpy as np
from scipy.spatial import cKDTree

from polynomial_sdf.config import get_settings
from polynomial_sdf.exceptions import EmptyMeshError
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.metrics import NEAR_THRESHOLD, MetricsReport
from polynomial_sdf.schemas.sample import SurfaceSample
from polynomial_sdf.services.field_service import query_batch

logger = logging.getLogger(__name__)

# Closest-feature codes returned by closest_points_on_triangles
REGION_FACE = 0
REGION_VERTEX_A, REGION_VERTEX_B, REGION_VERTEX_C = 1, 2, 3
REGION_EDGE_AB, REGION_EDGE_BC, REGION_EDGE_CA = 4, 5, 6

# Gradients below this norm carry no direction
MIN_GRADIENT_NORM = 1e-12

# Upper bound on point-face pairs evaluated at once by the brute-force scan
BRUTE_FORCE_PAIRS = 2_000_000

RAY_DIRECTION = np.array([0.5381, 0.6172, 0.5739]) / np.linalg.norm([0.5381, 0.6172, 0.5739])


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return num / np.where(den == 0, 1.0, den)


def closest_points_on_triangles(p: np.ndarray, a: np.ndarray, b: np.ndarray,
                                c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Closest point on triangle (a, b, c) to p, elementwise over broadcast
    leading dimensions, with the code of the feature it lies on.

    Voronoi-region classification of the point against the triangle's
    vertices, edges and interior, in that precedence.
    """
    ab, ac = b - a, c - a
    ap, bp, cp = p - a, p - b, p - c
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    masks = [
        (d1 <= 0) & (d2 <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2 >= 0) & (d6 <= 0),
        (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0),
    ]
    codes = [REGION_VERTEX_A, REGION_VERTEX_B, REGION_EDGE_AB,
             REGION_VERTEX_C, REGION_EDGE_CA, REGION_EDGE_BC]
    region = np.select(masks, codes, default=REGION_FACE)

    t_ab = _safe_ratio(d1, d1 - d3)[..., None]
    t_ca = _safe_ratio(d2, d2 - d6)[..., None]
    t_bc = _safe_ratio(d4 - d3, (d4 - d3) + (d5 - d6))[..., None]
    total = va + vb + vc
    v = _safe_ratio(vb, total)[..., None]
    w = _safe_ratio(vc, total)[..., None]

    shape = np.broadcast_shapes(p.shape, a.shape)
    q = np.empty(shape)
    choices = {
        REGION_FACE: lambda: a + ab * v + ac * w,
        REGION_VERTEX_A: lambda: a,
        REGION_VERTEX_B: lambda: b,
        REGION_VERTEX_C: lambda: c,
        REGION_EDGE_AB: lambda: a + ab * t_ab,
        REGION_EDGE_CA: lambda: a + ac * t_ca,
        REGION_EDGE_BC: lambda: b + (c - b) * t_bc,
    }
    for code, build in choices.items():
        mask = region == code
        if mask.any():
            q[mask] = np.broadcast_to(build(), shape)[mask]
    return q, region


class MeshOracle:
    """
    Signed distance and gradient queries against one mesh.

    With acceleration, a k-d tree over face centroids bounds the
    search: the exact distance u to the face with the nearest centroid
    is an upper bound, so every face that can be closest has its
    centroid within u + (largest face radius) of the point. Candidates
    are scanned in face order, so ties resolve as in the full scan.
    """

    def __init__(self, mesh: TriangleMesh, accelerate: bool | None = None):
        if mesh.is_empty:
            raise EmptyMeshError("mesh has no faces")
        self.mesh = mesh
        if accelerate is None:
            accelerate = get_settings().ORACLE_ACCELERATION
        self.accelerate = accelerate
        self._corners = mesh.corners
        self._max_radius = float(mesh.face_radii.max())
        self._tree = cKDTree(mesh.centroids) if accelerate else None

    def _closest_over(self, point: np.ndarray, faces: np.ndarray) -> tuple[float, np.ndarray, int, int]:
        corners = self._corners[faces]
        q, region = closest_points_on_triangles(
            point[None, :], corners[:, 0], corners[:, 1], corners[:, 2]
        )
        diff = point[None, :] - q
        sq = _dot(diff, diff)
        best = int(np.argmin(sq))
        return float(sq[best]), q[best], int(faces[best]), int(region[best])

    def _closest_brute(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = len(points)
        m = self.mesh.n_faces
        closest = np.empty((n, 3))
        face = np.empty(n, dtype=np.int64)
        region = np.empty(n, dtype=np.int64)
        chunk = max(1, BRUTE_FORCE_PAIRS // m)
        a, b, c = (self._corners[None, :, k] for k in range(3))
        for start in range(0, n, chunk):
            p = points[start:start + chunk, None, :]
            q, codes = closest_points_on_triangles(p, a, b, c)
            diff = p - q
            best = np.argmin(_dot(diff, diff), axis=1)
            rows = np.arange(len(best))
            closest[start:start + chunk] = q[rows, best]
            face[start:start + chunk] = best
            region[start:start + chunk] = codes[rows, best]
        return closest, face, region

    def _closest_tree(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = len(points)
        closest = np.empty((n, 3))
        face = np.empty(n, dtype=np.int64)
        region = np.empty(n, dtype=np.int64)
        _, nearest = self._tree.query(points)
        for i, point in enumerate(points):
            sq, _, _, _ = self._closest_over(point, np.array([nearest[i]]))
            bound = np.sqrt(sq) + self._max_radius
            bound += 1e-12 * (1.0 + bound)
            candidates = np.sort(np.asarray(self._tree.query_ball_point(point, bound),
                                            dtype=np.int64))
            _, closest[i], face[i], region[i] = self._closest_over(point, candidates)
        return closest, face, region

    def _pseudo_normals(self, face: np.ndarray, region: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        normals = mesh.face_normals[face].copy()
        vertex_normals = mesh.angle_weighted_normals
        edge_normals = mesh.edge_normals
        for code, corner in ((REGION_VERTEX_A, 0), (REGION_VERTEX_B, 1), (REGION_VERTEX_C, 2)):
            mask = region == code
            normals[mask] = vertex_normals[mesh.faces[face[mask], corner]]
        for code, edge in ((REGION_EDGE_AB, 0), (REGION_EDGE_BC, 1), (REGION_EDGE_CA, 2)):
            mask = region == code
            normals[mask] = edge_normals[mesh.face_edges[face[mask], edge]]
        return normals

    def closest(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Closest surface points, face indices and feature codes."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != 3:
            raise ValueError(f"mesh queries need 3-D points, got shape {points.shape}")
        if self.accelerate:
            return self._closest_tree(points)
        return self._closest_brute(points)

    def query(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Signed distances (n,) and unit gradients (n, 3)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        closest, face, region = self.closest(points)
        diff = points - closest
        distance = np.sqrt(_dot(diff, diff))
        normals = self._pseudo_normals(face, region)
        sign = np.where(_dot(diff, normals) < 0, -1.0, 1.0)

        gradient = self.mesh.face_normals[face].copy()
        off_surface = distance > MIN_GRADIENT_NORM
        gradient[off_surface] = (
            sign[off_surface, None] * diff[off_surface] / distance[off_surface, None]
        )
        return sign * distance, gradient


def mesh_signed_distance(mesh: TriangleMesh, point) -> tuple[float, np.ndarray]:
    """Signed distance and unit gradient at one point (full scan)."""
    distances, gradients = MeshOracle(mesh, accelerate=False).query(point)
    return float(distances[0]), gradients[0]


def inside_by_ray_parity(mesh: TriangleMesh, point) -> bool:
    """
    Inside test by counting ray crossings (Moller-Trumbore).

    The ray direction is fixed and deliberately not axis-aligned, so
    it almost never grazes an edge of a box-like mesh.
    """
    if mesh.is_empty:
        raise EmptyMeshError("mesh has no faces")
    origin = np.asarray(point, dtype=float)
    c = mesh.corners
    e1, e2 = c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]
    h = np.cross(RAY_DIRECTION, e2)
    det = _dot(e1, h)
    usable = np.abs(det) > 1e-14
    inv = np.where(usable, 1.0 / np.where(usable, det, 1.0), 0.0)
    s = origin - c[:, 0]
    u = inv * _dot(s, h)
    qv = np.cross(s, e1)
    v = inv * _dot(np.broadcast_to(RAY_DIRECTION, qv.shape), qv)
    t = inv * _dot(e2, qv)
    hits = usable & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 1e-12)
    return bool(np.count_nonzero(hits) % 2)


def sample_surface_arrays(mesh: TriangleMesh, n: int,
                          seed: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Area-weighted uniform surface points, their face normals and face indices."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if mesh.is_empty:
        raise EmptyMeshError("mesh has no faces")
    rng = np.random.default_rng(seed)
    areas = mesh.face_areas
    face = rng.choice(mesh.n_faces, size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    c = mesh.corners[face]
    points = (
        (1.0 - r1)[:, None] * c[:, 0]
        + (r1 * (1.0 - r2))[:, None] * c[:, 1]
        + (r1 * r2)[:, None] * c[:, 2]
    )
    return points, mesh.face_normals[face], face


def sample_surface(mesh: TriangleMesh, n: int, seed: int | None = None) -> list[SurfaceSample]:
    points, normals, _ = sample_surface_arrays(mesh, n, seed)
    return [
        SurfaceSample(position=tuple(p), normal=tuple(g))
        for p, g in zip(points.tolist(), normals.tolist())
    ]


def _stats(values: np.ndarray) -> tuple[float | None, float | None]:
    if values.size == 0:
        return None, None
    return float(values.mean()), float(values.std())


def compute_metrics(est_distance, est_gradient, true_distance,
                    true_gradient) -> MetricsReport:
    """MAE and GCD statistics, split at |true distance| = NEAR_THRESHOLD."""
    est_distance = np.asarray(est_distance, dtype=float)
    true_distance = np.asarray(true_distance, dtype=float)
    est_gradient = np.atleast_2d(np.asarray(est_gradient, dtype=float))
    true_gradient = np.atleast_2d(np.asarray(true_gradient, dtype=float))

    mae = np.abs(est_distance - true_distance)
    near = np.abs(true_distance) < NEAR_THRESHOLD

    est_norm = np.linalg.norm(est_gradient, axis=1)
    true_norm = np.linalg.norm(true_gradient, axis=1)
    valid = (est_norm > MIN_GRADIENT_NORM) & (true_norm > MIN_GRADIENT_NORM)
    cosine = np.einsum("ij,ij->i", est_gradient[valid], true_gradient[valid]) / (
        est_norm[valid] * true_norm[valid]
    )
    gcd = 1.0 - np.clip(cosine, -1.0, 1.0)
    excluded = int(np.count_nonzero(~valid))
    if excluded:
        logger.warning("%d points with vanishing gradient excluded from GCD", excluded)

    mae_mean, mae_std = _stats(mae)
    near_mean, near_std = _stats(mae[near])
    far_mean, far_std = _stats(mae[~near])
    gcd_mean, gcd_std = _stats(gcd)
    gcd_near_mean, gcd_near_std = _stats(gcd[near[valid]])
    return MetricsReport(
        count=int(mae.size),
        count_near=int(np.count_nonzero(near)),
        count_far=int(np.count_nonzero(~near)),
        mae_mean=mae_mean, mae_std=mae_std,
        mae_near_mean=near_mean, mae_near_std=near_std,
        mae_far_mean=far_mean, mae_far_std=far_std,
        gcd_mean=gcd_mean, gcd_std=gcd_std,
        gcd_near_mean=gcd_near_mean, gcd_near_std=gcd_near_std,
        gcd_excluded=excluded,
    )


def evaluate_against(model: FieldModel, points, true_distance,
                     true_gradient) -> MetricsReport:
    """Metrics of a model against known distances and gradients at points."""
    est_distance, est_gradient = query_batch(model, points)
    return compute_metrics(est_distance, est_gradient, true_distance, true_gradient)


def evaluate(model: FieldModel, mesh: TriangleMesh, eval_points,
             oracle: MeshOracle | None = None) -> MetricsReport:
    """Metrics of a model against a mesh given in model-domain coordinates."""
    oracle = oracle or MeshOracle(mesh)
    true_distance, true_gradient = oracle.query(eval_points)
    return evaluate_against(model, eval_points, true_distance, true_gradient)


def _inside_domain(points: np.ndarray, config: BasisConfig) -> np.ndarray:
    return np.all((points >= config.lower) & (points <= config.upper), axis=1)


def make_eval_points(config: BasisConfig, mesh: TriangleMesh, n_uniform: int = 2000,
                     n_shell: int = 2000, seed: int | None = 0,
                     oracle: MeshOracle | None = None) -> np.ndarray:
    """
    Uniform points over the domain plus a near-surface shell.

    Shell points are surface samples pushed along their normal by less
    than NEAR_THRESHOLD, kept only if inside the domain and confirmed
    near by the oracle.
    """
    rng = np.random.default_rng(seed)
    lower, upper = np.array(config.lower), np.array(config.upper)
    uniform = lower + rng.random((n_uniform, config.dim)) * (upper - lower)
    if n_shell <= 0:
        return uniform

    oracle = oracle or MeshOracle(mesh)
    surface, normals, _ = sample_surface_arrays(mesh, n_shell, int(rng.integers(2**31)))
    offsets = rng.uniform(-NEAR_THRESHOLD, NEAR_THRESHOLD, n_shell) * 0.999
    shell = surface + offsets[:, None] * normals
    shell = shell[_inside_domain(shell, config)]
    if len(shell):
        distance, _ = oracle.query(shell)
        shell = shell[np.abs(distance) < NEAR_THRESHOLD]
    logger.debug("Eval points: %d uniform, %d shell", len(uniform), len(shell))
    return np.vstack([uniform, shell])
