"""
Dense grid evaluation and level-set extraction.

Grid evaluation is separable: the per-axis basis rows of the grid
nodes are contracted one axis at a time with the weight tensor, so a
128^3 grid costs a few small matrix products instead of 2M feature rows.

Extraction uses marching cubes (3-D) and marching squares (2-D) from
scikit-image. Triangles are then wound so their normals point towards
increasing field values, i.e. outward for a signed distance field.
"""

import logging
from pathlib import Path

import numpy as np
from scipy import ndimage
from skimage import measure

from polynomial_sdf.exceptions import ParseError
from polynomial_sdf.models.enums import GridFormat, MeshFormat
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.models.grid import ContourSet, ScalarGrid
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.services.basis_service import axis_bases

logger = logging.getLogger(__name__)


def _resolution(resolution, dim: int) -> tuple[int, ...]:
    if np.isscalar(resolution):
        resolution = (int(resolution),) * dim
    resolution = tuple(int(n) for n in resolution)
    if len(resolution) != dim or any(n < 2 for n in resolution):
        raise ValueError(f"need {dim} resolutions >= 2, got {resolution}")
    return resolution


def grid_axes(config: BasisConfig, resolution) -> list[np.ndarray]:
    """Node coordinates per axis, endpoints exactly on the domain bounds."""
    resolution = _resolution(resolution, config.dim)
    return [np.linspace(lo, hi, n) for (lo, hi), n in zip(config.domain, resolution)]


def _grid_frame(config: BasisConfig, resolution: tuple[int, ...]):
    origin = tuple(float(lo) for lo in config.lower)
    spacing = tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(config.domain, resolution))
    return origin, spacing


def _contract(weights: np.ndarray, rows: list[np.ndarray]) -> np.ndarray:
    """Apply rows[d] (n_d, M) along axis d of the (M, ..., M) weight tensor."""
    out = weights
    for d, Phi in enumerate(rows):
        out = np.moveaxis(np.tensordot(Phi, out, axes=(1, d)), 0, d)
    return out


def eval_grid(model: FieldModel, resolution, with_gradient: bool = False) -> ScalarGrid:
    """
    Field values (and optionally gradients) at every node of a domain grid.

    The separable contraction agrees with query_batch at the same nodes
    to about 1e-10 relative, not bit for bit.
    """
    config = model.config
    resolution = _resolution(resolution, config.dim)
    nodes = grid_axes(config, resolution)
    bases = axis_bases(config)
    weights = model.w.reshape((config.free_per_axis,) * config.dim)

    values_rows = [axis.phi_batch(x, 0) for axis, x in zip(bases, nodes)]
    values = _contract(weights, values_rows)

    gradients = None
    if with_gradient:
        slope_rows = [axis.phi_batch(x, 1) for axis, x in zip(bases, nodes)]
        gradients = np.stack([
            _contract(weights, [slope_rows[a] if a == d else values_rows[a]
                                for a in range(config.dim)])
            for d in range(config.dim)
        ], axis=-1)

    origin, spacing = _grid_frame(config, resolution)
    logger.debug("Evaluated %s grid", "x".join(map(str, resolution)))
    return ScalarGrid(values=values, origin=origin, spacing=spacing, gradients=gradients)


def sample_grid(fn, config: BasisConfig, resolution) -> ScalarGrid:
    """Grid of fn(points) -> values for an arbitrary field, e.g. an analytic SDF."""
    resolution = _resolution(resolution, config.dim)
    mesh = np.meshgrid(*grid_axes(config, resolution), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = np.asarray(fn(points), dtype=float).reshape(resolution)
    origin, spacing = _grid_frame(config, resolution)
    return ScalarGrid(values=values, origin=origin, spacing=spacing)


def _index_coords(grid: ScalarGrid, points: np.ndarray) -> np.ndarray:
    origin = np.asarray(grid.origin)
    spacing = np.asarray(grid.spacing)
    return ((np.atleast_2d(points) - origin) / spacing).T


def trilinear(grid: ScalarGrid, points) -> np.ndarray:
    """Linear interpolation of grid values at world points (bilinear in 2-D)."""
    return ndimage.map_coordinates(
        grid.values, _index_coords(grid, np.asarray(points, dtype=float)),
        order=1, mode="nearest",
    )


def _crosses(grid: ScalarGrid, iso: float) -> bool:
    return bool(grid.values.min() < iso < grid.values.max())


def _orient_outward(grid: ScalarGrid, vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Flip faces whose normal points towards decreasing field values."""
    slopes = np.gradient(grid.values, *grid.spacing)
    corners = vertices[faces]
    centroids = corners.mean(axis=1)
    coords = _index_coords(grid, centroids)
    field_gradient = np.stack([
        ndimage.map_coordinates(s, coords, order=1, mode="nearest") for s in slopes
    ], axis=1)
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    flip = np.einsum("ij,ij->i", normals, field_gradient) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, ::-1]
    return faces


def extract_level_set(grid: ScalarGrid, iso: float = 0.0) -> TriangleMesh | ContourSet:
    """
    Vertices on grid edges where values straddle iso, placed by linear
    interpolation: a triangle mesh for 3-D grids, polylines for 2-D.
    """
    if not np.isfinite(grid.values).all():
        raise ValueError("grid contains non-finite values")
    if grid.dim == 2:
        if not _crosses(grid, iso):
            return ContourSet(polylines=[])
        contours = measure.find_contours(grid.values, iso, positive_orientation="low")
        origin, spacing = np.asarray(grid.origin), np.asarray(grid.spacing)
        return ContourSet(polylines=[origin + c * spacing for c in contours])

    if grid.dim != 3:
        raise ValueError(f"level sets need a 2-D or 3-D grid, got {grid.dim}-D")
    if not _crosses(grid, iso):
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    vertices, faces, _, _ = measure.marching_cubes(
        grid.values, level=iso, spacing=grid.spacing, allow_degenerate=False,
    )
    vertices = vertices + np.asarray(grid.origin)
    faces = _orient_outward(grid, vertices, faces.astype(np.int64))
    logger.info("Level set %g: %d vertices, %d faces", iso, len(vertices), len(faces))
    return TriangleMesh(vertices, faces)


# --- export ---

def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".hdr")


def grid_raw_bytes(grid: ScalarGrid) -> bytes:
    return np.ascontiguousarray(grid.values, dtype="<f4").tobytes()


def grid_header(grid: ScalarGrid) -> str:
    return (
        f"dims {' '.join(str(n) for n in grid.resolution)}\n"
        f"origin {_floats(grid.origin)}\n"
        f"spacing {_floats(grid.spacing)}\n"
        "type float32\n"
        "endian little\n"
        "order row-major\n"
    )


def vtk_text(grid: ScalarGrid) -> str:
    """Legacy VTK structured points, x fastest; 2-D grids get a unit z axis."""
    dims = list(grid.resolution) + [1] * (3 - grid.dim)
    origin = list(grid.origin) + [0.0] * (3 - grid.dim)
    spacing = list(grid.spacing) + [1.0] * (3 - grid.dim)
    values = grid.values.ravel(order="F")
    lines = [
        "# vtk DataFile Version 3.0",
        "polysdf grid",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {' '.join(str(n) for n in dims)}",
        f"ORIGIN {_floats(origin)}",
        f"SPACING {_floats(spacing)}",
        f"POINT_DATA {values.size}",
        "SCALARS sdf double 1",
        "LOOKUP_TABLE default",
    ]
    lines += [repr(float(v)) for v in values]
    return "\n".join(lines) + "\n"


def export_grid(grid: ScalarGrid, path: str | Path,
                format: GridFormat | str = GridFormat.RAW) -> list[Path]:
    """Write a grid; returns every file written."""
    path = Path(path)
    if GridFormat(format) == GridFormat.VTK:
        path.write_text(vtk_text(grid), encoding="ascii")
        return [path]
    path.write_bytes(grid_raw_bytes(grid))
    _sidecar(path).write_text(grid_header(grid), encoding="ascii")
    return [path, _sidecar(path)]


def _header_fields(text: str, path: Path) -> dict[str, list[str]]:
    fields = {}
    for number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) < 2:
            raise ParseError(f"malformed header line {line!r}", path, number)
        fields[tokens[0]] = tokens[1:]
    return fields


def _load_raw(path: Path) -> ScalarGrid:
    header = _sidecar(path)
    fields = _header_fields(header.read_text(encoding="ascii"), header)
    try:
        dims = tuple(int(n) for n in fields["dims"])
        origin = tuple(float(v) for v in fields["origin"])
        spacing = tuple(float(v) for v in fields["spacing"])
    except (KeyError, ValueError) as e:
        raise ParseError(f"invalid grid header: {e}", header) from e
    data = path.read_bytes()
    if len(data) != 4 * int(np.prod(dims)):
        raise ParseError(f"expected {4 * int(np.prod(dims))} bytes, got {len(data)}", path)
    values = np.frombuffer(data, dtype="<f4").reshape(dims).astype(np.float64)
    return ScalarGrid(values=values, origin=origin, spacing=spacing)


def _load_vtk(path: Path) -> ScalarGrid:
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines or not lines[0].startswith("# vtk"):
        raise ParseError("not a legacy VTK file", path, 1)
    try:
        start = lines.index("LOOKUP_TABLE default") + 1
        fields = _header_fields("\n".join(lines[3:start - 2]), path)
        dims = [int(n) for n in fields["DIMENSIONS"]]
        origin = [float(v) for v in fields["ORIGIN"]]
        spacing = [float(v) for v in fields["SPACING"]]
        values = np.array([float(v) for v in lines[start:]])
    except (KeyError, ValueError) as e:
        raise ParseError(f"invalid VTK grid: {e}", path) from e
    dim = 2 if dims[2] == 1 else 3
    values = values.reshape(dims, order="F")
    if dim == 2:
        values = values[:, :, 0]
    return ScalarGrid(values=values, origin=tuple(origin[:dim]),
                      spacing=tuple(spacing[:dim]))


def load_grid(path: str | Path, format: GridFormat | str = GridFormat.RAW) -> ScalarGrid:
    path = Path(path)
    if GridFormat(format) == GridFormat.VTK:
        return _load_vtk(path)
    return _load_raw(path)


def mesh_text(mesh: TriangleMesh, format: MeshFormat | str = MeshFormat.OBJ) -> str:
    vertices = [_floats(v) for v in mesh.vertices]
    if MeshFormat(format) == MeshFormat.OBJ:
        lines = [f"v {v}" for v in vertices]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
        return "".join(line + "\n" for line in lines)

    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(vertices)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    lines += vertices
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces.tolist()]
    return "\n".join(lines) + "\n"


def export_mesh(mesh: TriangleMesh, path: str | Path,
                format: MeshFormat | str = MeshFormat.OBJ) -> list[Path]:
    path = Path(path)
    if mesh.is_empty:
        logger.warning("Exporting empty mesh to %s", path)
    path.write_text(mesh_text(mesh, format), encoding="ascii")
    return [path]


def contours_text(contours: ContourSet) -> str:
    """OBJ with one `l` polyline per contour, z = 0."""
    lines, offset = [], 1
    for polyline in contours.polylines:
        lines += [f"v {_floats(p)} 0.0" for p in polyline]
        indices = " ".join(str(offset + i) for i in range(len(polyline)))
        lines.append(f"l {indices}")
        offset += len(polyline)
    return "".join(line + "\n" for line in lines)


def export_contours(contours: ContourSet, path: str | Path) -> list[Path]:
    path = Path(path)
    if contours.is_empty:
        logger.warning("Exporting empty contour set to %s", path)
    path.write_text(contours_text(contours), encoding="ascii")
    return [path]
