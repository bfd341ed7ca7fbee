"""
Point cloud and mesh file readers, and the raw-to-domain mapping.

Supported inputs:
  - xyz: `x y z nx ny nz` per line (`x y nx ny` in 2D), `#` comments
  - PLY: ascii 1.0 and binary_little_endian 1.0
  - OBJ: `v`, `vn` and `f` records, polygons fan-triangulated

Parse errors carry the file path and, for text formats, the line number.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from polynomial_sdf.exceptions import ConfigError, ParseError
from polynomial_sdf.models.enums import MeshFormat, PointFormat
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.sample import (
    DomainTransform,
    PointCloud,
    SurfaceSample,
    samples_to_arrays,
)

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.25

# Side of the box used when every point coincides
EPSILON_EXTENT = 1e-3

PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def _infer_format(path: Path, allowed: type) -> str:
    suffix = path.suffix.lower().lstrip(".")
    try:
        return allowed(suffix).value
    except ValueError:
        raise ConfigError(
            f"cannot infer format from {path.name!r}; "
            f"use one of {[f.value for f in allowed]}"
        ) from None


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise OSError(f"cannot read {path}: {e.strerror or e}") from e


# --- point clouds ---

def _samples_from_arrays(positions: np.ndarray, normals: np.ndarray,
                         path: Path) -> PointCloud:
    if not (np.isfinite(positions).all() and np.isfinite(normals).all()):
        raise ParseError("non-finite coordinate", path)
    lengths = np.linalg.norm(normals, axis=1)
    keep = lengths > 0
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        logger.warning("%s: dropped %d records with zero-length normals", path, dropped)
    samples = [
        SurfaceSample(position=tuple(p), normal=tuple(n))
        for p, n in zip(positions[keep].tolist(), normals[keep].tolist())
    ]
    logger.info("Loaded %d samples from %s", len(samples), path)
    return PointCloud(samples=samples, dropped=dropped)


def _parse_xyz(text: str, path: Path) -> PointCloud:
    records = []
    width = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if width is None:
            if len(tokens) not in (4, 6):
                raise ParseError(
                    f"expected 'x y z nx ny nz' or 'x y nx ny', got {len(tokens)} fields",
                    path, number,
                )
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(
                f"expected {width} fields, got {len(tokens)}", path, number
            )
        try:
            records.append([float(t) for t in tokens])
        except ValueError:
            raise ParseError(f"invalid number in {line!r}", path, number) from None

    if not records:
        return PointCloud()
    values = np.array(records)
    dim = width // 2
    return _samples_from_arrays(values[:, :dim], values[:, dim:], path)


@dataclass
class _PlyProperty:
    name: str
    dtype: str
    count_dtype: str | None = None

    @property
    def is_list(self) -> bool:
        return self.count_dtype is not None


@dataclass
class _PlyElement:
    name: str
    count: int
    properties: list[_PlyProperty]


def _ply_type(name: str, path: Path, line: int) -> str:
    if name not in PLY_TYPES:
        raise ParseError(f"unknown PLY type {name!r}", path, line)
    return PLY_TYPES[name]


def _parse_ply_header(data: bytes, path: Path) -> tuple[str, list[_PlyElement], int, int]:
    """Format, elements, byte offset of the body and its first line number."""
    marker = b"end_header"
    end = data.find(marker)
    if not data.startswith(b"ply") or end < 0:
        raise ParseError("not a PLY file", path, 1)
    newline = data.find(b"\n", end)
    body = len(data) if newline < 0 else newline + 1
    lines = data[:body].decode("ascii", errors="replace").splitlines()

    fmt = None
    elements: list[_PlyElement] = []
    for number, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens or tokens[0] in ("ply", "comment", "obj_info", "end_header"):
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in ("ascii", "binary_little_endian"):
                raise ParseError(f"unsupported PLY format {line!r}", path, number)
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(f"malformed element {line!r}", path, number)
            if not tokens[2].isdigit():
                raise ParseError(f"invalid element count {tokens[2]!r}", path, number)
            elements.append(_PlyElement(tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError(f"property before any element {line!r}", path, number)
            if len(tokens) == 5 and tokens[1] == "list":
                elements[-1].properties.append(_PlyProperty(
                    tokens[4],
                    _ply_type(tokens[3], path, number),
                    _ply_type(tokens[2], path, number),
                ))
            elif len(tokens) == 3:
                elements[-1].properties.append(
                    _PlyProperty(tokens[2], _ply_type(tokens[1], path, number))
                )
            else:
                raise ParseError(f"malformed property {line!r}", path, number)
        else:
            raise ParseError(f"unexpected header line {line!r}", path, number)
    if fmt is None:
        raise ParseError("missing PLY format line", path)
    return fmt, elements, body, len(lines) + 1


def _read_ply_ascii(data: bytes, elements: list[_PlyElement], body: int,
                    first_line: int, path: Path) -> dict[str, dict]:
    lines = data[body:].decode("ascii", errors="replace").splitlines()
    cursor = 0
    result = {}
    for element in elements:
        columns = {p.name: [] for p in element.properties}
        for _ in range(element.count):
            while cursor < len(lines) and not lines[cursor].strip():
                cursor += 1
            number = first_line + cursor
            if cursor >= len(lines):
                raise ParseError(
                    f"unexpected end of file in element {element.name!r}", path, number
                )
            tokens = lines[cursor].split()
            cursor += 1
            position = 0
            try:
                for prop in element.properties:
                    if prop.is_list:
                        n = int(tokens[position])
                        columns[prop.name].append(
                            [float(t) for t in tokens[position + 1:position + 1 + n]]
                        )
                        if len(columns[prop.name][-1]) != n:
                            raise IndexError
                        position += 1 + n
                    else:
                        columns[prop.name].append(float(tokens[position]))
                        position += 1
            except (IndexError, ValueError):
                raise ParseError(
                    f"malformed {element.name} record", path, number
                ) from None
        result[element.name] = columns
    return result


def _read_ply_binary(data: bytes, elements: list[_PlyElement], body: int,
                     path: Path) -> dict[str, dict]:
    offset = body
    result = {}
    for element in elements:
        if not any(p.is_list for p in element.properties):
            dtype = np.dtype([(p.name, "<" + p.dtype) for p in element.properties])
            size = dtype.itemsize * element.count
            if offset + size > len(data):
                raise ParseError(f"truncated element {element.name!r}", path)
            table = np.frombuffer(data, dtype=dtype, count=element.count, offset=offset)
            offset += size
            result[element.name] = {p.name: table[p.name].astype(float).tolist()
                                    for p in element.properties}
            continue

        columns = {p.name: [] for p in element.properties}
        try:
            for _ in range(element.count):
                for prop in element.properties:
                    if prop.is_list:
                        count_type = np.dtype("<" + prop.count_dtype)
                        n = int(np.frombuffer(data, count_type, 1, offset)[0])
                        offset += count_type.itemsize
                        item_type = np.dtype("<" + prop.dtype)
                        values = np.frombuffer(data, item_type, n, offset)
                        offset += item_type.itemsize * n
                        columns[prop.name].append(values.astype(float).tolist())
                    else:
                        item_type = np.dtype("<" + prop.dtype)
                        columns[prop.name].append(
                            float(np.frombuffer(data, item_type, 1, offset)[0])
                        )
                        offset += item_type.itemsize
        except ValueError:
            raise ParseError(f"truncated element {element.name!r}", path) from None
        result[element.name] = columns
    return result


def _read_ply(data: bytes, path: Path) -> dict[str, dict]:
    fmt, elements, body, first_line = _parse_ply_header(data, path)
    if fmt == "ascii":
        return _read_ply_ascii(data, elements, body, first_line, path)
    return _read_ply_binary(data, elements, body, path)


def _parse_ply_cloud(data: bytes, path: Path) -> PointCloud:
    vertex = _read_ply(data, path).get("vertex")
    if vertex is None:
        raise ParseError("PLY has no vertex element", path)
    axes = ["x", "y", "z"] if "z" in vertex else ["x", "y"]
    missing = [a for a in axes + ["n" + a for a in axes] if a not in vertex]
    if missing:
        raise ParseError(f"missing vertex properties {missing}", path)
    if not vertex["x"]:
        return PointCloud()
    positions = np.column_stack([vertex[a] for a in axes])
    normals = np.column_stack([vertex["n" + a] for a in axes])
    return _samples_from_arrays(positions, normals, path)


def load_point_cloud(path: str | Path, format: PointFormat | str | None = None) -> PointCloud:
    """Read surface samples (positions and normals) from a file."""
    path = Path(path)
    fmt = PointFormat(format).value if format else _infer_format(path, PointFormat)
    data = _read_bytes(path)
    if fmt == PointFormat.XYZ.value:
        return _parse_xyz(data.decode("utf-8", errors="replace"), path)
    return _parse_ply_cloud(data, path)


def point_cloud_text(cloud: PointCloud, format: PointFormat | str) -> str:
    fmt = PointFormat(format)
    positions, normals = samples_to_arrays(cloud.samples)
    rows = [
        " ".join(repr(v) for v in (*p, *n))
        for p, n in zip(positions.tolist(), normals.tolist())
    ]
    if fmt == PointFormat.XYZ:
        return "".join(row + "\n" for row in rows)

    dim = positions.shape[1] if len(rows) else 3
    axes = ["x", "y", "z"][:dim]
    header = ["ply", "format ascii 1.0", f"element vertex {len(rows)}"]
    header += [f"property double {a}" for a in axes]
    header += [f"property double n{a}" for a in axes]
    header.append("end_header")
    return "\n".join(header + rows) + "\n"


def write_point_cloud(cloud: PointCloud, path: str | Path,
                      format: PointFormat | str | None = None) -> None:
    """Write samples as xyz or ascii PLY, floats in round-trip form."""
    path = Path(path)
    fmt = PointFormat(format).value if format else _infer_format(path, PointFormat)
    path.write_text(point_cloud_text(cloud, fmt), encoding="ascii")


def load_points(path: str | Path, dim: int) -> np.ndarray:
    """Plain query coordinates, one point of dim values per line."""
    path = Path(path)
    rows = []
    for number, raw in enumerate(_read_bytes(path).decode("utf-8", errors="replace").splitlines(),
                                 start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace(",", " ").split()
        if len(tokens) != dim:
            raise ParseError(f"expected {dim} coordinates, got {len(tokens)}", path, number)
        try:
            rows.append([float(t) for t in tokens])
        except ValueError:
            raise ParseError(f"invalid number in {line!r}", path, number) from None
    return np.array(rows, dtype=float).reshape(-1, dim)


# --- meshes ---

def _obj_index(token: str, n_vertices: int, path: Path, line: int) -> int:
    try:
        index = int(token.split("/", 1)[0])
    except ValueError:
        raise ParseError(f"invalid face index {token!r}", path, line) from None
    resolved = index - 1 if index > 0 else n_vertices + index
    if index == 0 or not 0 <= resolved < n_vertices:
        raise ParseError(f"face index {index} out of range", path, line)
    return resolved


def _fan(polygon: list[int]) -> list[tuple[int, int, int]]:
    return [(polygon[0], polygon[k], polygon[k + 1]) for k in range(1, len(polygon) - 1)]


def _parse_obj(text: str, path: Path) -> TriangleMesh:
    vertices, normals, faces = [], [], []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        kind, args = tokens[0], tokens[1:]
        if kind in ("v", "vn"):
            if len(args) < 3:
                raise ParseError(f"{kind} record needs 3 coordinates", path, number)
            try:
                values = [float(a) for a in args[:3]]
            except ValueError:
                raise ParseError(f"invalid number in {raw.strip()!r}", path, number) from None
            (vertices if kind == "v" else normals).append(values)
        elif kind == "f":
            if len(args) < 3:
                raise ParseError("face needs at least 3 vertices", path, number)
            polygon = [_obj_index(a, len(vertices), path, number) for a in args]
            faces.extend(_fan(polygon))
        # texture coordinates, groups and materials are ignored

    vertex_normals = None
    if normals and len(normals) == len(vertices):
        vertex_normals = np.array(normals)
    return TriangleMesh(np.array(vertices, dtype=float).reshape(-1, 3),
                        np.array(faces, dtype=np.int64).reshape(-1, 3),
                        vertex_normals)


def _parse_ply_mesh(data: bytes, path: Path) -> TriangleMesh:
    elements = _read_ply(data, path)
    vertex = elements.get("vertex")
    if vertex is None or any(a not in vertex for a in "xyz"):
        raise ParseError("PLY mesh needs vertex x, y, z", path)
    vertices = np.column_stack([vertex[a] for a in "xyz"]) if vertex["x"] else np.zeros((0, 3))
    face = elements.get("face", {})
    lists = face.get("vertex_indices", face.get("vertex_index", []))
    faces = []
    for polygon in lists:
        indices = [int(i) for i in polygon]
        if len(indices) < 3 or min(indices) < 0 or max(indices) >= len(vertices):
            raise ParseError(f"invalid face {indices}", path)
        faces.extend(_fan(indices))
    return TriangleMesh(vertices, np.array(faces, dtype=np.int64).reshape(-1, 3))


def clean_mesh(mesh: TriangleMesh, source: str | Path = "mesh") -> tuple[TriangleMesh, int]:
    """Drop zero-area faces, warn about them and about non-manifold edges."""
    mesh, dropped = mesh.without_degenerate_faces()
    if dropped:
        logger.warning("%s: dropped %d zero-area faces", source, dropped)
    if mesh.n_faces and mesh.non_manifold_edges:
        logger.warning(
            "%s: %d non-manifold or boundary edges, distance signs may be unreliable",
            source, mesh.non_manifold_edges,
        )
    return mesh, dropped


def load_mesh(path: str | Path, format: MeshFormat | str | None = None) -> TriangleMesh:
    """Read a triangle mesh; polygons are fan-triangulated."""
    path = Path(path)
    fmt = MeshFormat(format).value if format else _infer_format(path, MeshFormat)
    data = _read_bytes(path)
    if fmt == MeshFormat.OBJ.value:
        mesh = _parse_obj(data.decode("utf-8", errors="replace"), path)
    else:
        mesh = _parse_ply_mesh(data, path)
    mesh, _ = clean_mesh(mesh, path)
    logger.info("Loaded mesh %s: %d vertices, %d faces",
                path, len(mesh.vertices), mesh.n_faces)
    return mesh


# --- domain mapping ---

def fit_domain(points, margin: float = DEFAULT_MARGIN) -> DomainTransform:
    """
    Isotropic transform taking the padded bounding cube of points
    onto the unit cube.

    The cube side is the largest extent times (1 + 2 margin), centered
    on the bounding box center. Coincident points get a small fixed box.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("fit_domain needs at least one point")
    if not 0 <= margin < 0.5:
        raise ValueError(f"margin must be in [0, 0.5), got {margin}")
    if not np.isfinite(points).all():
        raise ValueError("points must be finite")

    lo, hi = points.min(axis=0), points.max(axis=0)
    extent = float((hi - lo).max())
    side = extent * (1.0 + 2.0 * margin) if extent > 0 else EPSILON_EXTENT
    center = (lo + hi) / 2.0
    return DomainTransform(
        scale=1.0 / side,
        origin=tuple((center - side / 2.0).tolist()),
    )
