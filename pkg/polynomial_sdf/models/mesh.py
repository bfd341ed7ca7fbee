"""
Triangle mesh container with the per-feature normals used for signing.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

# Faces with twice-area below this are treated as degenerate
DEGENERATE_AREA = 1e-14


def _unit_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return np.divide(v, norms, out=np.zeros_like(v), where=norms > 0)


@dataclass(frozen=True)
class TriangleMesh:
    """
    Vertices (n, 3) and triangles (m, 3) of vertex indices.

    Faces are assumed to be wound counter-clockwise seen from outside.
    Face, edge and angle-weighted vertex normals are computed lazily
    and cached; the arrays themselves are read-only.
    """
    vertices: np.ndarray
    faces: np.ndarray
    vertex_normals: np.ndarray | None = field(default=None)

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ValueError("face index out of range")
        vertices.flags.writeable = False
        faces.flags.writeable = False
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def is_empty(self) -> bool:
        return self.n_faces == 0

    @cached_property
    def corners(self) -> np.ndarray:
        """(m, 3, 3) corner positions per face."""
        return self.vertices[self.faces]

    @cached_property
    def _cross(self) -> np.ndarray:
        c = self.corners
        return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])

    @cached_property
    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def face_normals(self) -> np.ndarray:
        return _unit_rows(self._cross)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @cached_property
    def face_radii(self) -> np.ndarray:
        """Largest centroid-to-corner distance of each face."""
        return np.linalg.norm(self.corners - self.centroids[:, None, :], axis=2).max(axis=1)

    @cached_property
    def angle_weighted_normals(self) -> np.ndarray:
        """Per-vertex pseudo-normals: face normals weighted by incident angle."""
        c = self.corners
        normals = np.zeros_like(self.vertices)
        for k in range(3):
            a = _unit_rows(c[:, (k + 1) % 3] - c[:, k])
            b = _unit_rows(c[:, (k + 2) % 3] - c[:, k])
            angle = np.arccos(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))
            np.add.at(normals, self.faces[:, k], angle[:, None] * self.face_normals)
        return _unit_rows(normals)

    @cached_property
    def _edge_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # edge k of a face joins corner k and corner k+1
        pairs = np.stack(
            [self.faces[:, [k, (k + 1) % 3]] for k in range(3)], axis=1
        ).reshape(-1, 2)
        keys = np.sort(pairs, axis=1)
        unique, inverse, counts = np.unique(
            keys, axis=0, return_inverse=True, return_counts=True
        )
        return unique, inverse.reshape(-1, 3), counts

    @property
    def face_edges(self) -> np.ndarray:
        """(m, 3) index of each face edge in the unique edge table."""
        return self._edge_table[1]

    @cached_property
    def edge_normals(self) -> np.ndarray:
        """Per-edge pseudo-normals: normalized sum of adjacent face normals."""
        unique, face_edges, _ = self._edge_table
        normals = np.zeros((len(unique), 3))
        for k in range(3):
            np.add.at(normals, face_edges[:, k], self.face_normals)
        return _unit_rows(normals)

    @cached_property
    def non_manifold_edges(self) -> int:
        """Number of edges not shared by exactly two faces."""
        return int(np.count_nonzero(self._edge_table[2] != 2))

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def without_degenerate_faces(self) -> tuple["TriangleMesh", int]:
        """Copy with zero-area faces removed, and how many were removed."""
        keep = 2.0 * self.face_areas > DEGENERATE_AREA
        dropped = int(np.count_nonzero(~keep))
        if not dropped:
            return self, 0
        return TriangleMesh(self.vertices, self.faces[keep], self.vertex_normals), dropped

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=float),
                            self.faces, self.vertex_normals)

    def scaled(self, factor: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices * float(factor), self.faces,
                            self.vertex_normals)

    @classmethod
    def box(cls, center=(0.0, 0.0, 0.0), size: float = 1.0) -> "TriangleMesh":
        """Axis-aligned cube with 8 vertices and 12 outward triangles."""
        h = size / 2.0
        signs = np.array([
            [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
            [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
        ], dtype=float)
        faces = np.array([
            [0, 2, 1], [0, 3, 2],   # z-
            [4, 5, 6], [4, 6, 7],   # z+
            [0, 1, 5], [0, 5, 4],   # y-
            [3, 7, 6], [3, 6, 2],   # y+
            [0, 4, 7], [0, 7, 3],   # x-
            [1, 2, 6], [1, 6, 5],   # x+
        ])
        return cls(np.asarray(center, dtype=float) + h * signs, faces)

    @classmethod
    def icosphere(cls, subdivisions: int = 2, center=(0.0, 0.0, 0.0),
                  radius: float = 1.0) -> "TriangleMesh":
        """Subdivided icosahedron projected onto a sphere."""
        t = (1.0 + 5.0 ** 0.5) / 2.0
        vertices = [
            (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
            (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
            (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
        ]
        vertices = [np.array(v, dtype=float) / np.linalg.norm(v) for v in vertices]
        faces = [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ]

        for _ in range(subdivisions):
            midpoints: dict[tuple[int, int], int] = {}

            def midpoint(a: int, b: int) -> int:
                key = (min(a, b), max(a, b))
                if key not in midpoints:
                    m = vertices[a] + vertices[b]
                    vertices.append(m / np.linalg.norm(m))
                    midpoints[key] = len(vertices) - 1
                return midpoints[key]

            refined = []
            for a, b, c in faces:
                ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
                refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
            faces = refined

        points = np.array(vertices)
        faces = np.array(faces)
        # orient every face away from the center
        corners = points[faces]
        normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        inward = np.einsum("ij,ij->i", normals, corners.mean(axis=1)) < 0
        faces[inward] = faces[inward][:, ::-1]
        return cls(np.asarray(center, dtype=float) + radius * points, faces)
