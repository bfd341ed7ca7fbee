"""
Analytic 2-D shapes hidden from the surveying agent.

Each shape knows its exact signed distance and gradient, and can
answer range-sensor raycasts.
"""

import math
from abc import ABC, abstractmethod

import numpy as np

from polynomial_sdf.models.field_model import QueryResult

# Sphere tracing stops when the distance falls below this
TRACE_TOLERANCE = 1e-10
TRACE_MAX_ITERATIONS = 512


def _points(points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 2:
        raise ValueError(f"shapes are 2-D, got points of shape {points.shape}")
    return points


def _unit(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    fallback = np.zeros_like(v)
    fallback[:, 0] = 1.0
    return np.where(norms > 0, v / np.where(norms > 0, norms, 1.0), fallback)


def _segment_closest(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Closest points on segments (a, b) for broadcast point/segment arrays."""
    ab = b - a
    t = np.einsum("...i,...i->...", points - a, ab) / np.einsum("...i,...i->...", ab, ab)
    return a + np.clip(t, 0.0, 1.0)[..., None] * ab


class HiddenShape(ABC):
    """A closed 2-D shape with exact signed distance."""

    @abstractmethod
    def signed_distance(self, points) -> np.ndarray:
        """Signed distances (n,), negative inside."""

    @abstractmethod
    def gradient(self, points) -> np.ndarray:
        """Unit gradients (n, 2) of the signed distance."""

    def raycast(self, origin, direction, max_range: float) -> float | None:
        """
        Distance along a unit direction to the first surface hit, or None.

        Sphere tracing on the exact field; rays starting inside never hit.
        """
        origin = np.asarray(origin, dtype=float)
        direction = np.asarray(direction, dtype=float)
        t = 0.0
        for _ in range(TRACE_MAX_ITERATIONS):
            d = float(self.signed_distance(origin + t * direction)[0])
            if d < 0:
                return None if t == 0.0 else t
            if d < TRACE_TOLERANCE:
                return t
            t += d
            if t > max_range:
                return None
        return None

    def query(self, x) -> QueryResult:
        return QueryResult(
            distance=float(self.signed_distance(x)[0]),
            gradient=self.gradient(x)[0],
        )


class Circle(HiddenShape):

    def __init__(self, center=(0.5, 0.5), radius: float = 0.2):
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def signed_distance(self, points) -> np.ndarray:
        return np.linalg.norm(_points(points) - self.center, axis=1) - self.radius

    def gradient(self, points) -> np.ndarray:
        return _unit(_points(points) - self.center)

    def raycast(self, origin, direction, max_range: float) -> float | None:
        offset = np.asarray(origin, dtype=float) - self.center
        direction = np.asarray(direction, dtype=float)
        b = float(offset @ direction)
        c = float(offset @ offset) - self.radius ** 2
        disc = b * b - c
        if c < 0 or disc < 0:
            return None
        t = -b - math.sqrt(disc)
        if t < 0 or t > max_range:
            return None
        return t


class Capsule(HiddenShape):
    """Points within radius of the segment (a, b)."""

    def __init__(self, a=(0.35, 0.5), b=(0.65, 0.5), radius: float = 0.12):
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if np.array_equal(self.a, self.b):
            raise ValueError("capsule axis endpoints must differ")
        self.radius = float(radius)

    def _offset(self, points) -> np.ndarray:
        points = _points(points)
        return points - _segment_closest(points, self.a, self.b)

    def signed_distance(self, points) -> np.ndarray:
        return np.linalg.norm(self._offset(points), axis=1) - self.radius

    def gradient(self, points) -> np.ndarray:
        return _unit(self._offset(points))


class Polygon(HiddenShape):
    """Simple polygon, vertices in counter-clockwise order."""

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise ValueError("polygon needs at least 3 2-D vertices")
        self.vertices = vertices
        self._a = vertices
        self._b = np.roll(vertices, -1, axis=0)

    @classmethod
    def regular(cls, sides: int, center=(0.5, 0.5), radius: float = 0.2) -> "Polygon":
        angles = 2 * np.pi * np.arange(sides) / sides
        return cls(np.asarray(center) + radius * np.column_stack([np.cos(angles), np.sin(angles)]))

    def _inside(self, points: np.ndarray) -> np.ndarray:
        # even-odd crossing test against a horizontal ray
        px, py = points[:, 0:1], points[:, 1:2]
        ax, ay = self._a[:, 0], self._a[:, 1]
        bx, by = self._b[:, 0], self._b[:, 1]
        straddles = (ay > py) != (by > py)
        dy = np.where(by == ay, 1.0, by - ay)
        cross_x = ax + (py - ay) * (bx - ax) / dy
        return np.count_nonzero(straddles & (px < cross_x), axis=1) % 2 == 1

    def _closest(self, points: np.ndarray) -> np.ndarray:
        candidates = _segment_closest(points[:, None, :], self._a[None], self._b[None])
        sq = np.sum((points[:, None, :] - candidates) ** 2, axis=2)
        best = np.argmin(sq, axis=1)
        return candidates[np.arange(len(points)), best]

    def signed_distance(self, points) -> np.ndarray:
        points = _points(points)
        distance = np.linalg.norm(points - self._closest(points), axis=1)
        return np.where(self._inside(points), -distance, distance)

    def gradient(self, points) -> np.ndarray:
        points = _points(points)
        sign = np.where(self._inside(points), -1.0, 1.0)
        return _unit(sign[:, None] * (points - self._closest(points)))

    def raycast(self, origin, direction, max_range: float) -> float | None:
        origin = np.asarray(origin, dtype=float)
        direction = np.asarray(direction, dtype=float)
        if self._inside(origin[None])[0]:
            return None
        edge = self._b - self._a
        denom = direction[0] * edge[:, 1] - direction[1] * edge[:, 0]
        parallel = np.abs(denom) < 1e-15
        denom = np.where(parallel, 1.0, denom)
        rel = self._a - origin
        t = (rel[:, 0] * edge[:, 1] - rel[:, 1] * edge[:, 0]) / denom
        u = (rel[:, 0] * direction[1] - rel[:, 1] * direction[0]) / denom
        valid = ~parallel & (t >= 0) & (u >= 0) & (u <= 1) & (t <= max_range)
        if not valid.any():
            return None
        return float(t[valid].min())
