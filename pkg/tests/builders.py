"""
Builders shared by the test modules.
"""

import numpy as np

from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.sample import SurfaceSample

SPHERE_CENTER = (0.5, 0.5, 0.5)
SPHERE_RADIUS = 0.3


def sphere_samples(n: int, center=SPHERE_CENTER, radius: float = SPHERE_RADIUS,
                   seed: int = 0) -> list[SurfaceSample]:
    """Analytic samples on a sphere (or circle, for a 2-D center)."""
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(n, len(center)))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    positions = np.asarray(center) + radius * directions
    return [
        SurfaceSample(position=tuple(p), normal=tuple(g))
        for p, g in zip(positions.tolist(), directions.tolist())
    ]


def sphere_sdf(points, center=SPHERE_CENTER, radius: float = SPHERE_RADIUS):
    """Exact distances and gradients of the sphere."""
    offset = np.atleast_2d(points) - np.asarray(center)
    norm = np.linalg.norm(offset, axis=1)
    return norm - radius, offset / norm[:, None]


def random_points(config: BasisConfig, n: int, seed: int = 0) -> np.ndarray:
    """Uniform points inside the domain of config."""
    rng = np.random.default_rng(seed)
    lower, upper = np.array(config.lower), np.array(config.upper)
    return lower + rng.random((n, config.dim)) * (upper - lower)


def random_model_weights(config: BasisConfig, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=config.n_weights)


def write_xyz(path, samples: list[SurfaceSample]) -> None:
    lines = [" ".join(repr(v) for v in (*s.position, *s.normal)) for s in samples]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
