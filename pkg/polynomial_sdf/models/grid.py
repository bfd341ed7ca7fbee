"""
Sampled fields and extracted level sets.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ScalarGrid:
    """
    Field values on a regular grid, values[i, j, k] at
    origin + (i, j, k) * spacing. Axis order matches the model axes.
    """
    values: np.ndarray
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    gradients: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.values.ndim != len(self.origin) or self.values.ndim != len(self.spacing):
            raise ValueError(
                f"grid is {self.values.ndim}-D but origin/spacing have "
                f"{len(self.origin)}/{len(self.spacing)} entries"
            )
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if any(n < 2 for n in self.values.shape):
            raise ValueError(f"need at least 2 nodes per axis, got {self.values.shape}")
        if self.gradients is not None and self.gradients.shape != (*self.values.shape, self.dim):
            raise ValueError("gradient grid does not match values")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_size(self) -> float:
        return max(self.spacing)

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.values.shape[axis]
        return self.origin[axis] + np.arange(n) * self.spacing[axis]

    def nodes(self) -> np.ndarray:
        """All node coordinates, (prod(resolution), dim), row-major."""
        mesh = np.meshgrid(*(self.axis_nodes(a) for a in range(self.dim)), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class ContourSet:
    """Polylines of a 2-D level set; closed loops repeat their first point."""
    polylines: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.polylines)

    @property
    def is_empty(self) -> bool:
        return not self.polylines

    @property
    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros((0, 2))
        return np.vstack(self.polylines)
