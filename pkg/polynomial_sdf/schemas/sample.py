"""
Pydantic schemas for training observations and coordinate mapping.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SurfaceSample(BaseModel):
    """A surface position with its outward normal, normalized on construction."""
    model_config = ConfigDict(frozen=True)

    position: tuple[float, ...] = Field(min_length=1, max_length=3)
    normal: tuple[float, ...] = Field(min_length=1, max_length=3)

    @field_validator("position")
    @classmethod
    def position_must_be_finite(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not all(np.isfinite(v)):
            raise ValueError(f"position must be finite, got {v}")
        return v

    @field_validator("normal")
    @classmethod
    def normalize_normal(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        normal = np.asarray(v, dtype=float)
        length = float(np.linalg.norm(normal))
        if not np.isfinite(length) or length == 0.0:
            raise ValueError("normal must be non-zero and finite")
        return tuple(float(c) for c in normal / length)

    @model_validator(mode="after")
    def dimensions_must_match(self) -> "SurfaceSample":
        if len(self.normal) != len(self.position):
            raise ValueError(
                f"normal has {len(self.normal)} components, "
                f"position has {len(self.position)}"
            )
        return self

    @property
    def dim(self) -> int:
        return len(self.position)


def samples_to_arrays(samples: list[SurfaceSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack samples into (n, D) position and normal arrays."""
    if not samples:
        return np.zeros((0, 0)), np.zeros((0, 0))
    positions = np.array([s.position for s in samples], dtype=float)
    normals = np.array([s.normal for s in samples], dtype=float)
    return positions, normals


class PointCloud(BaseModel):
    """Samples read from one file, plus how many records were dropped."""
    samples: list[SurfaceSample] = Field(default_factory=list)
    dropped: int = Field(default=0, ge=0)

    def __len__(self) -> int:
        return len(self.samples)


class DomainTransform(BaseModel):
    """
    Isotropic map from raw file coordinates into the model domain.

        model = (raw - origin) * scale
        raw   = model / scale + origin

    One scale for all axes keeps distances convertible by a single factor.
    """
    model_config = ConfigDict(frozen=True)

    scale: float = Field(gt=0)
    origin: tuple[float, ...] = Field(min_length=1, max_length=3)

    @classmethod
    def identity(cls, dim: int) -> "DomainTransform":
        return cls(scale=1.0, origin=tuple(0.0 for _ in range(dim)))

    def to_model(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - np.asarray(self.origin)) * self.scale

    def to_raw(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) / self.scale + np.asarray(self.origin)

    def distance_to_raw(self, distance):
        """Convert a model-space distance to raw units."""
        return np.asarray(distance, dtype=float) / self.scale

    def distance_to_model(self, distance):
        return np.asarray(distance, dtype=float) * self.scale

    def apply(self, samples: list[SurfaceSample]) -> list[SurfaceSample]:
        """Map sample positions into the model domain; normals are unchanged."""
        if not samples:
            return []
        positions, _ = samples_to_arrays(samples)
        mapped = self.to_model(positions)
        return [
            SurfaceSample(position=tuple(p), normal=s.normal)
            for p, s in zip(mapped.tolist(), samples)
        ]
