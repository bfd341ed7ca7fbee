"""
Pydantic schema for the piecewise polynomial basis.

The configuration is frozen (and therefore hashable) so the
per-axis evaluators built from it can be cached.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BasisConfig(BaseModel):
    """
    Degree, segment count, input dimension and domain of the basis.

    The domain is one (lo, hi) interval per axis, in world units.
    Knots are uniformly spaced on every axis.
    """
    model_config = ConfigDict(frozen=True)

    degree: int = Field(default=3, ge=2)
    segments: int = Field(default=4, ge=1)
    dim: int = Field(default=3, ge=1, le=3)
    domain: tuple[tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))

    @field_validator("domain")
    @classmethod
    def bounds_must_be_ordered(
        cls, v: tuple[tuple[float, float], ...]
    ) -> tuple[tuple[float, float], ...]:
        for axis, (lo, hi) in enumerate(v):
            if not lo < hi:
                raise ValueError(
                    f"domain axis {axis} must satisfy lo < hi, got [{lo}, {hi}]"
                )
        return v

    @model_validator(mode="after")
    def domain_matches_dim(self) -> "BasisConfig":
        if len(self.domain) != self.dim:
            raise ValueError(
                f"domain has {len(self.domain)} axes but dim is {self.dim}"
            )
        return self

    @classmethod
    def unit(cls, degree: int = 3, segments: int = 4, dim: int = 3) -> "BasisConfig":
        """Basis over the unit cube [0, 1]^dim."""
        return cls(
            degree=degree,
            segments=segments,
            dim=dim,
            domain=tuple((0.0, 1.0) for _ in range(dim)),
        )

    @property
    def free_per_axis(self) -> int:
        """Free parameters per axis, M = (K - 1) S + 2."""
        return (self.degree - 1) * self.segments + 2

    @property
    def n_weights(self) -> int:
        return self.free_per_axis ** self.dim

    @property
    def lower(self) -> tuple[float, ...]:
        return tuple(lo for lo, _ in self.domain)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(hi for _, hi in self.domain)

    @property
    def diagonal(self) -> float:
        """Length of the domain diagonal."""
        return sum((hi - lo) ** 2 for lo, hi in self.domain) ** 0.5

    @property
    def size(self) -> float:
        """Largest axis extent, used to scale tolerances."""
        return max(hi - lo for lo, hi in self.domain)
