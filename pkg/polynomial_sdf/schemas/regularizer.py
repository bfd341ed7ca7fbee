"""
Pydantic schemas for the cost weights and the spherical prior.

Defaults are engineering choices tuned on the analytic sphere
reconstruction; none of them are fixed by the method itself.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from polynomial_sdf.schemas.basis import BasisConfig

# Fraction of the domain diagonal covered by the normal ray on each side
DEFAULT_RAY_EXTENT_FRACTION = 0.35


class RegularizerSpec(BaseModel):
    """Cost weights, measurement noise and tension control-point policy."""
    model_config = ConfigDict(frozen=True)

    lambda_d: float = Field(default=1.0, ge=0)
    lambda_g: float = Field(default=1.0, ge=0)
    lambda_t: float = Field(default=0.1, ge=0)
    sigma2: float = Field(default=1e-4, gt=0)
    tension_points: int = Field(default=4, ge=0)
    ray_extent: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def data_must_inform_system(self) -> "RegularizerSpec":
        if self.lambda_d <= 0 and self.lambda_g <= 0:
            raise ValueError("lambda_d or lambda_g must be positive")
        return self

    def resolved_ray_extent(self, config: BasisConfig) -> float:
        """Ray extent in world units; defaults to a fraction of the diagonal."""
        if self.ray_extent is not None:
            return self.ray_extent
        return DEFAULT_RAY_EXTENT_FRACTION * config.diagonal

    @property
    def uses_tension(self) -> bool:
        return self.lambda_t > 0 and self.tension_points > 0


class PriorSpec(BaseModel):
    """Sphere encoded into the initial weights, and the scale of P0."""
    model_config = ConfigDict(frozen=True)

    center: tuple[float, ...] | None = None
    radius: float = Field(default=0.25, gt=0)
    strength: float = Field(default=1e2, gt=0)

    def resolved_center(self, config: BasisConfig) -> tuple[float, ...]:
        """Prior center; the domain center when not set."""
        if self.center is not None:
            if len(self.center) != config.dim:
                raise ValueError(
                    f"prior center has {len(self.center)} components, "
                    f"dim is {config.dim}"
                )
            return self.center
        return tuple((lo + hi) / 2 for lo, hi in config.domain)
