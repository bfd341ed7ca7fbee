"""
Pydantic schema for one command-line run.

The run configuration is flat so it maps one-to-one onto the
`key=value` config file and onto the command-line flags. Defaults
live here; the nested value objects used by the services are built
from it on demand.
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator

from polynomial_sdf.models.enums import ShapeKind
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.regularizer import PriorSpec, RegularizerSpec
from polynomial_sdf.schemas.survey import (
    ControlGains,
    EpisodeConfig,
    SensorSpec,
    ShapeSpec,
)


def _split_floats(v):
    if isinstance(v, str):
        parts = v.replace(",", " ").split()
        return tuple(float(p) for p in parts) if parts else None
    return v


class RunConfig(BaseModel):
    """Every tunable of fit, update, query, reconstruct, eval and simulate."""
    model_config = ConfigDict(
        extra="forbid", frozen=True, populate_by_name=True, protected_namespaces=()
    )

    # basis and domain
    degree: int = Field(default=3, ge=2)
    segments: int = Field(default=4, ge=1)
    dim: int = Field(default=3, ge=2, le=3)
    margin: float = Field(default=0.25, ge=0, lt=0.5)
    normalize: bool = True
    # raw-unit bounding box lo..., hi... mapped onto the unit cube instead of the data bounds
    domain: tuple[float, ...] | None = None

    # cost and noise
    lambda_d: float = Field(default=1.0, ge=0)
    lambda_g: float = Field(default=1.0, ge=0)
    lambda_t: float = Field(default=0.1, ge=0)
    sigma2: float = Field(default=1e-4, gt=0)
    tension_points: int = Field(default=4, ge=0)
    ray_extent: float | None = Field(default=None, gt=0)

    # prior
    prior_center: tuple[float, ...] | None = None
    prior_radius: float = Field(default=0.25, gt=0)
    prior_strength: float = Field(default=1e2, gt=0)

    # training
    stream: bool = False
    batch_size: int = Field(default=1, ge=1)
    seed: int = 0

    # reconstruction
    grid_res: int = Field(default=64, ge=2)
    iso: float = 0.0

    # paths
    input_path: Path | None = Field(default=None, alias="in")
    output_path: Path | None = Field(default=None, alias="out")
    model_path: Path | None = Field(default=None, alias="model")
    mesh_path: Path | None = Field(default=None, alias="mesh")
    points_path: Path | None = Field(default=None, alias="points")
    format: str | None = None

    # evaluation
    eval_points: int = Field(default=2000, ge=0)
    shell_points: int = Field(default=2000, ge=0)

    # simulation
    steps: int = Field(default=500, ge=0)
    shape: ShapeKind = ShapeKind.CIRCLE
    shape_center: tuple[float, float] = (0.5, 0.5)
    shape_radius: float = Field(default=0.2, gt=0)
    rays: int = Field(default=8, ge=1)
    sigma_meas: float = Field(default=0.001, ge=0)
    target_distance: float = Field(default=0.1, gt=0)
    step_size: float = Field(default=0.01, gt=0)
    snapshot_interval: int = Field(default=0, ge=0)

    log_level: str | None = None

    @field_validator("prior_center", "shape_center", "domain", mode="before")
    @classmethod
    def parse_vector(cls, v):
        return _split_floats(v)

    @field_validator("domain")
    @classmethod
    def domain_is_a_box(cls, v):
        if v is None:
            return v
        if len(v) not in (4, 6):
            raise ValueError("domain needs lo and hi per axis, e.g. 0,0,0,1,1,1")
        half = len(v) // 2
        if any(lo >= hi for lo, hi in zip(v[:half], v[half:])):
            raise ValueError("domain lower corner must be below the upper corner")
        return v

    def domain_corners(self) -> tuple[tuple[float, ...], tuple[float, ...]] | None:
        if self.domain is None:
            return None
        half = len(self.domain) // 2
        return self.domain[:half], self.domain[half:]

    @classmethod
    def keys(cls) -> set[str]:
        """Field names and their aliases, as accepted in config files."""
        names = set(cls.model_fields)
        names |= {f.alias for f in cls.model_fields.values() if f.alias}
        return names

    def basis(self, dim: int | None = None) -> BasisConfig:
        return BasisConfig.unit(self.degree, self.segments, dim or self.dim)

    def regularizer(self) -> RegularizerSpec:
        return RegularizerSpec(
            lambda_d=self.lambda_d,
            lambda_g=self.lambda_g,
            lambda_t=self.lambda_t,
            sigma2=self.sigma2,
            tension_points=self.tension_points,
            ray_extent=self.ray_extent,
        )

    def prior(self) -> PriorSpec:
        return PriorSpec(center=self.prior_center, radius=self.prior_radius,
                         strength=self.prior_strength)

    def shape_spec(self) -> ShapeSpec:
        return ShapeSpec(kind=self.shape, center=self.shape_center,
                         radius=self.shape_radius)

    def episode(self) -> EpisodeConfig:
        defaults = EpisodeConfig()
        return EpisodeConfig(
            steps=self.steps,
            target_distance=self.target_distance,
            step_size=self.step_size,
            gains=ControlGains(),
            sensor=SensorSpec(
                rays=self.rays,
                sigma_meas=self.sigma_meas,
                mount_angle=defaults.sensor.mount_angle,
            ),
            snapshot_interval=self.snapshot_interval,
            seed=self.seed,
        )
