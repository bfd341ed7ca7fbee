"""
Pydantic schemas for the surveying simulator.
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from polynomial_sdf.models.enums import ShapeKind


class AgentState(BaseModel):
    """Position, unit heading and step counter of the surveying agent."""
    model_config = ConfigDict(frozen=True)

    position: tuple[float, float]
    heading: tuple[float, float] = (1.0, 0.0)
    step: int = Field(default=0, ge=0)

    @field_validator("heading")
    @classmethod
    def normalize_heading(cls, v: tuple[float, float]) -> tuple[float, float]:
        length = math.hypot(*v)
        if length == 0 or not math.isfinite(length):
            raise ValueError("heading must be non-zero and finite")
        return (v[0] / length, v[1] / length)

    @property
    def heading_angle(self) -> float:
        return math.atan2(self.heading[1], self.heading[0])


class ControlGains(BaseModel):
    """Tangential speed gain k_t and radial correction gain k_n."""
    model_config = ConfigDict(frozen=True)

    k_t: float = Field(default=1.0, ge=0)
    k_n: float = Field(default=5.0, ge=0)


class SensorSpec(BaseModel):
    """
    Simulated range sensor.

    Rays are spread uniformly over fov, centered on heading + mount_angle.
    """
    model_config = ConfigDict(frozen=True)

    rays: int = Field(default=8, ge=1)
    fov: float = Field(default=math.pi / 3, gt=0, le=2 * math.pi)
    mount_angle: float = 0.0
    max_range: float = Field(default=0.5, gt=0)
    sigma_meas: float = Field(default=0.001, ge=0)

    def ray_angles(self, heading_angle: float) -> np.ndarray:
        if self.rays == 1:
            offsets = np.zeros(1)
        else:
            offsets = np.linspace(-self.fov / 2, self.fov / 2, self.rays)
        return heading_angle + self.mount_angle + offsets


class ShapeSpec(BaseModel):
    """Which hidden shape to build, in model-domain units."""
    model_config = ConfigDict(frozen=True)

    kind: ShapeKind = ShapeKind.CIRCLE
    center: tuple[float, float] = (0.5, 0.5)
    radius: float = Field(default=0.2, gt=0)
    sides: int = Field(default=5, ge=3)
    length: float = Field(default=0.3, gt=0)


class EpisodeConfig(BaseModel):
    """Loop parameters of one surveying episode."""
    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=500, ge=0)
    target_distance: float = Field(default=0.1, gt=0)
    step_size: float = Field(default=0.01, gt=0)
    start: tuple[float, float] = (0.9, 0.5)
    gains: ControlGains = ControlGains()
    sensor: SensorSpec = SensorSpec(mount_angle=math.pi / 2)
    eval_interval: int = Field(default=50, ge=1)
    snapshot_interval: int = Field(default=0, ge=0)
    n_uniform: int = Field(default=1000, ge=0)
    n_shell: int = Field(default=500, ge=1)
    seed: int = 0
