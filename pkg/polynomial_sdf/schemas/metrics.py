"""
Pydantic schema for evaluation results.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Ground-truth |s| below which a point counts as near the surface
NEAR_THRESHOLD = 0.05

REPORT_KEYS = (
    "count", "count_near", "count_far",
    "mae_mean", "mae_std",
    "mae_near_mean", "mae_near_std",
    "mae_far_mean", "mae_far_std",
    "gcd_mean", "gcd_std",
    "gcd_near_mean", "gcd_near_std",
    "gcd_excluded",
)


class MetricsReport(BaseModel):
    """
    Distance and gradient errors of a model against ground truth.

    MAE is |estimate - truth|; GCD is 1 - cos(angle between gradients).
    Statistics of an empty bucket are None.
    """
    model_config = ConfigDict(frozen=True)

    count: int = Field(ge=0)
    count_near: int = Field(ge=0)
    count_far: int = Field(ge=0)
    mae_mean: float | None = None
    mae_std: float | None = None
    mae_near_mean: float | None = None
    mae_near_std: float | None = None
    mae_far_mean: float | None = None
    mae_far_std: float | None = None
    gcd_mean: float | None = None
    gcd_std: float | None = None
    gcd_near_mean: float | None = None
    gcd_near_std: float | None = None
    gcd_excluded: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def buckets_partition_points(self) -> "MetricsReport":
        if self.count_near + self.count_far != self.count:
            raise ValueError(
                f"near ({self.count_near}) + far ({self.count_far}) "
                f"!= count ({self.count})"
            )
        return self

    def to_text(self) -> str:
        """Flat `key value` report, one line per key in a fixed order."""
        lines = []
        for key in REPORT_KEYS:
            value = getattr(self, key)
            lines.append(f"{key} {'nan' if value is None else repr(value)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"
