"""
The learned signed distance field and the numeric records around it.

A FieldModel is immutable: solver operations return a new model
instead of mutating one, so a reader holding a reference never
observes a half-applied update.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from polynomial_sdf.exceptions import NumericalError
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.sample import DomainTransform


@dataclass(frozen=True)
class QueryResult:
    """Distance (world units) and gradient at one point."""
    distance: float
    gradient: np.ndarray

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


@dataclass(frozen=True)
class SystemRows:
    """Stacked least-squares rows A and targets s."""
    A: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if self.A.ndim != 2 or self.s.shape != (self.A.shape[0],):
            raise ValueError(
                f"rows/targets mismatch: A {self.A.shape}, s {self.s.shape}"
            )

    def __len__(self) -> int:
        return self.A.shape[0]


def _frozen_copy(array: np.ndarray) -> np.ndarray:
    """Read-only float array; already read-only inputs are shared, not copied."""
    if array.dtype == np.float64 and not array.flags.writeable:
        return array
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class FieldModel:
    """
    Superposition weights w and the matrix P advanced by the
    recursive update, plus the basis they are defined on.

    P is the matrix of the gain recursion P <- P - K A P, i.e. the
    weight covariance of the Bayesian reading. The prior sets P0 = rho I.

    transform maps raw input coordinates into the model domain; it is
    configuration, not learned state.
    """
    config: BasisConfig
    w: np.ndarray
    P: np.ndarray
    transform: DomainTransform | None = field(default=None)

    def __post_init__(self):
        n = self.config.n_weights
        if self.w.shape != (n,):
            raise ValueError(f"weights must have shape ({n},), got {self.w.shape}")
        if self.P.shape != (n, n):
            raise ValueError(f"P must have shape ({n}, {n}), got {self.P.shape}")
        object.__setattr__(self, "w", _frozen_copy(self.w))
        object.__setattr__(self, "P", _frozen_copy(self.P))

    @classmethod
    def constant(cls, config: BasisConfig, value: float,
                 strength: float = 1e2) -> "FieldModel":
        """Model whose field equals value everywhere."""
        n = config.n_weights
        return cls(config=config, w=np.full(n, float(value)),
                   P=strength * np.eye(n))

    @property
    def n_weights(self) -> int:
        return self.config.n_weights

    def state_size(self) -> int:
        """Number of stored scalars besides the configuration."""
        return self.w.size + self.P.size

    def check_positive_definite(self) -> None:
        """Raise NumericalError unless P is symmetric positive definite."""
        if not np.array_equal(self.P, self.P.T):
            raise NumericalError("P is not symmetric")
        try:
            linalg.cholesky(self.P, lower=True)
        except linalg.LinAlgError as e:
            raise NumericalError(f"P is not positive definite: {e}") from e

    def with_transform(self, transform: DomainTransform | None) -> "FieldModel":
        return FieldModel(config=self.config, w=self.w, P=self.P, transform=transform)
