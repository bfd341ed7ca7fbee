"""Numerical services, one module per concern."""

from polynomial_sdf.services.oracle_service import MeshOracle
from polynomial_sdf.services.solver_service import OnlineFieldEstimator

__all__ = ["MeshOracle", "OnlineFieldEstimator"]
