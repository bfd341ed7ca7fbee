"""
Numeric containers and enumerations.
"""

from polynomial_sdf.models.enums import (
    Command,
    PointFormat,
    MeshFormat,
    GridFormat,
    ShapeKind,
)
from polynomial_sdf.models.field_model import FieldModel, QueryResult, SystemRows
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.models.grid import ScalarGrid, ContourSet
from polynomial_sdf.models.shapes import HiddenShape, Circle, Capsule, Polygon

__all__ = [
    "Command",
    "PointFormat",
    "MeshFormat",
    "GridFormat",
    "ShapeKind",
    "FieldModel",
    "QueryResult",
    "SystemRows",
    "TriangleMesh",
    "ScalarGrid",
    "ContourSet",
    "HiddenShape",
    "Circle",
    "Capsule",
    "Polygon",
]
