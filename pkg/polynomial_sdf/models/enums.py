"""
Shared enumerations.
"""

import enum


class Command(str, enum.Enum):
    """Top-level commands of the command-line tool."""
    FIT = "fit"
    UPDATE = "update"
    QUERY = "query"
    RECONSTRUCT = "reconstruct"
    EVAL = "eval"
    SIMULATE = "simulate"


class PointFormat(str, enum.Enum):
    """Point cloud file formats."""
    XYZ = "xyz"
    PLY = "ply"


class MeshFormat(str, enum.Enum):
    """Triangle mesh file formats."""
    OBJ = "obj"
    PLY = "ply"


class GridFormat(str, enum.Enum):
    """Scalar grid export layouts."""
    RAW = "raw"
    VTK = "vtk"


class ShapeKind(str, enum.Enum):
    """Analytic 2D shapes available to the surveying simulator."""
    CIRCLE = "circle"
    CAPSULE = "capsule"
    POLYGON = "polygon"

