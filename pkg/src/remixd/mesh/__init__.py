"""Triangle-mesh core: types, STL I/O, primitives, validation, repair."""

from .core import (
    Aabb,
    EdgeReport,
    MeshError,
    Transform,
    TriangleMesh,
    apply_transform,
    compute_bounds,
    edge_report,
    is_watertight,
    signed_volume,
    triangle_areas,
)
from .primitives import (
    Cube,
    Cylinder,
    PrimitiveKind,
    Pyramid,
    Sphere,
    make_primitive,
    primitive_from_dict,
    primitive_to_dict,
)
from .repair import RepairResult, fix_t_junctions, repair_mesh, weld_indexed
from .stl import DEGENERATE_AREA, WELD_TOLERANCE, StlError, load_stl, write_stl

__all__ = [
    "Aabb",
    "EdgeReport",
    "MeshError",
    "Transform",
    "TriangleMesh",
    "apply_transform",
    "compute_bounds",
    "edge_report",
    "is_watertight",
    "signed_volume",
    "triangle_areas",
    "Cube",
    "Cylinder",
    "PrimitiveKind",
    "Pyramid",
    "Sphere",
    "make_primitive",
    "primitive_from_dict",
    "primitive_to_dict",
    "RepairResult",
    "fix_t_junctions",
    "repair_mesh",
    "weld_indexed",
    "DEGENERATE_AREA",
    "WELD_TOLERANCE",
    "StlError",
    "load_stl",
    "write_stl",
]
