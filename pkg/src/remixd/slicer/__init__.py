"""FDM slicing: layer contours, perimeters, infill, supports, G-code."""

from .config import SliceConfig
from .gcode import GcodeError, ToolpathProgram, emit_gcode, extrusion_per_mm, parse_gcode
from .layers import CHAIN_TOLERANCE, LayerSlice, SliceError, slice_mesh
from .supports import generate_supports
from .toolpaths import generate_infill, generate_perimeters

__all__ = [
    "SliceConfig",
    "GcodeError",
    "ToolpathProgram",
    "emit_gcode",
    "extrusion_per_mm",
    "parse_gcode",
    "CHAIN_TOLERANCE",
    "LayerSlice",
    "SliceError",
    "slice_mesh",
    "generate_supports",
    "generate_infill",
    "generate_perimeters",
    "slice_to_gcode",
]


def slice_to_gcode(mesh, config: SliceConfig | None = None) -> ToolpathProgram:
    """Full pipeline: contours, perimeters, infill, supports, G-code."""
    config = config or SliceConfig()
    layers = slice_mesh(mesh, config)
    for index, layer in enumerate(layers):
        generate_perimeters(layer, config)
        generate_infill(layer, config, index)
    generate_supports(mesh, layers, config)
    return emit_gcode(layers, config)
