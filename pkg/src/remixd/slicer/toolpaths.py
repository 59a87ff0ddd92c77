"""Perimeter and infill generation on sliced layers."""
from __future__ import annotations

import math

import numpy as np

from .config import SliceConfig
from .geom2d import clip_line_to_region, offset_contour
from .layers import LayerSlice


def generate_perimeters(layer: LayerSlice, config: SliceConfig) -> LayerSlice:
    """Inset each contour perimeter_count times at extrusion_width
    spacing, outermost half a width in so the deposited plastic ends at
    the model surface. Also records the infill boundary one further
    half-width inside the innermost perimeter."""
    w = config.extrusion_width
    layer.perimeters = []
    layer.infill_boundary = []
    for contour in layer.contours:
        innermost = None
        produced = 0
        for j in range(config.perimeter_count):
            inset = (j + 0.5) * w
            path = offset_contour(contour, inset, min_area=w * w)
            if path is None:
                break
            layer.perimeters.append(path)
            innermost = path
            produced += 1
        if produced < config.perimeter_count:
            layer.diagnostics.append(
                f"contour too small for {config.perimeter_count} perimeter(s); "
                f"produced {produced}"
            )
        if produced:
            boundary = offset_contour(
                contour, (config.perimeter_count + 0.5) * w, min_area=w * w
            )
            if boundary is not None:
                layer.infill_boundary.append(boundary)
    return layer


def _infill_lines(contours, spacing: float, angle_deg: float, phase: float = 0.5):
    """Rectilinear segments covering the even-odd region of `contours`
    with parallel lines at `spacing`, tilted by angle_deg."""
    if not contours:
        return []
    ang = math.radians(angle_deg)
    u = (math.cos(ang), math.sin(ang))          # along the lines
    v = (-u[1], u[0])                           # across the lines
    pts = np.vstack([c[:-1] for c in contours])
    proj = pts @ np.array(v)
    lo, hi = float(proj.min()), float(proj.max())
    first = math.floor(lo / spacing)
    count = int(math.ceil((hi - lo) / spacing)) + 2
    segments = []
    for i in range(count):
        c = (first + i + phase) * spacing
        if c <= lo or c >= hi:
            continue
        origin = (v[0] * c, v[1] * c)
        for t0, t1 in clip_line_to_region(origin, u, contours):
            segments.append(
                (
                    (origin[0] + t0 * u[0], origin[1] + t0 * u[1]),
                    (origin[0] + t1 * u[0], origin[1] + t1 * u[1]),
                )
            )
    return segments


def generate_infill(layer: LayerSlice, config: SliceConfig, layer_index: int) -> LayerSlice:
    """Rectilinear infill clipped to the innermost perimeter region.

    Line spacing is extrusion_width / density; direction alternates
    45/135 degrees with layer parity. Density 0 emits nothing, density 1
    is solid."""
    layer.infill = []
    if config.infill_density <= 0.0 or not layer.infill_boundary:
        return layer
    spacing = config.extrusion_width / config.infill_density
    angle = 45.0 if layer_index % 2 == 0 else 135.0
    layer.infill = _infill_lines(layer.infill_boundary, spacing, angle)
    return layer
