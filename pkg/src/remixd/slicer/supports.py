"""Support columns under overhanging faces.

A face needs support when it tilts from the vertical by strictly more
than the overhang threshold while pointing downward. Its XY footprint is
carried down through every layer below the face, minus where the model
itself stands (with an XY clearance ring), and filled with sparse
axis-aligned lines so the columns stack vertically.
"""
from __future__ import annotations

import math

import numpy as np

from ..mesh import TriangleMesh
from .config import SliceConfig
from .geom2d import (
    clip_line_to_region,
    polygon_capsule_cuts,
    subtract_intervals,
    triangle_line_interval,
)


def _overhang_faces(mesh: TriangleMesh, threshold_deg: float):
    """Triangles needing support: downward-facing with tilt-from-vertical
    strictly above the threshold. Faces resting on the plate (z == 0 after
    the slicer's lift) get filtered by the per-layer z test instead."""
    corners = mesh.corners()
    n = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    norms = np.linalg.norm(n, axis=1)
    ok = norms > 1e-12
    n = np.where(ok[:, None], n / np.where(ok, norms, 1.0)[:, None], 0.0)
    down = -n[:, 2]  # cos(angle to straight down)
    down = np.clip(down, -1.0, 1.0)
    # tilt from vertical = 90deg - angle(normal, down)
    tilt = 90.0 - np.degrees(np.arccos(down))
    selected = ok & (n[:, 2] < 0.0) & (tilt > threshold_deg)
    return corners[selected]


def generate_supports(mesh: TriangleMesh, layers: list, config: SliceConfig) -> list:
    """Fill each layer's support field. The mesh must be the same one the
    layers were sliced from (support footprints are computed in the
    lifted frame with min z at 0)."""
    if not config.support_enabled or not layers:
        return layers
    lifted = mesh.vertices - np.array([0.0, 0.0, float(mesh.vertices[:, 2].min())])
    shifted = TriangleMesh(lifted, mesh.triangles.copy())
    faces = _overhang_faces(shifted, config.overhang_threshold_deg)
    if len(faces) == 0:
        return layers

    spacing = config.extrusion_width / config.support_density
    tri2d = faces[:, :, :2]
    face_zmin = faces[:, :, 2].min(axis=1)

    xs = tri2d[:, :, 0]
    ys = tri2d[:, :, 1]
    y_lo, y_hi = float(ys.min()), float(ys.max())
    x_lo, x_hi = float(xs.min()), float(xs.max())
    first = math.floor(y_lo / spacing)
    rows = int(math.ceil((y_hi - y_lo) / spacing)) + 2

    # support lines run along +x at fixed y so columns stack across layers
    direction = (1.0, 0.0)
    line_origins = []
    for i in range(rows):
        y = (first + i + 0.5) * spacing
        if y_lo - spacing < y < y_hi + spacing:
            line_origins.append((x_lo - 1.0, y))

    clearance = config.support_clearance + config.extrusion_width / 2.0

    # footprint intervals are layer-independent: compute once per line
    per_line: list = []
    for origin in line_origins:
        entries = []
        for t in range(len(tri2d)):
            iv = triangle_line_interval(origin, direction, tri2d[t])
            if iv is not None:
                entries.append((float(face_zmin[t]), iv))
        per_line.append(entries)

    for layer in layers:
        if not (face_zmin > layer.z).any():
            continue
        for origin, entries in zip(line_origins, per_line):
            spans = sorted(iv for zmin, iv in entries if zmin > layer.z)
            if not spans:
                continue
            merged = [spans[0]]
            for a, b in spans[1:]:
                if a <= merged[-1][1] + 1e-9:
                    merged[-1] = (merged[-1][0], max(merged[-1][1], b))
                else:
                    merged.append((a, b))
            # keep clear of the model: cut where the line crosses the
            # model footprint or comes within the clearance of its walls
            cuts = []
            for poly in layer.contours:
                cuts.extend(clip_line_to_region(origin, direction, [poly]))
                cuts.extend(polygon_capsule_cuts(origin, direction, poly, clearance))
            for t0, t1 in subtract_intervals(merged, cuts):
                if t1 - t0 < config.extrusion_width:
                    continue
                layer.support.append(
                    (
                        (origin[0] + t0, origin[1]),
                        (origin[0] + t1, origin[1]),
                    )
                )
    return layers
