"""Plane slicing: watertight mesh -> per-layer closed contours.

Cutting planes sit mid-layer (z = (k + 0.5) * layer_height) so exactly
horizontal facets never coincide with a plane. Each crossing triangle
contributes one segment, directed so that material lies to the left;
chaining the segments end-to-end therefore yields outer loops CCW and
holes CW without any containment tests.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..mesh import MeshError, TriangleMesh, edge_report
from .config import SliceConfig

CHAIN_TOLERANCE = 1e-4  # mm, spec'd gap limit when closing contours
_QUANT = 1e-6  # endpoint quantization grid for exact-match chaining


class SliceError(MeshError):
    pass


@dataclass
class LayerSlice:
    z: float
    contours: list = field(default_factory=list)       # closed (n,2) arrays
    perimeters: list = field(default_factory=list)     # closed (n,2) arrays
    infill: list = field(default_factory=list)         # ((x0,y0),(x1,y1)) pairs
    support: list = field(default_factory=list)        # ((x0,y0),(x1,y1)) pairs
    infill_boundary: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def _key(x: float, y: float):
    return (round(x / _QUANT), round(y / _QUANT))


def _chain_segments(segments: list, z: float, layer_index: int):
    """Join directed segments into closed loops by matching quantized
    endpoints. Unclosable chains raise with the residual gap size."""
    by_start: dict = {}
    for idx, (p0, p1) in enumerate(segments):
        by_start.setdefault(_key(*p0), []).append(idx)

    used = [False] * len(segments)
    contours = []
    for idx in range(len(segments)):
        if used[idx]:
            continue
        used[idx] = True
        start, cur = segments[idx]
        pts = [start, cur]
        closed = False
        for _ in range(len(segments) + 1):
            candidates = by_start.get(_key(*cur))
            nxt = None
            if candidates:
                for c in candidates:
                    if not used[c]:
                        nxt = c
                        break
            if nxt is None:
                gap = np.hypot(cur[0] - start[0], cur[1] - start[1])
                if gap <= CHAIN_TOLERANCE:
                    closed = True
                break
            used[nxt] = True
            cur = segments[nxt][1]
            pts.append(cur)
            if _key(*cur) == _key(*start):
                closed = True
                break
        if not closed:
            gap = np.hypot(cur[0] - start[0], cur[1] - start[1])
            raise SliceError(
                f"open contour on layer {layer_index} (z={z:.4f}): gap {gap:.6f} mm"
            )
        pts[-1] = pts[0]  # exact closure
        if len(pts) >= 4:
            contours.append(np.array(pts, dtype=float))
    return contours


def slice_mesh(mesh: TriangleMesh, config: SliceConfig) -> list:
    """Cut the mesh into LayerSlice contours.

    The mesh is lifted so its lowest point sits on the plate (z = 0); XY
    is left untouched. Needs a watertight mesh; a mesh shorter than one
    layer produces zero layers and a warning.
    """
    if mesh.is_empty():
        raise SliceError("cannot slice an empty mesh")
    report = edge_report(mesh)
    if not report.watertight:
        raise SliceError(
            f"mesh is not watertight ({report.boundary_edges} boundary, "
            f"{report.nonmanifold_edges} non-manifold edges); repair it first"
        )

    h = config.layer_height
    z0 = float(mesh.vertices[:, 2].min())
    verts = mesh.vertices - np.array([0.0, 0.0, z0])
    height = float(verts[:, 2].max())
    # tolerate float noise in heights that are an exact multiple of h
    count = int(np.floor(height / h + 1e-9))
    if count == 0:
        warnings.warn(
            f"mesh height {height:.4f} mm is below one layer ({h} mm); no layers"
        )
        return []

    tris = mesh.triangles
    corners = verts[tris]
    zmin = corners[:, :, 2].min(axis=1)
    zmax = corners[:, :, 2].max(axis=1)

    # bucket triangles by the layers they span
    first = np.ceil(zmin / h - 0.5).astype(np.int64)
    last = np.floor(zmax / h - 0.5).astype(np.int64)
    np.clip(first, 0, count - 1, out=first)
    np.clip(last, -1, count - 1, out=last)
    buckets: list = [[] for _ in range(count)]
    for t in range(len(tris)):
        for k in range(first[t], last[t] + 1):
            buckets[k].append(t)

    layers = []
    for k in range(count):
        zc = (k + 0.5) * h
        segments = []
        for t in buckets[k]:
            tri = corners[t]
            above = tri[:, 2] > zc
            if above.all() or (~above).all():
                continue
            # gather the two crossing points in winding order
            pts = []
            for i in range(3):
                j = (i + 1) % 3
                if above[i] != above[j]:
                    zi, zj = tri[i, 2], tri[j, 2]
                    f = (zc - zi) / (zj - zi)
                    pts.append(
                        (
                            tri[i, 0] + f * (tri[j, 0] - tri[i, 0]),
                            tri[i, 1] + f * (tri[j, 1] - tri[i, 1]),
                            above[j],  # True when the edge rises through the plane
                        )
                    )
            if len(pts) != 2:
                continue
            # direction so that material is on the left (outer loops CCW):
            # the segment runs from the falling crossing to the rising one
            (x0, y0, rising0), (x1, y1, _) = pts
            seg = ((x1, y1), (x0, y0)) if rising0 else ((x0, y0), (x1, y1))
            if abs(seg[0][0] - seg[1][0]) < 1e-12 and abs(seg[0][1] - seg[1][1]) < 1e-12:
                continue
            segments.append(seg)
        contours = _chain_segments(segments, zc, k)
        layers.append(LayerSlice(z=zc, contours=contours))
    return layers
