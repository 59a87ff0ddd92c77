"""Independent oracles for the geometry tests.

Everything here is deliberately redundant with the production code and
implemented by a different route: 2D polygon clipping and areas instead
of the 3D boolean engine, closed-form prism volumes instead of mesh
volumes. Tests compare production output against these.
"""
from __future__ import annotations

import math

import numpy as np


def clip_polygon_halfplane(points, normal, offset):
    """Sutherland-Hodgman clip of a convex polygon (list of (x, y)) to
    the halfplane {p : p . normal <= offset}."""
    nx, ny = normal
    out = []
    n = len(points)
    for i in range(n):
        cur = points[i]
        nxt = points[(i + 1) % n]
        c_in = cur[0] * nx + cur[1] * ny <= offset
        n_in = nxt[0] * nx + nxt[1] * ny <= offset
        if c_in:
            out.append(cur)
        if c_in != n_in:
            d0 = cur[0] * nx + cur[1] * ny - offset
            d1 = nxt[0] * nx + nxt[1] * ny - offset
            t = d0 / (d0 - d1)
            out.append(
                (cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1]))
            )
    return out


def clip_polygon_rect(points, xmin, xmax, ymin, ymax):
    poly = points
    for normal, offset in (
        ((1, 0), xmax),
        ((-1, 0), -xmin),
        ((0, 1), ymax),
        ((0, -1), -ymin),
    ):
        poly = clip_polygon_halfplane(poly, normal, offset)
        if not poly:
            return []
    return poly


def polygon_area(points) -> float:
    s = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def regular_ngon(radius: float, segments: int):
    return [
        (
            radius * math.cos(2 * math.pi * i / segments),
            radius * math.sin(2 * math.pi * i / segments),
        )
        for i in range(segments)
    ]


def ngon_area(radius: float, segments: int) -> float:
    return 0.5 * segments * radius * radius * math.sin(2 * math.pi / segments)


def cylinder_volume_tessellated(radius: float, height: float, segments: int) -> float:
    return ngon_area(radius, segments) * height


def circular_segment_area(radius: float, chord_distance: float) -> float:
    """Area of the minor circular segment cut off at distance
    chord_distance from the center (smooth circle)."""
    theta = 2.0 * math.acos(chord_distance / radius)
    return radius * radius * (theta - math.sin(theta)) / 2.0


def box_overlap_volume(amin, amax, bmin, bmax) -> float:
    lo = np.maximum(np.asarray(amin, float), np.asarray(bmin, float))
    hi = np.minimum(np.asarray(amax, float), np.asarray(bmax, float))
    size = np.clip(hi - lo, 0.0, None)
    return float(size.prod())


def brute_force_volume(mesh, samples: int = 200_000, seed: int = 0) -> float:
    """Monte-Carlo volume by point-in-solid ray parity. Slow and noisy;
    used only as a sanity cross-check on small meshes."""
    rng = np.random.default_rng(seed)
    verts = mesh.vertices
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    pts = rng.uniform(lo, hi, (samples, 3))
    corners = mesh.corners()
    v0 = corners[:, 0]
    e1 = corners[:, 1] - v0
    e2 = corners[:, 2] - v0
    # ray +z parity per sample against every triangle, chunked
    inside = np.zeros(samples, dtype=bool)
    n = np.cross(e1, e2)
    for start in range(0, samples, 2000):
        p = pts[start: start + 2000]
        # solve p + t*(0,0,1) crossing triangle plane
        denom = n[:, 2][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -(
                (p[:, None, :] - v0[None, :, :]) * n[None, :, :]
            ).sum(axis=2) / denom
        hitz = t > 0
        hit_pts_xy = p[:, None, :2]
        a = v0[None, :, :2] - hit_pts_xy
        b = (v0 + e1)[None, :, :2] - hit_pts_xy
        c = (v0 + e2)[None, :, :2] - hit_pts_xy
        s1 = a[:, :, 0] * b[:, :, 1] - a[:, :, 1] * b[:, :, 0]
        s2 = b[:, :, 0] * c[:, :, 1] - b[:, :, 1] * c[:, :, 0]
        s3 = c[:, :, 0] * a[:, :, 1] - c[:, :, 1] * a[:, :, 0]
        in_tri = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
        crossings = (hitz & in_tri & (np.abs(denom) > 1e-12)).sum(axis=1)
        inside[start: start + 2000] = crossings % 2 == 1
    box = float(np.prod(hi - lo))
    return box * inside.mean()
