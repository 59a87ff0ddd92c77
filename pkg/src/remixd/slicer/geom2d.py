"""Small 2D helpers shared by the toolpath stages.

Closed polygons are (n, 2) float arrays with an explicit closing point
(first row repeated last). Outer contours wind CCW, holes CW; with that
convention the material always lies on the left of each directed edge,
so one erosion rule serves both.
"""
from __future__ import annotations

import math

import numpy as np


def polygon_area(poly: np.ndarray) -> float:
    """Signed area (CCW positive) of a closed polygon."""
    x, y = poly[:-1, 0], poly[:-1, 1]
    xn, yn = poly[1:, 0], poly[1:, 1]
    return 0.5 * float(np.sum(x * yn - xn * y))


def polygon_perimeter(poly: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(poly, axis=0), axis=1).sum())


def point_in_polygon(point, poly: np.ndarray) -> bool:
    """Even-odd rule crossing test."""
    x, y = point
    inside = False
    for (x0, y0), (x1, y1) in zip(poly[:-1], poly[1:]):
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


def _segment_intersection(p0, p1, q0, q1):
    """Proper intersection parameters (t, u) of two open segments, or
    None. Endpoint touches do not count."""
    rx, ry = p1[0] - p0[0], p1[1] - p0[1]
    sx, sy = q1[0] - q0[0], q1[1] - q0[1]
    denom = rx * sy - ry * sx
    if abs(denom) < 1e-18:
        return None
    qpx, qpy = q0[0] - p0[0], q0[1] - p0[1]
    t = (qpx * sy - qpy * sx) / denom
    u = (qpx * ry - qpy * rx) / denom
    eps = 1e-9
    if eps < t < 1 - eps and eps < u < 1 - eps:
        return t, u
    return None


def _is_convex(pts: list) -> bool:
    n = len(pts)
    pos = neg = False
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        x2, y2 = pts[(i + 2) % n]
        cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if cross > 1e-12:
            pos = True
        elif cross < -1e-12:
            neg = True
        if pos and neg:
            return False
    return True


def _find_self_intersection(pts: list):
    """First proper crossing of non-adjacent segments, with a bbox sweep
    to skip the quadratic scan on clean contours."""
    n = len(pts)
    arr = np.asarray(pts)
    nxt = np.roll(arr, -1, axis=0)
    lo = np.minimum(arr, nxt)
    hi = np.maximum(arr, nxt)
    for i in range(n):
        js = np.flatnonzero(
            (lo[i + 2:, 0] <= hi[i, 0])
            & (hi[i + 2:, 0] >= lo[i, 0])
            & (lo[i + 2:, 1] <= hi[i, 1])
            & (hi[i + 2:, 1] >= lo[i, 1])
        )
        if len(js) == 0:
            continue
        p0, p1 = pts[i], pts[(i + 1) % n]
        for off in js:
            j = i + 2 + int(off)
            if i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            res = _segment_intersection(p0, p1, pts[j], pts[(j + 1) % n])
            if res is not None:
                return (i, j, res[0])
    return None


def _prune_self_intersections(points: list, want_ccw: bool, max_rounds: int = 24) -> list:
    """Cut off fold-over loops created by mitered offsetting.

    When two non-adjacent segments cross, the smaller-area lobe between
    them is dropped. Adequate for the mildly concave contours this slicer
    targets; heavily concave input can lose detail here.
    """
    pts = list(points)
    if _is_convex(pts):
        return pts
    for _ in range(max_rounds):
        n = len(pts)
        if n < 4:
            return []
        hit = _find_self_intersection(pts)
        if hit is None:
            return pts
        i, j, t = hit
        px = (pts[i][0] + t * (pts[(i + 1) % n][0] - pts[i][0]),
              pts[i][1] + t * (pts[(i + 1) % n][1] - pts[i][1]))
        lobe_a = [px] + pts[i + 1: j + 1]
        lobe_b = [px] + pts[j + 1:] + pts[: i + 1]

        def loop_area(loop):
            s = 0.0
            for k in range(len(loop)):
                x0, y0 = loop[k]
                x1, y1 = loop[(k + 1) % len(loop)]
                s += x0 * y1 - x1 * y0
            return 0.5 * s

        keep = lobe_a if abs(loop_area(lobe_a)) >= abs(loop_area(lobe_b)) else lobe_b
        if (loop_area(keep) > 0) != want_ccw:
            other = lobe_b if keep is lobe_a else lobe_a
            if (loop_area(other) > 0) == want_ccw:
                keep = other
        pts = keep
    return pts


def _drop_collinear(pts: np.ndarray) -> np.ndarray:
    """Remove straight-continuation vertices; a mitered corner would
    otherwise leave them poking past the cut."""
    a = pts - np.roll(pts, 1, axis=0)
    b = np.roll(pts, -1, axis=0) - pts
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    scale = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    keep = ~((np.abs(cross) <= 1e-9 * scale) & (dot > 0))
    return pts[keep] if int(keep.sum()) >= 3 else pts


def offset_contour(poly: np.ndarray, inset: float, min_area: float = 1e-4):
    """Erode the material region by `inset` mm across one contour.

    Every edge is displaced toward the material side (the left of its
    direction), corners rejoin by miter intersection with a displaced-
    point fallback, and fold-overs are pruned. Returns a closed polygon
    or None when the contour vanishes.
    """
    pts = _drop_collinear(poly[:-1])
    n = len(pts)
    if n < 3:
        return None
    was_ccw = polygon_area(poly) > 0

    d = np.roll(pts, -1, axis=0) - pts
    lengths = np.linalg.norm(d, axis=1)
    ok = lengths > 1e-12
    if not ok.all():
        pts = pts[ok]
        n = len(pts)
        if n < 3:
            return None
        d = np.roll(pts, -1, axis=0) - pts
        lengths = np.linalg.norm(d, axis=1)
    left = np.stack([-d[:, 1], d[:, 0]], axis=1) / lengths[:, None]
    a = pts + inset * left                   # displaced edge starts
    b = np.roll(pts, -1, axis=0) + inset * left

    out = []
    for i in range(n):
        h = (i - 1) % n
        # intersect displaced edge h with displaced edge i
        r = b[h] - a[h]
        s = b[i] - a[i]
        denom = r[0] * s[1] - r[1] * s[0]
        if abs(denom) < 1e-12:
            out.append(((a[i][0] + b[h][0]) / 2.0, (a[i][1] + b[h][1]) / 2.0))
            continue
        qp = a[i] - a[h]
        t = (qp[0] * s[1] - qp[1] * s[0]) / denom
        # clamp runaway miters at sharp spikes
        t = min(max(t, -8.0), 8.0)
        p = a[h] + t * r
        out.append((float(p[0]), float(p[1])))

    out = _prune_self_intersections(out, want_ccw=was_ccw)
    if len(out) < 3:
        return None
    closed = np.array(out + [out[0]], dtype=float)
    area = polygon_area(closed)
    if abs(area) < min_area or (area > 0) != was_ccw:
        return None
    # a contour narrower than twice the inset collapses into a phantom
    # inverted loop: true erosion points sit >= inset from the boundary
    dists = _dist_points_to_polygon(closed[:-1], pts)
    if np.median(dists) < 0.9 * abs(inset):
        return None
    return closed


def _dist_points_to_polygon(points: np.ndarray, poly_pts: np.ndarray) -> np.ndarray:
    """Distance from each point to the closed polyline over poly_pts."""
    a = poly_pts
    b = np.roll(poly_pts, -1, axis=0)
    ab = b - a
    length2 = np.einsum("ij,ij->i", ab, ab)
    length2[length2 == 0] = 1.0
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pek,ek->pe", rel, ab) / length2[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - closest, axis=2)
    return d.min(axis=1)


def clip_line_to_region(origin, direction, contours) -> list:
    """Intersect the infinite line origin + t*direction with a region
    given by even-odd contours; returns inside intervals as (t0, t1)."""
    ox, oy = origin
    dx, dy = direction
    crossings: list = []
    for poly in contours:
        p0 = poly[:-1]
        p1 = poly[1:]
        # signed side of each endpoint relative to the line
        s0 = (p0[:, 0] - ox) * dy - (p0[:, 1] - oy) * dx
        s1 = (p1[:, 0] - ox) * dy - (p1[:, 1] - oy) * dx
        mask = (s0 <= 0) != (s1 <= 0)
        if not mask.any():
            continue
        f = s0[mask] / (s0[mask] - s1[mask])
        px = p0[mask, 0] + f * (p1[mask, 0] - p0[mask, 0])
        py = p0[mask, 1] + f * (p1[mask, 1] - p0[mask, 1])
        crossings.extend(((px - ox) * dx + (py - oy) * dy).tolist())
    if len(crossings) < 2:
        return []
    crossings.sort()
    spans = []
    for k in range(0, len(crossings) - 1, 2):
        if crossings[k + 1] - crossings[k] > 1e-9:
            spans.append((crossings[k], crossings[k + 1]))
    return spans


def subtract_intervals(spans: list, cuts: list) -> list:
    """Remove `cuts` intervals from `spans` (both sorted or not)."""
    if not cuts:
        return spans
    cuts = sorted(cuts)
    out = []
    for a, b in spans:
        cur = a
        for c0, c1 in cuts:
            if c1 <= cur or c0 >= b:
                continue
            if c0 > cur:
                out.append((cur, c0))
            cur = max(cur, c1)
            if cur >= b:
                break
        if cur < b:
            out.append((cur, b))
    return out


def line_capsule_interval(origin, direction, p0, p1, radius):
    """Parameter interval where the unit-direction line passes within
    `radius` of segment p0-p1, or None."""
    ox, oy = origin
    dx, dy = direction
    # work in the line frame: t along, s across
    def to_frame(p):
        px, py = p[0] - ox, p[1] - oy
        return (px * dx + py * dy, px * -dy + py * dx)

    t0, s0 = to_frame(p0)
    t1, s1 = to_frame(p1)
    lo, hi = None, None

    # endpoints: circles
    for tc, sc in ((t0, s0), (t1, s1)):
        if abs(sc) < radius:
            half = math.sqrt(radius * radius - sc * sc)
            a, b = tc - half, tc + half
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
    # body: where the segment crosses the strip |s| < radius
    ds = s1 - s0
    candidates = []
    if abs(ds) > 1e-18:
        for target in (-radius, radius):
            u = (target - s0) / ds
            if 0.0 <= u <= 1.0:
                candidates.append(t0 + u * (t1 - t0))
    for u, s in ((0.0, s0), (1.0, s1)):
        if abs(s) <= radius:
            candidates.append(t0 + u * (t1 - t0))
    if candidates:
        # widen along the line by the radius: conservative (never smaller
        # than the true capsule section), exact for perpendicular walls
        a, b = min(candidates) - radius, max(candidates) + radius
        lo = a if lo is None else min(lo, a)
        hi = b if hi is None else max(hi, b)
    if lo is None:
        return None
    return (lo, hi)


def polygon_capsule_cuts(origin, direction, poly: np.ndarray, radius: float) -> list:
    """Intervals where the line passes within `radius` of any edge of the
    closed polygon (vectorized union of per-edge capsule sections)."""
    ox, oy = origin
    dx, dy = direction
    p0 = poly[:-1]
    p1 = poly[1:]
    t0 = (p0[:, 0] - ox) * dx + (p0[:, 1] - oy) * dy
    s0 = (p0[:, 0] - ox) * -dy + (p0[:, 1] - oy) * dx
    t1 = (p1[:, 0] - ox) * dx + (p1[:, 1] - oy) * dy
    s1 = (p1[:, 0] - ox) * -dy + (p1[:, 1] - oy) * dx

    n = len(p0)
    los = np.full((n, 4), np.nan)
    his = np.full((n, 4), np.nan)

    # endpoint circles
    for col, (tc, sc) in enumerate(((t0, s0), (t1, s1))):
        inside = np.abs(sc) < radius
        half = np.sqrt(np.maximum(radius * radius - sc * sc, 0.0))
        los[inside, col] = (tc - half)[inside]
        his[inside, col] = (tc + half)[inside]

    # body: segment portion inside the strip |s| <= radius, widened by radius
    body_lo = np.full(n, np.nan)
    body_hi = np.full(n, np.nan)
    ds = s1 - s0
    dt = t1 - t0
    for target in (-radius, radius):
        ok = np.abs(ds) > 1e-18
        u = np.where(ok, (target - s0) / np.where(ok, ds, 1.0), np.nan)
        valid = ok & (u >= 0.0) & (u <= 1.0)
        cand = np.where(valid, t0 + u * dt, np.nan)
        body_lo = np.fmin(body_lo, cand)
        body_hi = np.fmax(body_hi, cand)
    for tc, sc in ((t0, s0), (t1, s1)):
        cand = np.where(np.abs(sc) <= radius, tc, np.nan)
        body_lo = np.fmin(body_lo, cand)
        body_hi = np.fmax(body_hi, cand)
    los[:, 2] = body_lo - radius
    his[:, 2] = body_hi + radius

    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN rows
        lo = np.nanmin(los, axis=1)
        hi = np.nanmax(his, axis=1)
    good = ~np.isnan(lo)
    return list(zip(lo[good].tolist(), hi[good].tolist()))


def triangle_line_interval(origin, direction, tri2d):
    """Parameter interval where the line crosses a 2D triangle, or None."""
    poly = np.array([tri2d[0], tri2d[1], tri2d[2], tri2d[0]], dtype=float)
    spans = clip_line_to_region(origin, direction, [poly])
    if not spans:
        return None
    return (spans[0][0], spans[-1][1])
