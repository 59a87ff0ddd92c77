"""Boolean set operations on closed triangle meshes via BSP clipping.

Union, difference, and intersection are built from two primitives on BSP
trees, clip and invert, in the classic arrangement:

    union:        a.clip(b); b.clip(a); b.invert(); b.clip(a); b.invert()
    difference:   ~(~a | b)
    intersection: ~(~a | ~b)

Clipping samples the seam between the two surfaces at different points on
either side, so the raw output has hairline T-junctions; the built-in
repair welds, splits boundary edges at seam vertices, and re-welds to
return a watertight mesh. Component winding produced by the clipping is
kept as-is: a cavity shell is intentionally wound toward the cavity.

Everything is deterministic: tree construction order, splitting order, and
output assembly depend only on the input meshes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mesh import (
    MeshError,
    RepairResult,
    TriangleMesh,
    edge_report,
    fix_t_junctions,
    is_watertight,
    repair_mesh,
)
from .mesh.repair import (
    close_small_boundary_loops,
    fill_boundary_loops,
    remove_duplicate_triangles,
    resolve_overused_edges,
    weld_boundary_vertices,
)

__all__ = ["CsgOp", "CsgError", "CsgStats", "CsgResult", "csg", "subtract_fixture", "MAX_INPUT_TRIANGLES"]

# plane-classification tolerance: points closer than this are coplanar
EPSILON = 1e-5

# BSP splitting is superlinear; heavier inputs should be decimated first
MAX_INPUT_TRIANGLES = 100_000

_COPLANAR, _FRONT, _BACK, _SPANNING = 0, 1, 2, 3


class CsgOp(enum.Enum):
    UNION = "union"
    DIFFERENCE = "difference"
    INTERSECTION = "intersection"


class CsgError(MeshError):
    """Boolean operation rejected (bad input, not a failed result)."""


@dataclass(frozen=True)
class CsgStats:
    input_triangles: tuple
    output_triangles: int
    split_polygons: int
    watertight: bool
    repair: RepairResult


@dataclass(frozen=True)
class CsgResult:
    mesh: TriangleMesh
    stats: CsgStats


class _Poly:
    __slots__ = ("verts", "plane")

    def __init__(self, verts, plane=None):
        self.verts = verts
        if plane is None:
            (ax, ay, az), (bx, by, bz), (cx, cy, cz) = verts[0], verts[1], verts[2]
            ux, uy, uz = bx - ax, by - ay, bz - az
            vx, vy, vz = cx - ax, cy - ay, cz - az
            nx, ny, nz = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
            length = (nx * nx + ny * ny + nz * nz) ** 0.5
            if length == 0.0:
                raise CsgError("degenerate polygon")
            nx, ny, nz = nx / length, ny / length, nz / length
            plane = (nx, ny, nz, nx * ax + ny * ay + nz * az)
        self.plane = plane

    def flipped(self):
        n = self.plane
        return _Poly(self.verts[::-1], (-n[0], -n[1], -n[2], -n[3]))


class _Node:
    __slots__ = ("plane", "front", "back", "polygons")

    def __init__(self):
        self.plane = None
        self.front = None
        self.back = None
        self.polygons = []


def _split_polygon(plane, poly, coplanar_front, coplanar_back, front, back, counter):
    nx, ny, nz, w = plane
    verts = poly.verts
    n_verts = len(verts)

    poly_type = 0
    types = []
    for (vx, vy, vz) in verts:
        t = nx * vx + ny * vy + nz * vz - w
        if t < -EPSILON:
            loc = _BACK
        elif t > EPSILON:
            loc = _FRONT
        else:
            loc = _COPLANAR
        poly_type |= loc
        types.append(loc)

    if poly_type == _COPLANAR:
        pn = poly.plane
        # same-facing coplanar polygons count as front (>= 0 rule)
        if nx * pn[0] + ny * pn[1] + nz * pn[2] >= 0:
            coplanar_front.append(poly)
        else:
            coplanar_back.append(poly)
    elif poly_type == _FRONT:
        front.append(poly)
    elif poly_type == _BACK:
        back.append(poly)
    else:
        counter[0] += 1
        f: list = []
        b: list = []
        for i in range(n_verts):
            j = i + 1
            if j == n_verts:
                j = 0
            ti, tj = types[i], types[j]
            vi, vj = verts[i], verts[j]
            if ti != _BACK:
                f.append(vi)
            if ti != _FRONT:
                b.append(vi)
            if (ti | tj) == _SPANNING:
                denom = nx * (vj[0] - vi[0]) + ny * (vj[1] - vi[1]) + nz * (vj[2] - vi[2])
                t = (w - (nx * vi[0] + ny * vi[1] + nz * vi[2])) / denom
                v = (
                    vi[0] + t * (vj[0] - vi[0]),
                    vi[1] + t * (vj[1] - vi[1]),
                    vi[2] + t * (vj[2] - vi[2]),
                )
                f.append(v)
                b.append(v)
        if len(f) >= 3:
            front.append(_Poly(f, poly.plane))
        if len(b) >= 3:
            back.append(_Poly(b, poly.plane))


def _build(node, polygons, counter):
    stack = [(node, polygons)]
    while stack:
        nd, polys = stack.pop()
        if not polys:
            continue
        if nd.plane is None:
            nd.plane = polys[0].plane
        plane = nd.plane
        front: list = []
        back: list = []
        for poly in polys:
            _split_polygon(plane, poly, nd.polygons, nd.polygons, front, back, counter)
        if front:
            if nd.front is None:
                nd.front = _Node()
            stack.append((nd.front, front))
        if back:
            if nd.back is None:
                nd.back = _Node()
            stack.append((nd.back, back))


def _invert(node):
    stack = [node]
    while stack:
        nd = stack.pop()
        nd.polygons = [p.flipped() for p in nd.polygons]
        if nd.plane is not None:
            n = nd.plane
            nd.plane = (-n[0], -n[1], -n[2], -n[3])
        nd.front, nd.back = nd.back, nd.front
        if nd.front is not None:
            stack.append(nd.front)
        if nd.back is not None:
            stack.append(nd.back)


def _clip_polygons(node, polygons, counter):
    """Polygons from `polygons` that lie outside the solid of `node`."""
    result: list = []
    stack = [(node, polygons)]
    while stack:
        nd, polys = stack.pop()
        if nd.plane is None:
            result.extend(polys)
            continue
        front: list = []
        back: list = []
        for poly in polys:
            _split_polygon(nd.plane, poly, front, back, front, back, counter)
        if nd.front is not None:
            stack.append((nd.front, front))
        else:
            result.extend(front)
        if nd.back is not None:
            stack.append((nd.back, back))
        # polygons reaching a missing back child are inside: dropped
    return result


def _clip_to(a, b, counter):
    stack = [a]
    while stack:
        nd = stack.pop()
        nd.polygons = _clip_polygons(b, nd.polygons, counter)
        if nd.front is not None:
            stack.append(nd.front)
        if nd.back is not None:
            stack.append(nd.back)


def _all_polygons(node):
    out: list = []
    stack = [node]
    while stack:
        nd = stack.pop()
        out.extend(nd.polygons)
        if nd.back is not None:
            stack.append(nd.back)
        if nd.front is not None:
            stack.append(nd.front)
    return out


def _mesh_to_polys(mesh: TriangleMesh):
    verts = [tuple(map(float, v)) for v in mesh.vertices]
    return [_Poly([verts[a], verts[b], verts[c]]) for a, b, c in mesh.triangles]


def _polys_to_mesh(polygons) -> TriangleMesh:
    index: dict = {}
    coords: list = []
    tris: list = []
    for poly in polygons:
        ids = []
        for v in poly.verts:
            i = index.get(v)
            if i is None:
                i = len(coords)
                index[v] = i
                coords.append(v)
            ids.append(i)
        for k in range(1, len(ids) - 1):
            a, b, c = ids[0], ids[k], ids[k + 1]
            if a != b and b != c and a != c:
                tris.append((a, b, c))
    if not tris:
        return TriangleMesh.empty()
    return TriangleMesh(np.asarray(coords, float), np.asarray(tris, np.int32))


def _boolean_polys(op: CsgOp, a_polys, b_polys, counter):
    a = _Node()
    _build(a, a_polys, counter)
    b = _Node()
    _build(b, b_polys, counter)

    if op is CsgOp.UNION:
        _clip_to(a, b, counter)
        _clip_to(b, a, counter)
        _invert(b)
        _clip_to(b, a, counter)
        _invert(b)
        _build(a, _all_polygons(b), counter)
        return _all_polygons(a)
    if op is CsgOp.DIFFERENCE:
        _invert(a)
        _clip_to(a, b, counter)
        _clip_to(b, a, counter)
        _invert(b)
        _clip_to(b, a, counter)
        _invert(b)
        _build(a, _all_polygons(b), counter)
        _invert(a)
        return _all_polygons(a)
    if op is CsgOp.INTERSECTION:
        _invert(a)
        _clip_to(b, a, counter)
        _invert(b)
        _clip_to(a, b, counter)
        _clip_to(b, a, counter)
        _build(a, _all_polygons(b), counter)
        _invert(a)
        return _all_polygons(a)
    raise CsgError(f"unknown operation {op!r}")


# escalating seam-mend schedule: (t-junction tolerance, boundary-weld
# tolerance, fan-fill leftover loops). Coplanar-classification slack
# compounds across successive splits, so seam defects range from a few
# EPSILON up to roughly 10 EPSILON across.
_MEND_SCHEDULE = (
    (5 * EPSILON, None, False),
    (5 * EPSILON, 2 * EPSILON, False),
    (15 * EPSILON, 10 * EPSILON, True),
    (15 * EPSILON, 10 * EPSILON, True),
)


def _mend_seams(mesh: TriangleMesh, repair: RepairResult):
    """Close T-junctions, micro-holes, slits, and sliver overlaps that BSP
    clipping leaves along the seam between the two operand surfaces."""
    for tfix_tol, weld_tol, fill in _MEND_SCHEDULE:
        if mesh.is_empty() or is_watertight(mesh):
            break
        mended = remove_duplicate_triangles(mesh)
        mended = resolve_overused_edges(mended)
        mended = fix_t_junctions(mended, tolerance=tfix_tol)
        mended = close_small_boundary_loops(mended)
        if weld_tol is not None:
            mended = weld_boundary_vertices(mended, tolerance=weld_tol)
        if fill:
            mended = fill_boundary_loops(mended)
        repair = repair_mesh(mended, orient="keep")
        mesh = repair.mesh
    return mesh, repair


def _check_operand(name: str, mesh: TriangleMesh) -> None:
    if mesh.triangle_count > MAX_INPUT_TRIANGLES:
        raise CsgError(
            f"{name} has {mesh.triangle_count} triangles, above the "
            f"{MAX_INPUT_TRIANGLES} boolean-input limit; simplify it first"
        )
    if mesh.is_empty():
        return
    report = edge_report(mesh)
    if not report.watertight:
        raise CsgError(
            f"{name} is not watertight: {report.boundary_edges} boundary, "
            f"{report.nonmanifold_edges} non-manifold, "
            f"{report.misoriented_edges} misoriented edge(s)"
        )


def csg(op: CsgOp, a: TriangleMesh, b: TriangleMesh) -> CsgResult:
    """Regularized boolean of two watertight, outward-oriented meshes in a
    common frame. Empty results are legal values, not errors."""
    _check_operand("first operand", a)
    _check_operand("second operand", b)

    counter = [0]
    if a.is_empty() and b.is_empty():
        polys = []
    elif a.is_empty():
        polys = [] if op is not CsgOp.UNION else _mesh_to_polys(b)
    elif b.is_empty():
        polys = [] if op is CsgOp.INTERSECTION else _mesh_to_polys(a)
    else:
        polys = _boolean_polys(op, _mesh_to_polys(a), _mesh_to_polys(b), counter)

    raw = _polys_to_mesh(polys)
    if raw.is_empty():
        repair = RepairResult(raw)
        mesh = raw
    else:
        repair = repair_mesh(raw, orient="keep")
        mesh, repair = _mend_seams(repair.mesh, repair)

    stats = CsgStats(
        input_triangles=(a.triangle_count, b.triangle_count),
        output_triangles=mesh.triangle_count,
        split_polygons=counter[0],
        # an empty result encloses nothing and leaks nothing
        watertight=mesh.is_empty() or is_watertight(mesh),
        repair=repair,
    )
    return CsgResult(mesh=mesh, stats=stats)


def subtract_fixture(part: TriangleMesh, obstacle: TriangleMesh) -> CsgResult:
    """Cut the environment geometry out of a part, e.g. notch a mount
    around the shelf it clamps. Same contract as difference."""
    return csg(CsgOp.DIFFERENCE, part, obstacle)
