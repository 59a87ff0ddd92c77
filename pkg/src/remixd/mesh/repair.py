"""Mesh repair: vertex welding, degenerate culling, winding correction.

Winding repair propagates orientation across shared edges within each
connected component, then settles each component's global sign. Loaded
files want components flipped outward (positive signed volume); boolean
results must instead keep their produced orientation, because an inner
cavity shell is legitimately wound toward the cavity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TriangleMesh, triangle_areas
from .stl import DEGENERATE_AREA, WELD_TOLERANCE

__all__ = [
    "RepairResult",
    "repair_mesh",
    "weld_indexed",
    "fix_t_junctions",
    "close_small_boundary_loops",
    "fill_boundary_loops",
    "remove_duplicate_triangles",
    "resolve_overused_edges",
    "weld_boundary_vertices",
]


@dataclass(frozen=True)
class RepairResult:
    mesh: TriangleMesh
    vertices_welded: int = 0
    degenerates_removed: int = 0
    triangles_flipped: int = 0
    components: int = 0
    components_reversed: int = 0
    nonmanifold_edges: int = 0
    boundary_edges: int = 0
    notes: tuple = field(default_factory=tuple)

    @property
    def clean(self) -> bool:
        return (
            self.vertices_welded == 0
            and self.degenerates_removed == 0
            and self.triangles_flipped == 0
            and self.components_reversed == 0
        )


def _weld_map(vertices: np.ndarray, tolerance: float) -> np.ndarray:
    """For each vertex, the index of the first vertex in the same
    tolerance-grid cell."""
    keys = np.round(vertices / tolerance).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    return first[inverse.reshape(-1)]


def weld_indexed(
    vertices: np.ndarray, triangles: np.ndarray, tolerance: float = WELD_TOLERANCE
):
    """Merge coincident vertices and drop unused ones, preserving order.

    Returns (vertices, triangles, merged_count). Inputs that need no work
    come back unchanged.
    """
    if len(vertices) == 0:
        return vertices, triangles, 0
    canonical = _weld_map(vertices, tolerance)
    merged = int((canonical != np.arange(len(vertices))).sum())
    tris = canonical[triangles] if merged else triangles

    used = np.zeros(len(vertices), dtype=bool)
    if len(tris):
        used[tris.reshape(-1)] = True
    if merged == 0 and used.all():
        return vertices, triangles, 0
    remap = np.cumsum(used) - 1
    return vertices[used], remap[tris].astype(np.int32), merged


def _drop_degenerates(vertices: np.ndarray, triangles: np.ndarray):
    if len(triangles) == 0:
        return triangles, 0
    repeated = (
        (triangles[:, 0] == triangles[:, 1])
        | (triangles[:, 1] == triangles[:, 2])
        | (triangles[:, 0] == triangles[:, 2])
    )
    keep = ~repeated
    if keep.any():
        c = vertices[triangles[keep]]
        area = 0.5 * np.linalg.norm(
            np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]), axis=1
        )
        tiny = area < DEGENERATE_AREA
        if tiny.any():
            full = keep.copy()
            full[keep] = ~tiny
            keep = full
    dropped = int(len(triangles) - keep.sum())
    return (triangles[keep] if dropped else triangles), dropped


def _edge_adjacency(triangles: np.ndarray, n_vertices: int):
    """Manifold-edge adjacency between triangles.

    Returns CSR arrays (offsets, neighbor_tri, same_direction) plus the
    count of non-manifold and boundary edges. same_direction is True when
    both triangles traverse the shared edge the same way, i.e. their
    windings disagree.
    """
    m = len(triangles)
    t = triangles.astype(np.int64)
    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    owner = np.tile(np.arange(m), 3)
    key = directed.min(axis=1) * n_vertices + directed.max(axis=1)
    forward = directed[:, 0] < directed[:, 1]

    order = np.argsort(key, kind="stable")
    k = key[order]
    start = np.flatnonzero(np.concatenate([[True], k[1:] != k[:-1]]))
    counts = np.diff(np.append(start, len(k)))

    boundary = int((counts == 1).sum())
    nonmanifold = int((counts > 2).sum())

    pair_start = start[counts == 2]
    a = order[pair_start]
    b = order[pair_start + 1]
    ta, tb = owner[a], owner[b]
    same = forward[a] == forward[b]

    src = np.concatenate([ta, tb])
    dst = np.concatenate([tb, ta])
    s2 = np.concatenate([same, same])
    by_src = np.argsort(src, kind="stable")
    nbr = dst[by_src]
    sd = s2[by_src]
    deg = np.bincount(src, minlength=m)
    offsets = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(deg, out=offsets[1:])
    return offsets, nbr, sd, nonmanifold, boundary


def _propagate_orientation(triangles: np.ndarray, n_vertices: int):
    """Per-component winding consistency by adjacency propagation.

    Returns (flip mask, component ids, component count, nonmanifold edges,
    boundary edges, conflict count).
    """
    m = len(triangles)
    offsets, nbr, same_dir, nonmanifold, boundary = _edge_adjacency(
        triangles, n_vertices
    )
    flip = np.full(m, -1, dtype=np.int8)
    comp = np.full(m, -1, dtype=np.int64)
    conflicts = 0
    n_comp = 0
    seed = 0
    while seed < m:
        if flip[seed] != -1:
            seed += 1
            continue
        flip[seed] = 0
        comp[seed] = n_comp
        frontier = np.array([seed], dtype=np.int64)
        while len(frontier):
            lengths = offsets[frontier + 1] - offsets[frontier]
            total = int(lengths.sum())
            if total == 0:
                break
            # ragged gather of every frontier triangle's neighbor span
            idx = (
                np.arange(total)
                - np.repeat(np.cumsum(lengths) - lengths, lengths)
                + np.repeat(offsets[frontier], lengths)
            )
            neighbors = nbr[idx]
            proposed = np.repeat(flip[frontier], lengths)
            proposed = np.where(same_dir[idx], 1 - proposed, proposed).astype(np.int8)

            seen = flip[neighbors] != -1
            conflicts += int((flip[neighbors][seen] != proposed[seen]).sum())
            fresh = neighbors[~seen]
            if not len(fresh):
                break
            # first writer wins inside a frontier step
            uniq, firsts = np.unique(fresh, return_index=True)
            flip[uniq] = proposed[~seen][firsts]
            comp[uniq] = n_comp
            frontier = uniq
        n_comp += 1
    return flip.astype(bool), comp, n_comp, nonmanifold, boundary, conflicts


def repair_mesh(
    mesh: TriangleMesh,
    orient: str = "outward",
    tolerance: float = WELD_TOLERANCE,
) -> RepairResult:
    """Weld vertices, drop degenerate triangles, and make winding
    consistent.

    orient="outward" flips each connected component to positive signed
    volume (the correction applied to imported files); orient="keep"
    preserves each component's majority winding (used on boolean output,
    where cavity shells are intentionally wound inward).
    """
    if mesh.is_empty():
        return RepairResult(mesh)
    vertices, triangles, merged = weld_indexed(
        mesh.vertices, mesh.triangles, tolerance
    )
    triangles, dropped = _drop_degenerates(vertices, triangles)
    if len(triangles) == 0:
        return RepairResult(
            TriangleMesh.empty(), vertices_welded=merged, degenerates_removed=dropped
        )
    # degenerate removal can strand vertices
    vertices, triangles, _ = weld_indexed(vertices, triangles, tolerance)

    flip, comp, n_comp, nonmanifold, boundary, conflicts = _propagate_orientation(
        triangles, len(vertices)
    )

    reversed_comps = 0
    if orient == "outward":
        oriented = np.where(flip[:, None], triangles[:, [0, 2, 1]], triangles)
        c = vertices[oriented]
        tri_vol = np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])) / 6.0
        comp_vol = np.zeros(n_comp)
        np.add.at(comp_vol, comp, tri_vol)
        negative = comp_vol < 0
        reversed_comps = int(negative.sum())
        flip = flip ^ negative[comp]
    elif orient == "keep":
        flipped_per_comp = np.zeros(n_comp, dtype=np.int64)
        sizes = np.zeros(n_comp, dtype=np.int64)
        np.add.at(flipped_per_comp, comp, flip.astype(np.int64))
        np.add.at(sizes, comp, 1)
        majority_flipped = flipped_per_comp * 2 > sizes
        reversed_comps = 0  # keep mode never reverses a majority
        flip = flip ^ majority_flipped[comp]
    else:
        raise ValueError(f"unknown orient mode {orient!r}")

    n_flipped = int(flip.sum())
    if n_flipped:
        triangles = np.where(flip[:, None], triangles[:, [0, 2, 1]], triangles)

    notes = []
    if conflicts:
        notes.append(f"{conflicts} edge orientation conflict(s) left unresolved")
    if nonmanifold:
        notes.append(f"{nonmanifold} non-manifold edge(s)")
    return RepairResult(
        mesh=TriangleMesh(vertices, triangles),
        vertices_welded=merged,
        degenerates_removed=dropped,
        triangles_flipped=n_flipped,
        components=n_comp,
        components_reversed=reversed_comps,
        nonmanifold_edges=nonmanifold,
        boundary_edges=boundary,
        notes=tuple(notes),
    )


def _boundary_directed_edges(triangles: np.ndarray, n_vertices: int):
    t = triangles.astype(np.int64)
    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    owner = np.tile(np.arange(len(triangles)), 3)
    slot = np.repeat(np.arange(3), len(triangles))
    key = directed.min(axis=1) * n_vertices + directed.max(axis=1)
    uniq, counts = np.unique(key, return_counts=True)
    mask = np.isin(key, uniq[counts == 1])
    return directed[mask], owner[mask], slot[mask]


def remove_duplicate_triangles(mesh: TriangleMesh) -> TriangleMesh:
    """Collapse triangles sharing one vertex set.

    Opposite-winding pairs are a zero-thickness internal wall and cancel;
    same-winding duplicates keep a single copy. No-op on clean meshes.
    """
    tris = mesh.triangles
    if len(tris) == 0:
        return mesh
    key = np.sort(tris, axis=1)
    _, inverse, counts = np.unique(
        key, axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    if (counts == 1).all():
        return mesh
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    parity = ((a > b).astype(int) + (a > c) + (b > c)) % 2

    keep = np.ones(len(tris), dtype=bool)
    groups: dict = {}
    for i, g in enumerate(inverse):
        if counts[g] > 1:
            groups.setdefault(int(g), []).append(i)
    for members in groups.values():
        pos = [i for i in members if parity[i] == 0]
        neg = [i for i in members if parity[i] == 1]
        cancel = min(len(pos), len(neg))
        drop = pos[:cancel] + neg[:cancel]
        survivors = pos[cancel:] + neg[cancel:]
        drop += survivors[1:]  # same-winding duplicates keep the first
        for i in drop:
            keep[i] = False
    if keep.all():
        return mesh
    # leave vertex compaction to the caller's next repair pass
    return TriangleMesh(mesh.vertices, tris[keep])


def _boundary_fill_loops(mesh: TriangleMesh, max_edges: int):
    """Closed boundary loops in fill orientation (opposite to the existing
    boundary-edge uses). Loops touching a vertex shared by several holes
    are skipped."""
    edges, _, _ = _boundary_directed_edges(mesh.triangles, mesh.vertex_count)
    if len(edges) == 0:
        return []
    succ: dict = {}
    ambiguous = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if b in succ:
            ambiguous.add(b)
        succ[b] = a
    loops = []
    visited = set()
    for start in sorted(succ):
        if start in visited or start in ambiguous:
            continue
        loop = [start]
        cur = succ[start]
        ok = True
        while cur != start:
            if cur in visited or cur in ambiguous or cur not in succ or len(loop) > max_edges:
                ok = False
                break
            loop.append(cur)
            cur = succ[cur]
        if not ok or len(loop) < 3 or len(set(loop)) != len(loop):
            continue
        visited.update(loop)
        loops.append(loop)
    return loops


def _loop_perimeter(verts: np.ndarray, loop) -> float:
    return sum(
        float(np.linalg.norm(verts[loop[(i + 1) % len(loop)]] - verts[loop[i]]))
        for i in range(len(loop))
    )


def close_small_boundary_loops(
    mesh: TriangleMesh, max_edges: int = 16, max_perimeter: float = 1e-3
) -> TriangleMesh:
    """Contract tiny boundary loops (micro-holes left by seam welding).

    Each qualifying loop's vertices are snapped to their centroid, so a
    subsequent weld merges them and the surrounding triangles stitch
    closed. A fill triangle would be below the degenerate-area cutoff and
    get culled again, which is why contraction is used instead.
    """
    if mesh.is_empty():
        return mesh
    verts = None
    for loop in _boundary_fill_loops(mesh, max_edges):
        if _loop_perimeter(mesh.vertices, loop) > max_perimeter:
            continue
        if verts is None:
            verts = mesh.vertices.copy()
        verts[loop] = verts[loop].mean(axis=0)
    if verts is None:
        return mesh
    return TriangleMesh(verts, mesh.triangles.copy())


def fill_boundary_loops(
    mesh: TriangleMesh, max_edges: int = 64, max_perimeter: float = 2.0
) -> TriangleMesh:
    """Fan-triangulate leftover boundary loops (slit-like seam holes too
    long to contract). Fill winding follows the loop, so it matches the
    surrounding surface."""
    if mesh.is_empty():
        return mesh
    new_tris = []
    for loop in _boundary_fill_loops(mesh, max_edges):
        if _loop_perimeter(mesh.vertices, loop) > max_perimeter:
            continue
        for k in range(1, len(loop) - 1):
            new_tris.append((loop[0], loop[k], loop[k + 1]))
    if not new_tris:
        return mesh
    tris = np.vstack([mesh.triangles, np.array(new_tris, dtype=np.int32)])
    return TriangleMesh(mesh.vertices, tris)


def weld_boundary_vertices(mesh: TriangleMesh, tolerance: float) -> TriangleMesh:
    """Cluster-and-merge vertices on boundary edges at a coarser tolerance.

    Interior vertices never move, so this cannot damage a closed surface;
    it exists to zip up seam gaps slightly wider than the global weld
    grid. Clusters are found by union-find over neighboring grid cells,
    so pairs straddling a cell border still merge.
    """
    if mesh.is_empty():
        return mesh
    edges, _, _ = _boundary_directed_edges(mesh.triangles, mesh.vertex_count)
    if len(edges) == 0:
        return mesh
    bv = np.unique(edges.reshape(-1))
    pos = mesh.vertices[bv]
    cells = np.floor(pos / tolerance).astype(np.int64)

    parent = list(range(len(bv)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    buckets: dict = {}
    for i, c in enumerate(map(tuple, cells)):
        buckets.setdefault(c, []).append(i)
    tol2 = tolerance * tolerance
    half_neighborhood = [
        (dx, dy, dz)
        for dx in (0, 1)
        for dy in (-1, 0, 1)
        for dz in (-1, 0, 1)
        if (dx, dy, dz) > (0, 0, 0)
    ]
    for (cx, cy, cz), members in buckets.items():
        for i_pos, i in enumerate(members):
            for j in members[i_pos + 1:]:
                d = pos[i] - pos[j]
                if float(d @ d) <= tol2:
                    union(i, j)
        for dx, dy, dz in half_neighborhood:
            other = buckets.get((cx + dx, cy + dy, cz + dz))
            if other is None:
                continue
            for i in members:
                for j in other:
                    d = pos[i] - pos[j]
                    if float(d @ d) <= tol2:
                        union(i, j)

    roots = np.array([find(i) for i in range(len(bv))])
    if (roots == np.arange(len(bv))).all():
        return mesh
    verts = mesh.vertices.copy()
    for root in np.unique(roots):
        members = bv[roots == root]
        if len(members) > 1:
            verts[members] = verts[members].mean(axis=0)
    return TriangleMesh(verts, mesh.triangles.copy())


def resolve_overused_edges(mesh: TriangleMesh) -> TriangleMesh:
    """At edges used more than twice, keep the largest forward and largest
    backward triangle and drop the remainder (sliver overlaps along seams).
    Edges whose uses all run one way are left for other passes."""
    tris = mesh.triangles
    if len(tris) == 0:
        return mesh
    t64 = tris.astype(np.int64)
    directed = np.concatenate([t64[:, [0, 1]], t64[:, [1, 2]], t64[:, [2, 0]]])
    owner = np.tile(np.arange(len(t64)), 3)
    forward = directed[:, 0] < directed[:, 1]
    key = directed.min(axis=1) * mesh.vertex_count + directed.max(axis=1)
    uniq, counts = np.unique(key, return_counts=True)
    overused = uniq[counts > 2]
    if len(overused) == 0:
        return mesh
    areas = triangle_areas(mesh)
    drop = set()
    mask = np.isin(key, overused)
    rows_by_key: dict = {}
    for r in np.flatnonzero(mask):
        rows_by_key.setdefault(int(key[r]), []).append(int(r))
    for k in sorted(rows_by_key):
        rows = rows_by_key[k]
        fwd = sorted(
            ((float(areas[owner[r]]), int(owner[r])) for r in rows if forward[r]),
            reverse=True,
        )
        bwd = sorted(
            ((float(areas[owner[r]]), int(owner[r])) for r in rows if not forward[r]),
            reverse=True,
        )
        if not fwd or not bwd:
            continue
        for _, t in fwd[1:]:
            drop.add(t)
        for _, t in bwd[1:]:
            drop.add(t)
    if not drop:
        return mesh
    keep = np.ones(len(tris), dtype=bool)
    keep[sorted(drop)] = False
    return TriangleMesh(mesh.vertices, tris[keep])


def fix_t_junctions(mesh: TriangleMesh, tolerance: float = 2e-5, max_passes: int = 6) -> TriangleMesh:
    """Split boundary edges at vertices lying on them.

    Boolean clipping cuts the two operand surfaces along the same seam but
    samples it at different points, leaving hairline T-junctions. Inserting
    the opposing side's seam vertices into each boundary edge lets a
    subsequent weld close the mesh.
    """
    total_splits = 0
    for _ in range(max_passes):
        verts = mesh.vertices
        tris = mesh.triangles
        edges, owners, slots = _boundary_directed_edges(tris, len(verts))
        if len(edges) == 0:
            break
        boundary_vertices = np.unique(edges.reshape(-1))
        bv_pos = verts[boundary_vertices]

        # triangle index -> {slot: [(t_param, vertex_index), ...]}
        insertions: dict = {}
        n_splits = 0
        for e_idx in range(len(edges)):
            a, b = edges[e_idx]
            pa, pb = verts[a], verts[b]
            d = pb - pa
            length2 = float(d @ d)
            length = length2 ** 0.5
            # edges not much longer than the tolerance cannot meaningfully
            # be split; micro-loop contraction deals with those clusters
            if length < 4.0 * tolerance:
                continue
            rel = bv_pos - pa
            t = (rel @ d) / length2
            perp = rel - np.outer(t, d)
            dist2 = np.einsum("ij,ij->i", perp, perp)
            t_eps = tolerance / length
            limit = min(tolerance, 0.2 * length)
            on_edge = (
                (dist2 < limit * limit)
                & (t > t_eps)
                & (t < 1.0 - t_eps)
                & (boundary_vertices != a)
                & (boundary_vertices != b)
            )
            if not on_edge.any():
                continue
            hits = sorted(
                (float(tv), int(vi))
                for tv, vi in zip(t[on_edge], boundary_vertices[on_edge])
            )
            insertions.setdefault(int(owners[e_idx]), {})[int(slots[e_idx])] = hits
            n_splits += len(hits)

        if n_splits == 0:
            break
        total_splits += n_splits

        new_tris = []
        for ti in range(len(tris)):
            tri = tris[ti]
            per_slot = insertions.get(ti)
            if not per_slot:
                new_tris.append(tri)
                continue
            # split one edge per pass; remaining edges are caught next pass
            slot = min(per_slot)
            hits = per_slot[slot]
            a, b = int(tri[slot]), int(tri[(slot + 1) % 3])
            c = int(tri[(slot + 2) % 3])
            chain = [a] + [vi for _, vi in hits] + [b]
            for u, v in zip(chain[:-1], chain[1:]):
                if u != v and v != c and u != c:
                    new_tris.append(np.array([u, v, c], dtype=np.int32))
        mesh = TriangleMesh(verts, np.array(new_tris, dtype=np.int32))
        v2, t2, _ = weld_indexed(mesh.vertices, mesh.triangles)
        mesh = TriangleMesh(v2, t2)
    return mesh
