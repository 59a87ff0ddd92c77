"""Jit-compiled kernel for quadric-error edge collapse.

Everything lives in flat arrays so numba can compile the whole greedy
loop: a manual binary heap of candidate edges, per-vertex quadrics as
10-coefficient symmetric 4x4 forms, and vertex->face incidence as linked
lists over a fixed pool of 3*n_faces slots (an incidence entry follows
its face when a collapse renames a vertex, so the pool never grows).

Determinism: heap ordering breaks cost ties by edge key, candidate edges
are pushed in sorted order, and all arithmetic is straight IEEE doubles.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# halt reasons
HALT_TARGET = 0
HALT_QUEUE_EMPTY = 1

_NO_POINT = np.inf


@njit(cache=True, inline="always")
def _heap_push(heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, size,
               cost, key, va, vb, sa, sb):
    i = size
    heap_cost[i] = cost
    heap_key[i] = key
    heap_va[i] = va
    heap_vb[i] = vb
    heap_sa[i] = sa
    heap_sb[i] = sb
    while i > 0:
        p = (i - 1) // 2
        if heap_cost[p] < heap_cost[i] or (
            heap_cost[p] == heap_cost[i] and heap_key[p] <= heap_key[i]
        ):
            break
        heap_cost[p], heap_cost[i] = heap_cost[i], heap_cost[p]
        heap_key[p], heap_key[i] = heap_key[i], heap_key[p]
        heap_va[p], heap_va[i] = heap_va[i], heap_va[p]
        heap_vb[p], heap_vb[i] = heap_vb[i], heap_vb[p]
        heap_sa[p], heap_sa[i] = heap_sa[i], heap_sa[p]
        heap_sb[p], heap_sb[i] = heap_sb[i], heap_sb[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, size):
    size -= 1
    if size > 0:
        heap_cost[0] = heap_cost[size]
        heap_key[0] = heap_key[size]
        heap_va[0] = heap_va[size]
        heap_vb[0] = heap_vb[size]
        heap_sa[0] = heap_sa[size]
        heap_sb[0] = heap_sb[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            m = i
            if l < size and (
                heap_cost[l] < heap_cost[m]
                or (heap_cost[l] == heap_cost[m] and heap_key[l] < heap_key[m])
            ):
                m = l
            if r < size and (
                heap_cost[r] < heap_cost[m]
                or (heap_cost[r] == heap_cost[m] and heap_key[r] < heap_key[m])
            ):
                m = r
            if m == i:
                break
            heap_cost[m], heap_cost[i] = heap_cost[i], heap_cost[m]
            heap_key[m], heap_key[i] = heap_key[i], heap_key[m]
            heap_va[m], heap_va[i] = heap_va[i], heap_va[m]
            heap_vb[m], heap_vb[i] = heap_vb[i], heap_vb[m]
            heap_sa[m], heap_sa[i] = heap_sa[i], heap_sa[m]
            heap_sb[m], heap_sb[i] = heap_sb[i], heap_sb[m]
            i = m
    return size


@njit(cache=True)
def _quadric_eval(q, x, y, z):
    return (
        q[0] * x * x
        + 2.0 * q[1] * x * y
        + 2.0 * q[2] * x * z
        + 2.0 * q[3] * x
        + q[4] * y * y
        + 2.0 * q[5] * y * z
        + 2.0 * q[6] * y
        + q[7] * z * z
        + 2.0 * q[8] * z
        + q[9]
    )


@njit(cache=True)
def _optimal_point(q, ax, ay, az, bx, by, bz, out):
    """Minimizer of the quadric; falls back to the best of the endpoints
    and midpoint when the 3x3 system is near-singular."""
    a00, a01, a02 = q[0], q[1], q[2]
    a11, a12 = q[4], q[5]
    a22 = q[7]
    b0, b1, b2 = -q[3], -q[6], -q[8]
    det = (
        a00 * (a11 * a22 - a12 * a12)
        - a01 * (a01 * a22 - a12 * a02)
        + a02 * (a01 * a12 - a11 * a02)
    )
    scale = max(abs(a00), abs(a11), abs(a22), 1e-300)
    if abs(det) > 1e-10 * scale * scale * scale:
        inv = 1.0 / det
        x = (b0 * (a11 * a22 - a12 * a12)
             - a01 * (b1 * a22 - a12 * b2)
             + a02 * (b1 * a12 - a11 * b2)) * inv
        y = (a00 * (b1 * a22 - a12 * b2)
             - b0 * (a01 * a22 - a02 * a12)
             + a02 * (a01 * b2 - b1 * a02)) * inv
        z = (a00 * (a11 * b2 - b1 * a12)
             - a01 * (a01 * b2 - b1 * a02)
             + b0 * (a01 * a12 - a11 * a02)) * inv
        out[0] = x
        out[1] = y
        out[2] = z
        return _quadric_eval(q, x, y, z)
    mx, my, mz = 0.5 * (ax + bx), 0.5 * (ay + by), 0.5 * (az + bz)
    best = _quadric_eval(q, ax, ay, az)
    out[0], out[1], out[2] = ax, ay, az
    c = _quadric_eval(q, bx, by, bz)
    if c < best:
        best = c
        out[0], out[1], out[2] = bx, by, bz
    c = _quadric_eval(q, mx, my, mz)
    if c < best:
        best = c
        out[0], out[1], out[2] = mx, my, mz
    return best


@njit(cache=True)
def _face_quadrics(pos, faces, quadrics):
    for f in range(faces.shape[0]):
        i0, i1, i2 = faces[f, 0], faces[f, 1], faces[f, 2]
        ax, ay, az = pos[i0, 0], pos[i0, 1], pos[i0, 2]
        ux, uy, uz = pos[i1, 0] - ax, pos[i1, 1] - ay, pos[i1, 2] - az
        vx, vy, vz = pos[i2, 0] - ax, pos[i2, 1] - ay, pos[i2, 2] - az
        nx = uy * vz - uz * vy
        ny = uz * vx - ux * vz
        nz = ux * vy - uy * vx
        norm = (nx * nx + ny * ny + nz * nz) ** 0.5
        if norm < 1e-30:
            continue
        # area-weighted plane quadric
        area = 0.5 * norm
        nx, ny, nz = nx / norm, ny / norm, nz / norm
        d = -(nx * ax + ny * ay + nz * az)
        for vid in (i0, i1, i2):
            quadrics[vid, 0] += area * nx * nx
            quadrics[vid, 1] += area * nx * ny
            quadrics[vid, 2] += area * nx * nz
            quadrics[vid, 3] += area * nx * d
            quadrics[vid, 4] += area * ny * ny
            quadrics[vid, 5] += area * ny * nz
            quadrics[vid, 6] += area * ny * d
            quadrics[vid, 7] += area * nz * nz
            quadrics[vid, 8] += area * nz * d
            quadrics[vid, 9] += area * d * d


@njit(cache=True)
def _collect_ring(v, faces, face_alive, inc_head, inc_face, inc_next, ring, cap):
    """Alive faces incident to v into ring[:count]; -1 on overflow."""
    count = 0
    e = inc_head[v]
    while e != -1:
        f = inc_face[e]
        if face_alive[f] == 1 and (
            faces[f, 0] == v or faces[f, 1] == v or faces[f, 2] == v
        ):
            dup = False
            for k in range(count):
                if ring[k] == f:
                    dup = True
                    break
            if not dup:
                if count >= cap:
                    return -1
                ring[count] = f
                count += 1
        e = inc_next[e]
    return count


@njit(cache=True)
def _any_normal_flips(pos, faces, ring, count, a, b, px, py, pz):
    for i in range(count):
        f = ring[i]
        f0, f1, f2 = faces[f, 0], faces[f, 1], faces[f, 2]
        has_a = f0 == a or f1 == a or f2 == a
        has_b = f0 == b or f1 == b or f2 == b
        if has_a and has_b:
            continue  # wing face dies anyway
        x0, y0, z0 = pos[f0, 0], pos[f0, 1], pos[f0, 2]
        x1, y1, z1 = pos[f1, 0], pos[f1, 1], pos[f1, 2]
        x2, y2, z2 = pos[f2, 0], pos[f2, 1], pos[f2, 2]
        ox = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        oy = (z1 - z0) * (x2 - x0) - (x1 - x0) * (z2 - z0)
        oz = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if f0 == a or f0 == b:
            x0, y0, z0 = px, py, pz
        if f1 == a or f1 == b:
            x1, y1, z1 = px, py, pz
        if f2 == a or f2 == b:
            x2, y2, z2 = px, py, pz
        nx = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        ny = (z1 - z0) * (x2 - x0) - (x1 - x0) * (z2 - z0)
        nz = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        dot = ox * nx + oy * ny + oz * nz
        norm = (nx * nx + ny * ny + nz * nz) ** 0.5
        if dot <= 0.0 or norm < 1e-24:
            return True
    return False


@njit(cache=True)
def decimate(pos, faces, edges, is_boundary, target_faces, keep_boundary):
    """Greedy quadric edge collapse down to target_faces.

    edges is the (E, 2) unique undirected edge list with a < b, sorted;
    is_boundary flags vertices on non-manifold or boundary edges. Returns
    (face_alive mask, halt_reason, collapses, max_accepted_cost). pos and
    faces are modified in place.
    """
    n_v = pos.shape[0]
    n_f = faces.shape[0]
    RING_CAP = 128

    quadrics = np.zeros((n_v, 10), np.float64)
    _face_quadrics(pos, faces, quadrics)

    face_alive = np.ones(n_f, np.uint8)
    vert_version = np.zeros(n_v, np.int32)

    # vertex -> incidence linked list over a fixed pool of 3*n_f slots
    inc_head = np.full(n_v, -1, np.int64)
    inc_tail = np.full(n_v, -1, np.int64)
    inc_face = np.empty(3 * n_f, np.int64)
    inc_next = np.empty(3 * n_f, np.int64)
    slot = 0
    for f in range(n_f):
        for c in range(3):
            v = faces[f, c]
            inc_face[slot] = f
            inc_next[slot] = -1
            if inc_head[v] == -1:
                inc_head[v] = slot
            else:
                inc_next[inc_tail[v]] = slot
            inc_tail[v] = slot
            slot += 1

    # initial candidate edges, each pushed once with a < b
    cap0 = edges.shape[0]
    heap_cap = max(16, cap0 * 8)
    heap_cost = np.empty(heap_cap, np.float64)
    heap_key = np.empty(heap_cap, np.int64)
    heap_va = np.empty(heap_cap, np.int64)
    heap_vb = np.empty(heap_cap, np.int64)
    heap_sa = np.empty(heap_cap, np.int32)
    heap_sb = np.empty(heap_cap, np.int32)
    heap_size = 0

    qsum = np.empty(10, np.float64)
    opt = np.empty(3, np.float64)

    for e in range(cap0):
        a = edges[e, 0]
        b = edges[e, 1]
        for k in range(10):
            qsum[k] = quadrics[a, k] + quadrics[b, k]
        cost = _optimal_point(
            qsum, pos[a, 0], pos[a, 1], pos[a, 2], pos[b, 0], pos[b, 1], pos[b, 2], opt
        )
        heap_size = _heap_push(
            heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, heap_size,
            cost, a * n_v + b, a, b, vert_version[a], vert_version[b],
        )

    ring_a = np.empty(RING_CAP, np.int64)
    ring_b = np.empty(RING_CAP, np.int64)
    nbr_a = np.empty(RING_CAP * 2, np.int64)
    nbr_b = np.empty(RING_CAP * 2, np.int64)

    faces_left = n_f
    collapses = 0
    max_cost = 0.0
    halt = HALT_TARGET

    while faces_left > target_faces:
        if heap_size == 0:
            halt = HALT_QUEUE_EMPTY
            break
        cost = heap_cost[0]
        a = heap_va[0]
        b = heap_vb[0]
        sa = heap_sa[0]
        sb = heap_sb[0]
        heap_size = _heap_pop(
            heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, heap_size
        )
        if vert_version[a] != sa or vert_version[b] != sb:
            continue  # stale candidate

        if keep_boundary == 1 and (is_boundary[a] == 1 and is_boundary[b] == 1):
            continue

        count_a = _collect_ring(a, faces, face_alive, inc_head, inc_face, inc_next, ring_a, RING_CAP)
        count_b = _collect_ring(b, faces, face_alive, inc_head, inc_face, inc_next, ring_b, RING_CAP)
        if count_a <= 0 or count_b <= 0:
            continue

        # wings: faces containing both endpoints
        n_wings = 0
        for i in range(count_a):
            f = ring_a[i]
            if faces[f, 0] == b or faces[f, 1] == b or faces[f, 2] == b:
                n_wings += 1
        if n_wings != 2:
            continue  # boundary or non-manifold edge

        # link condition: shared ring vertices must be exactly the two apexes
        na = 0
        for i in range(count_a):
            f = ring_a[i]
            for c in range(3):
                v = faces[f, c]
                if v != a and v != b:
                    dup = False
                    for k in range(na):
                        if nbr_a[k] == v:
                            dup = True
                            break
                    if not dup:
                        nbr_a[na] = v
                        na += 1
        nb = 0
        for i in range(count_b):
            f = ring_b[i]
            for c in range(3):
                v = faces[f, c]
                if v != a and v != b:
                    dup = False
                    for k in range(nb):
                        if nbr_b[k] == v:
                            dup = True
                            break
                    if not dup:
                        nbr_b[nb] = v
                        nb += 1
        shared = 0
        for i in range(na):
            for j in range(nb):
                if nbr_a[i] == nbr_b[j]:
                    shared += 1
                    break
        if shared != 2:
            continue

        # collapse target position
        if keep_boundary == 1 and is_boundary[a] == 1:
            px, py, pz = pos[a, 0], pos[a, 1], pos[a, 2]
        elif keep_boundary == 1 and is_boundary[b] == 1:
            px, py, pz = pos[b, 0], pos[b, 1], pos[b, 2]
        else:
            for k in range(10):
                qsum[k] = quadrics[a, k] + quadrics[b, k]
            _optimal_point(
                qsum, pos[a, 0], pos[a, 1], pos[a, 2], pos[b, 0], pos[b, 1], pos[b, 2], opt
            )
            px, py, pz = opt[0], opt[1], opt[2]

        # reject collapses that flip any surviving incident face normal
        flip = _any_normal_flips(pos, faces, ring_a, count_a, a, b, px, py, pz)
        if not flip:
            flip = _any_normal_flips(pos, faces, ring_b, count_b, a, b, px, py, pz)
        if flip:
            continue

        # execute: b merges into a
        pos[a, 0], pos[a, 1], pos[a, 2] = px, py, pz
        for k in range(10):
            quadrics[a, k] += quadrics[b, k]
        for i in range(count_b):
            f = ring_b[i]
            has_a = faces[f, 0] == a or faces[f, 1] == a or faces[f, 2] == a
            if has_a:
                face_alive[f] = 0
                faces_left -= 1
            else:
                for c in range(3):
                    if faces[f, c] == b:
                        faces[f, c] = a
        if inc_head[a] == -1:
            inc_head[a] = inc_head[b]
            inc_tail[a] = inc_tail[b]
        elif inc_head[b] != -1:
            inc_next[inc_tail[a]] = inc_head[b]
            inc_tail[a] = inc_tail[b]
        inc_head[b] = -1
        inc_tail[b] = -1
        if is_boundary[b] == 1:
            is_boundary[a] = 1
        vert_version[a] += 1
        vert_version[b] += 1
        collapses += 1
        if cost > max_cost:
            max_cost = cost

        # refresh candidates around the merged vertex
        count_a = _collect_ring(a, faces, face_alive, inc_head, inc_face, inc_next, ring_a, RING_CAP)
        if count_a <= 0:
            continue
        na = 0
        for i in range(count_a):
            f = ring_a[i]
            for c in range(3):
                v = faces[f, c]
                if v != a:
                    dup = False
                    for k in range(na):
                        if nbr_a[k] == v:
                            dup = True
                            break
                    if not dup:
                        nbr_a[na] = v
                        na += 1
        # deterministic push order
        for i in range(na):
            for j in range(i + 1, na):
                if nbr_a[j] < nbr_a[i]:
                    nbr_a[i], nbr_a[j] = nbr_a[j], nbr_a[i]
        if heap_size + na + 1 >= heap_cap:
            # compact: drop stale entries
            w = 0
            for r in range(heap_size):
                va_, vb_ = heap_va[r], heap_vb[r]
                if vert_version[va_] == heap_sa[r] and vert_version[vb_] == heap_sb[r]:
                    heap_cost[w] = heap_cost[r]
                    heap_key[w] = heap_key[r]
                    heap_va[w] = va_
                    heap_vb[w] = vb_
                    heap_sa[w] = heap_sa[r]
                    heap_sb[w] = heap_sb[r]
                    w += 1
            # rebuild heap property
            heap_size = 0
            for r in range(w):
                heap_size = _heap_push(
                    heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, heap_size,
                    heap_cost[r], heap_key[r], heap_va[r], heap_vb[r], heap_sa[r], heap_sb[r],
                )
        for i in range(na):
            v = nbr_a[i]
            lo, hi = (a, v) if a < v else (v, a)
            for k in range(10):
                qsum[k] = quadrics[lo, k] + quadrics[hi, k]
            c2 = _optimal_point(
                qsum, pos[lo, 0], pos[lo, 1], pos[lo, 2], pos[hi, 0], pos[hi, 1], pos[hi, 2], opt
            )
            heap_size = _heap_push(
                heap_cost, heap_key, heap_va, heap_vb, heap_sa, heap_sb, heap_size,
                c2, lo * n_v + hi, lo, hi, vert_version[lo], vert_version[hi],
            )

    return face_alive, halt, collapses, max_cost
