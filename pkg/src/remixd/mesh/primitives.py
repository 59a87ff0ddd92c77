"""The four built-in solids: cube, sphere, pyramid, cylinder.

All are watertight, centered at the origin, and wound outward (positive
signed volume). Dimensions are millimeters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MeshError, TriangleMesh

__all__ = ["Cube", "Sphere", "Pyramid", "Cylinder", "PrimitiveKind", "make_primitive", "primitive_from_dict"]


@dataclass(frozen=True)
class Cube:
    edge: float = 10.0


@dataclass(frozen=True)
class Sphere:
    radius: float = 10.0
    subdivisions: int = 3  # icosahedron refinement level


@dataclass(frozen=True)
class Pyramid:
    base_edge: float = 10.0
    height: float = 10.0


@dataclass(frozen=True)
class Cylinder:
    radius: float = 10.0
    height: float = 10.0
    segments: int = 64


PrimitiveKind = Cube | Sphere | Pyramid | Cylinder

_KIND_NAMES = {"cube": Cube, "sphere": Sphere, "pyramid": Pyramid, "cylinder": Cylinder}


def primitive_from_dict(spec: dict) -> PrimitiveKind:
    """Build a primitive spec from its JSON form, e.g.
    {"kind": "cylinder", "radius": 20, "height": 60, "segments": 64}."""
    kind = spec.get("kind")
    cls = _KIND_NAMES.get(str(kind).lower() if kind else "")
    if cls is None:
        raise MeshError(f"unknown primitive kind {kind!r}")
    args = {k: v for k, v in spec.items() if k != "kind"}
    try:
        return cls(**args)
    except TypeError as exc:
        raise MeshError(f"bad {kind} parameters: {exc}") from None


def primitive_to_dict(kind: PrimitiveKind) -> dict:
    name = type(kind).__name__.lower()
    d = {"kind": name}
    d.update({k: v for k, v in kind.__dict__.items()})
    return d


def _validate(kind: PrimitiveKind) -> None:
    dims = {k: v for k, v in kind.__dict__.items() if k not in ("segments", "subdivisions")}
    for name, value in dims.items():
        if not (float(value) > 0):
            raise MeshError(f"{type(kind).__name__}.{name} must be > 0")
    counts = {k: v for k, v in kind.__dict__.items() if k in ("segments", "subdivisions")}
    for name, value in counts.items():
        if int(value) < 3:
            raise MeshError(f"{type(kind).__name__}.{name} must be >= 3")


def _cube(edge: float) -> TriangleMesh:
    h = edge / 2.0
    v = np.array(
        [
            [-h, -h, -h],
            [+h, -h, -h],
            [+h, +h, -h],
            [-h, +h, -h],
            [-h, -h, +h],
            [+h, -h, +h],
            [+h, +h, +h],
            [-h, +h, +h],
        ]
    )
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (z-)
            [4, 5, 6], [4, 6, 7],  # top (z+)
            [0, 1, 5], [0, 5, 4],  # y-
            [2, 3, 7], [2, 7, 6],  # y+
            [1, 2, 6], [1, 6, 5],  # x+
            [3, 0, 4], [3, 4, 7],  # x-
        ],
        dtype=np.int32,
    )
    return TriangleMesh(v, t)


def _icosphere(radius: float, subdivisions: int) -> TriangleMesh:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in verts]

    for _ in range(subdivisions):
        midpoint: dict = {}
        new_faces = []

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            idx = midpoint.get(key)
            if idx is None:
                m = verts[a] + verts[b]
                m = m / np.linalg.norm(m)
                verts.append(m)
                idx = len(verts) - 1
                midpoint[key] = idx
            return idx

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces

    v = np.array(verts) * radius
    return TriangleMesh(v, np.array(faces, dtype=np.int32))


def _pyramid(base_edge: float, height: float) -> TriangleMesh:
    h = base_edge / 2.0
    zb, zt = -height / 2.0, height / 2.0
    v = np.array(
        [
            [-h, -h, zb],
            [+h, -h, zb],
            [+h, +h, zb],
            [-h, +h, zb],
            [0.0, 0.0, zt],
        ]
    )
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],          # base, facing down
            [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4],
        ],
        dtype=np.int32,
    )
    return TriangleMesh(v, t)


def _cylinder(radius: float, height: float, segments: int) -> TriangleMesh:
    n = int(segments)
    zb, zt = -height / 2.0, height / 2.0
    angles = 2.0 * math.pi * np.arange(n) / n
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)

    verts = [(0.0, 0.0, zb), (0.0, 0.0, zt)]
    verts += [(x, y, zb) for x, y in ring]
    verts += [(x, y, zt) for x, y in ring]

    tris = []
    for i in range(n):
        j = (i + 1) % n
        b0, b1 = 2 + i, 2 + j
        t0, t1 = 2 + n + i, 2 + n + j
        tris.append((0, b1, b0))       # bottom cap, facing down
        tris.append((1, t0, t1))       # top cap, facing up
        tris.append((b0, b1, t1))      # wall
        tris.append((b0, t1, t0))
    return TriangleMesh(np.array(verts), np.array(tris, dtype=np.int32))


def make_primitive(kind: PrimitiveKind) -> TriangleMesh:
    """Tessellate a primitive spec into a watertight, outward-wound mesh."""
    _validate(kind)
    if isinstance(kind, Cube):
        return _cube(float(kind.edge))
    if isinstance(kind, Sphere):
        return _icosphere(float(kind.radius), int(kind.subdivisions))
    if isinstance(kind, Pyramid):
        return _pyramid(float(kind.base_edge), float(kind.height))
    if isinstance(kind, Cylinder):
        return _cylinder(float(kind.radius), float(kind.height), int(kind.segments))
    raise MeshError(f"unsupported primitive {kind!r}")
