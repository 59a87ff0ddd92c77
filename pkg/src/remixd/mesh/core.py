"""Triangle-mesh value types and the basic geometric queries on them.

All lengths are millimeters. Meshes are immutable values: the wrapped numpy
arrays are marked read-only, so they are safe to share between scenes,
threads, and caches without copying.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TriangleMesh",
    "Transform",
    "Aabb",
    "EdgeReport",
    "MeshError",
    "signed_volume",
    "is_watertight",
    "edge_report",
    "compute_bounds",
    "apply_transform",
    "triangle_areas",
]


class MeshError(ValueError):
    """Raised when a mesh (or an operation precondition on it) is invalid."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle set.

    vertices: (n, 3) float64, finite coordinates in mm.
    triangles: (m, 3) int32 vertex indices, counter-clockwise seen from
    outside the solid.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if v.size and not np.isfinite(v).all():
            raise MeshError("mesh has non-finite vertex coordinates")
        if t.size:
            if t.min() < 0 or t.max() >= len(v):
                raise MeshError("triangle index out of range")
            if (
                (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
            ).any():
                raise MeshError("triangle with repeated vertex index")
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "triangles", _readonly(t))

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def corners(self) -> np.ndarray:
        """(m, 3, 3) array of triangle corner positions."""
        return self.vertices[self.triangles]

    def geometry_equal(self, other: "TriangleMesh") -> bool:
        """Exact equality of vertex positions and connectivity."""
        return (
            self.vertices.shape == other.vertices.shape
            and self.triangles.shape == other.triangles.shape
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
        )

    @staticmethod
    def empty() -> "TriangleMesh":
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    c = mesh.corners()
    cross = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def signed_volume(mesh: TriangleMesh) -> float:
    """Divergence-theorem volume of an oriented closed mesh.

    Positive iff the winding is outward. Meaningless on open meshes; callers
    gate on is_watertight when it matters.
    """
    if mesh.is_empty():
        return 0.0
    c = mesh.corners()
    # det(v0, v1, v2) / 6 summed over triangles
    return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)


@dataclass(frozen=True)
class EdgeReport:
    """Edge bookkeeping behind the watertightness check."""

    boundary_edges: int
    nonmanifold_edges: int
    misoriented_edges: int
    boundary_samples: tuple = ()

    @property
    def watertight(self) -> bool:
        return (
            self.boundary_edges == 0
            and self.nonmanifold_edges == 0
            and self.misoriented_edges == 0
        )


def edge_report(mesh: TriangleMesh) -> EdgeReport:
    if mesh.is_empty():
        return EdgeReport(0, 0, 0)
    t = mesh.triangles.astype(np.int64)
    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    lo = directed.min(axis=1)
    hi = directed.max(axis=1)
    undirected = lo * mesh.vertex_count + hi
    forward = directed[:, 0] < directed[:, 1]

    order = np.argsort(undirected, kind="stable")
    keys = undirected[order]
    fwd = forward[order]
    uniq, start = np.unique(keys, return_index=True)
    counts = np.diff(np.append(start, len(keys)))

    boundary = counts == 1
    nonmanifold = counts > 2
    # an interior edge is well-oriented iff its two uses run in opposite
    # directions, i.e. one forward and one backward
    fwd_cum = np.concatenate([[0], np.cumsum(fwd)])
    fwd_per_edge = fwd_cum[start + counts] - fwd_cum[start]
    misoriented = (counts == 2) & (fwd_per_edge != 1)

    samples = ()
    if boundary.any():
        idx = order[start[boundary][:8]]
        samples = tuple((int(a), int(b)) for a, b in directed[idx])
    return EdgeReport(
        boundary_edges=int(boundary.sum()),
        nonmanifold_edges=int(nonmanifold.sum()),
        misoriented_edges=int(misoriented.sum()),
        boundary_samples=samples,
    )


def is_watertight(mesh: TriangleMesh) -> bool:
    """True iff every undirected edge is used by exactly two triangles with
    opposite directed orientation."""
    return not mesh.is_empty() and edge_report(mesh).watertight


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box, min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        mn = np.asarray(self.min, dtype=np.float64).reshape(3)
        mx = np.asarray(self.max, dtype=np.float64).reshape(3)
        if (mn > mx).any():
            raise MeshError("Aabb min exceeds max")
        object.__setattr__(self, "min", _readonly(mn))
        object.__setattr__(self, "max", _readonly(mx))

    @property
    def size(self) -> np.ndarray:
        return self.max - self.min

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.size))

    def contains(self, points: np.ndarray, tol: float = 0.0) -> bool:
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return bool(((p >= self.min - tol) & (p <= self.max + tol)).all())

    def inflated(self, amount: float) -> "Aabb":
        return Aabb(self.min - amount, self.max + amount)


def compute_bounds(mesh: TriangleMesh) -> Aabb:
    if mesh.vertex_count == 0:
        raise MeshError("cannot compute bounds of an empty mesh")
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


def _quat_normalized(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = float(np.linalg.norm(q))
    if abs(n - 1.0) > 1e-9:
        raise MeshError(f"rotation quaternion norm {n!r} is not 1 within 1e-9")
    return q


@dataclass(frozen=True)
class Transform:
    """Scale, then rotate, then translate.

    rotation is a unit quaternion in (w, x, y, z) order; scale factors are
    per-axis and strictly positive, so triangle orientation is preserved.
    """

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0, 0, 0]))
    scale: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        q = _quat_normalized(self.rotation)
        s = np.asarray(self.scale, dtype=np.float64).reshape(3)
        if not np.isfinite(t).all() or not np.isfinite(s).all():
            raise MeshError("transform has non-finite components")
        if (s <= 0).any():
            raise MeshError("scale factors must be > 0")
        object.__setattr__(self, "translation", _readonly(t))
        object.__setattr__(self, "rotation", _readonly(q))
        object.__setattr__(self, "scale", _readonly(s))

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    @staticmethod
    def from_axis_angle(axis, angle_rad: float, translation=(0, 0, 0), scale=(1, 1, 1)) -> "Transform":
        a = np.asarray(axis, dtype=np.float64)
        n = np.linalg.norm(a)
        if n == 0:
            raise MeshError("zero rotation axis")
        a = a / n
        half = angle_rad / 2.0
        q = np.array([math.cos(half), *(math.sin(half) * a)])
        q = q / np.linalg.norm(q)
        return Transform(np.asarray(translation, float), q, np.asarray(scale, float))

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return (p * self.scale) @ self.rotation_matrix().T + self.translation

    def inverse(self) -> "Transform":
        w, x, y, z = self.rotation
        inv_q = np.array([w, -x, -y, -z])
        inv_s = 1.0 / self.scale
        r_inv = Transform(rotation=inv_q).rotation_matrix()
        inv_t = -(inv_s * (r_inv @ self.translation))
        return Transform(inv_t, inv_q / np.linalg.norm(inv_q), inv_s)

    def is_identity(self) -> bool:
        return (
            np.array_equal(self.translation, np.zeros(3))
            and np.array_equal(self.rotation, np.array([1.0, 0, 0, 0]))
            and np.array_equal(self.scale, np.ones(3))
        )

    def to_dict(self) -> dict:
        return {
            "t": [float(v) for v in self.translation],
            "q": [float(v) for v in self.rotation],
            "s": [float(v) for v in self.scale],
        }

    @staticmethod
    def from_dict(d: dict) -> "Transform":
        return Transform(
            np.asarray(d.get("t", [0, 0, 0]), float),
            np.asarray(d.get("q", [1, 0, 0, 0]), float),
            np.asarray(d.get("s", [1, 1, 1]), float),
        )


def apply_transform(mesh: TriangleMesh, t: Transform) -> TriangleMesh:
    """Map every vertex by scale, rotation, translation. Winding is
    unchanged: positive scale factors preserve orientation."""
    if t.is_identity():
        return mesh
    return TriangleMesh(t.apply_points(mesh.vertices), mesh.triangles.copy())
