"""Quality-factor mesh simplification.

The quality factor is the target ratio of output to input triangle count;
collapse order is driven by quadric error with a priority queue (the jit
kernel in _qem). Heavy downloads run through maybe_auto_simplify so
interaction and boolean work stay responsive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _qem
from .mesh import MeshError, TriangleMesh, repair_mesh

__all__ = [
    "DecimationConfig",
    "DecimationStats",
    "simplify",
    "maybe_auto_simplify",
    "DEFAULT_QUALITY",
    "DEFAULT_AUTO_THRESHOLD",
]

DEFAULT_QUALITY = 0.30
DEFAULT_AUTO_THRESHOLD = 150_000


@dataclass(frozen=True)
class DecimationConfig:
    quality: float = DEFAULT_QUALITY
    auto_threshold: int = DEFAULT_AUTO_THRESHOLD

    def __post_init__(self):
        if not (0.0 < self.quality <= 1.0):
            raise MeshError(f"quality {self.quality} outside (0, 1]")
        if self.auto_threshold < 0:
            raise MeshError("auto_threshold must be >= 0")


@dataclass(frozen=True)
class DecimationStats:
    input_triangles: int
    output_triangles: int
    target_triangles: int
    collapses: int
    halt_reason: str  # "target" | "queue_empty" | "identity"
    max_accepted_error: float


def simplify(mesh: TriangleMesh, quality: float) -> tuple[TriangleMesh, DecimationStats]:
    """Collapse edges until triangle count reaches round(quality * input).

    quality = 1 returns the input unchanged. Boundary edges are never
    collapsed and collapses that would flip a neighbor normal are skipped,
    so sparse or broken regions can halt early (reported in stats).
    """
    if not (0.0 < quality <= 1.0):
        raise MeshError(f"quality {quality} outside (0, 1]")
    if mesh.is_empty():
        raise MeshError("cannot simplify an empty mesh")

    n_in = mesh.triangle_count
    target = int(round(quality * n_in))
    if quality == 1.0:
        stats = DecimationStats(n_in, n_in, target, 0, "identity", 0.0)
        return mesh, stats

    pos = mesh.vertices.copy()
    faces = mesh.triangles.astype(np.int64)

    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    lo = directed.min(axis=1)
    hi = directed.max(axis=1)
    key = lo * len(pos) + hi
    uniq, counts = np.unique(key, return_counts=True)
    edges = np.stack([uniq // len(pos), uniq % len(pos)], axis=1)
    is_boundary = np.zeros(len(pos), dtype=np.uint8)
    odd = edges[counts != 2]
    if len(odd):
        is_boundary[odd.reshape(-1)] = 1

    alive, halt, collapses, max_cost = _qem.decimate(
        pos, faces, edges, is_boundary, target, 1
    )

    kept = faces[alive.astype(bool)]
    used = np.zeros(len(pos), dtype=bool)
    used[kept.reshape(-1)] = True
    remap = np.cumsum(used) - 1
    out = TriangleMesh(pos[used], remap[kept].astype(np.int32))
    out = repair_mesh(out, orient="outward").mesh

    stats = DecimationStats(
        input_triangles=n_in,
        output_triangles=out.triangle_count,
        target_triangles=target,
        collapses=int(collapses),
        halt_reason="target" if halt == _qem.HALT_TARGET else "queue_empty",
        max_accepted_error=float(max_cost),
    )
    return out, stats


def maybe_auto_simplify(
    mesh: TriangleMesh, config: DecimationConfig | None = None
) -> tuple[TriangleMesh, bool, DecimationStats | None]:
    """Simplify heavy meshes, pass light ones through untouched.

    Strictly above the threshold triggers; a mesh of exactly threshold
    size keeps all its detail.
    """
    config = config or DecimationConfig()
    if mesh.triangle_count > config.auto_threshold:
        out, stats = simplify(mesh, config.quality)
        return out, True, stats
    return mesh, False, None


def warmup() -> None:
    """Compile the jit kernel on a small mesh (cache persists on disk)."""
    from .mesh import Sphere, make_primitive

    simplify(make_primitive(Sphere(radius=1.0, subdivisions=3)), 0.5)
