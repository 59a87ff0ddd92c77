"""STL reading and writing.

Binary layout (little-endian): 80-byte header, uint32 triangle count, then
per facet 12 float32 (normal, v0, v1, v2) and a uint16 attribute. Facet
normals in the wild are unreliable, so they are ignored on read and
recomputed from vertex winding on write. Vertices are welded on read at
WELD_TOLERANCE and degenerate facets dropped.
"""
from __future__ import annotations

import struct
import warnings

import numpy as np

from .core import MeshError, TriangleMesh

__all__ = ["StlError", "load_stl", "write_stl", "WELD_TOLERANCE", "DEGENERATE_AREA"]

WELD_TOLERANCE = 1e-6  # mm
DEGENERATE_AREA = 1e-9  # mm^2

_HEADER_TAG = b"remixd binary stl"

_FACET_DTYPE = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


class StlError(MeshError):
    """Malformed or unusable STL payload."""


def _weld(points: np.ndarray, tolerance: float = WELD_TOLERANCE):
    """Map raw facet corners onto a deduplicated vertex array.

    Points are snapped to a tolerance grid; corners landing in the same cell
    share one vertex. Identical input coordinates always weld together, and
    the first occurrence keeps its exact (unsnapped) value.
    """
    keys = np.round(points / tolerance).astype(np.int64)
    _, first, inverse = np.unique(
        keys, axis=0, return_index=True, return_inverse=True
    )
    # preserve first-appearance order so output is independent of hash order
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return points[np.sort(first)], rank[inverse]


def _build_mesh(corners: np.ndarray, source: str) -> TriangleMesh:
    """Weld facet corners (m, 3, 3) into an indexed mesh, dropping
    degenerate facets."""
    m = len(corners)
    vertices, index = _weld(corners.reshape(-1, 3))
    triangles = index.reshape(m, 3)

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
    dropped = int(m - keep.sum())
    if dropped:
        warnings.warn(
            f"{source}: dropped {dropped} degenerate facet(s)", stacklevel=3
        )
    triangles = triangles[keep]

    used = np.zeros(len(vertices), dtype=bool)
    used[triangles.reshape(-1)] = True
    remap = np.cumsum(used) - 1
    return TriangleMesh(vertices[used], remap[triangles].astype(np.int32))


def _parse_binary(data: bytes) -> np.ndarray:
    declared = struct.unpack_from("<I", data, 80)[0]
    expected = 84 + 50 * declared
    if len(data) < expected:
        raise StlError(
            f"truncated binary STL: {declared} facets declared, "
            f"{expected} bytes needed, {len(data)} present"
        )
    facets = np.frombuffer(data, dtype=_FACET_DTYPE, count=declared, offset=84)
    return facets["verts"].astype(np.float64)


def _parse_ascii(data: bytes) -> np.ndarray:
    try:
        text = data.decode("ascii", errors="replace")
    except Exception as exc:  # pragma: no cover - decode with replace cannot fail
        raise StlError(f"undecodable ASCII STL: {exc}") from exc

    corners: list = []
    current: list = []
    in_loop = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        word = tokens[0].lower()
        if word == "solid" or word == "endsolid":
            continue
        if word == "facet":
            current = []
            continue
        if word == "outer":
            in_loop = True
            continue
        if word == "vertex":
            if not in_loop:
                raise StlError(f"ASCII STL line {lineno}: vertex outside loop")
            if len(tokens) != 4:
                raise StlError(f"ASCII STL line {lineno}: expected 3 coordinates")
            try:
                current.append([float(v) for v in tokens[1:4]])
            except ValueError:
                raise StlError(f"ASCII STL line {lineno}: bad coordinate") from None
            continue
        if word == "endloop":
            in_loop = False
            continue
        if word == "endfacet":
            if len(current) != 3:
                raise StlError(
                    f"ASCII STL line {lineno}: facet with {len(current)} vertices"
                )
            corners.append(current)
            current = []
            continue
        raise StlError(f"ASCII STL line {lineno}: unexpected token {tokens[0]!r}")
    if not corners:
        raise StlError("STL contains zero facets")
    # quantize like the binary path: the format is float32
    return np.asarray(corners, dtype=np.float32).astype(np.float64)


def load_stl(data: bytes) -> TriangleMesh:
    """Parse ASCII or binary STL bytes into a welded TriangleMesh.

    Binary is assumed when the byte length matches 84 + 50 * declared facet
    count; anything else is parsed as ASCII.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_stl expects bytes")
    data = bytes(data)
    if len(data) >= 84:
        declared = struct.unpack_from("<I", data, 80)[0]
        if len(data) == 84 + 50 * declared:
            if declared == 0:
                raise StlError("STL contains zero facets")
            return _build_mesh(_parse_binary(data), "binary stl")
    try:
        return _build_mesh(_parse_ascii(data), "ascii stl")
    except StlError:
        if len(data) >= 84 and data[:5].lower() != b"solid":
            # looked binary but the byte length disagrees with the declared
            # facet count: report that, it is the likelier defect
            _parse_binary(data)
        raise


def _facet_normals(corners32: np.ndarray) -> np.ndarray:
    c = corners32.astype(np.float64)
    n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    lengths = np.linalg.norm(n, axis=1)
    lengths[lengths == 0] = 1.0
    return (n / lengths[:, None]).astype(np.float32)


def write_stl(mesh: TriangleMesh, format: str = "binary") -> bytes:
    """Serialize a mesh to STL bytes. Binary output is exactly
    84 + 50 * triangle_count bytes."""
    if mesh.is_empty():
        raise StlError("refusing to write an empty mesh")
    corners32 = mesh.corners().astype(np.float32)
    normals = _facet_normals(corners32)

    if format == "binary":
        out = np.zeros(len(corners32), dtype=_FACET_DTYPE)
        out["normal"] = normals
        out["verts"] = corners32
        header = _HEADER_TAG.ljust(80, b"\0")
        return header + struct.pack("<I", len(corners32)) + out.tobytes()
    if format == "ascii":
        lines = ["solid remixd"]
        for n, tri in zip(normals, corners32):
            lines.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
            lines.append("    outer loop")
            for v in tri:
                lines.append(f"      vertex {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append("endsolid remixd")
        return ("\n".join(lines) + "\n").encode("ascii")
    raise ValueError(f"unknown STL format {format!r}")
