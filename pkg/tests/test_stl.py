import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remixd.mesh import (
    Cube,
    Cylinder,
    Pyramid,
    Sphere,
    StlError,
    TriangleMesh,
    load_stl,
    make_primitive,
    write_stl,
)

CORPUS = [
    make_primitive(Cube(edge=2)),
    make_primitive(Sphere(radius=1.5, subdivisions=3)),
    make_primitive(Pyramid(base_edge=3, height=4)),
    make_primitive(Cylinder(radius=5, height=10, segments=64)),
]


def canonical_triangles(mesh: TriangleMesh):
    """Connectivity as position triples, invariant to index relabeling
    and cyclic rotation within a triangle."""
    corners = mesh.vertices[mesh.triangles].astype(np.float32)
    rolled = [np.roll(corners, -k, axis=1).reshape(len(corners), 9) for k in range(3)]
    rows = sorted(
        min(tuple(r[i]) for r in rolled) for i in range(len(corners))
    )
    return rows


@pytest.mark.parametrize("mesh", CORPUS, ids=["cube", "sphere", "pyramid", "cylinder"])
def test_binary_roundtrip_bitwise(mesh):
    back = load_stl(write_stl(mesh, "binary"))
    # vertex positions bitwise identical as float32, as a set
    assert np.array_equal(
        np.unique(back.vertices.astype(np.float32), axis=0),
        np.unique(mesh.vertices.astype(np.float32), axis=0),
    )
    assert canonical_triangles(back) == canonical_triangles(mesh)


@pytest.mark.parametrize("mesh", CORPUS, ids=["cube", "sphere", "pyramid", "cylinder"])
def test_ascii_roundtrip(mesh):
    back = load_stl(write_stl(mesh, "ascii"))
    assert back.triangle_count == mesh.triangle_count
    assert canonical_triangles(back) == canonical_triangles(mesh)


def test_binary_length_is_84_plus_50n():
    cube = make_primitive(Cube(edge=1))
    data = write_stl(cube, "binary")
    assert len(data) == 84 + 50 * 12
    assert struct.unpack_from("<I", data, 80)[0] == 12


def test_cube_welds_to_8_vertices():
    mesh = load_stl(write_stl(make_primitive(Cube(edge=2)), "binary"))
    assert mesh.vertex_count == 8
    assert mesh.triangle_count == 12


def test_ascii_zero_area_facet_dropped_with_warning():
    text = """solid junk
facet normal 0 0 1
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 2 0 0
 endloop
endfacet
endsolid junk
"""
    with pytest.warns(UserWarning, match="degenerate"):
        mesh = load_stl(text.encode())
    assert mesh.triangle_count == 0


def test_truncated_binary_rejected():
    data = write_stl(make_primitive(Cube(edge=1)), "binary")
    with pytest.raises(StlError, match="truncated"):
        load_stl(data[:-10])


def test_zero_facets_rejected():
    header = b"\0" * 80 + struct.pack("<I", 0)
    with pytest.raises(StlError, match="zero facets"):
        load_stl(header)
    with pytest.raises(StlError, match="zero facets"):
        load_stl(b"solid empty\nendsolid empty\n")


def test_ascii_parse_error_reports_line():
    bad = b"solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0\nendloop\nendfacet\nendsolid x\n"
    with pytest.raises(StlError, match="line 4"):
        load_stl(bad)


def test_write_empty_mesh_rejected():
    with pytest.raises(StlError):
        write_stl(TriangleMesh.empty(), "binary")


def test_detection_prefers_consistent_binary():
    # an ASCII file whose length happens not to match any binary layout
    mesh = make_primitive(Pyramid(base_edge=1, height=1))
    assert load_stl(write_stl(mesh, "ascii")).triangle_count == 6


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_random_vertex_bits_roundtrip(seed):
    rng = np.random.default_rng(seed)
    verts = rng.uniform(-50, 50, (6, 3)).astype(np.float32).astype(np.float64)
    tris = np.array([[0, 1, 2], [3, 4, 5], [0, 2, 3]], dtype=np.int32)
    mesh = TriangleMesh(verts, tris)
    back = load_stl(write_stl(mesh, "binary"))
    assert canonical_triangles(back) == canonical_triangles(mesh)
