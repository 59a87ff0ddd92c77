import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remixd.mesh import (
    Aabb,
    Cube,
    Cylinder,
    MeshError,
    Pyramid,
    Sphere,
    Transform,
    TriangleMesh,
    apply_transform,
    compute_bounds,
    edge_report,
    is_watertight,
    make_primitive,
    primitive_from_dict,
    repair_mesh,
    signed_volume,
)

ALL_PRIMITIVES = [
    Cube(edge=2.0),
    Sphere(radius=1.0, subdivisions=3),
    Pyramid(base_edge=3.0, height=6.0),
    Cylinder(radius=5.0, height=10.0, segments=64),
]


@pytest.mark.parametrize("kind", ALL_PRIMITIVES, ids=lambda k: type(k).__name__)
def test_primitives_watertight_positive_volume(kind):
    mesh = make_primitive(kind)
    assert is_watertight(mesh)
    assert signed_volume(mesh) > 0


def test_cube_volume_exact():
    assert signed_volume(make_primitive(Cube(edge=2.0))) == pytest.approx(8.0, abs=1e-12)


def test_cylinder_volume_within_half_percent():
    mesh = make_primitive(Cylinder(radius=5, height=10, segments=64))
    smooth = math.pi * 25 * 10
    assert abs(signed_volume(mesh) - smooth) / smooth < 0.005
    # and matches the tessellation-deficit formula almost exactly
    n = 64
    expected = 0.5 * n * 25 * math.sin(2 * math.pi / n) * 10
    assert signed_volume(mesh) == pytest.approx(expected, rel=1e-9)


def test_pyramid_volume_exact():
    assert signed_volume(make_primitive(Pyramid(base_edge=3, height=6))) == pytest.approx(18.0)


def test_sphere_subdiv3_has_1280_triangles():
    mesh = make_primitive(Sphere(radius=1, subdivisions=3))
    assert mesh.triangle_count == 1280


def test_primitive_validation():
    with pytest.raises(MeshError):
        make_primitive(Cube(edge=0))
    with pytest.raises(MeshError):
        make_primitive(Cylinder(radius=1, height=1, segments=2))
    with pytest.raises(MeshError):
        make_primitive(Sphere(radius=1, subdivisions=2))
    with pytest.raises(MeshError):
        primitive_from_dict({"kind": "torus"})
    assert primitive_from_dict({"kind": "cube", "edge": 3}) == Cube(edge=3)


def test_signed_volume_orientation_and_additivity():
    cube = make_primitive(Cube(edge=1))
    assert signed_volume(cube) == pytest.approx(1.0)
    flipped = TriangleMesh(cube.vertices, cube.triangles[:, [0, 2, 1]])
    assert signed_volume(flipped) == pytest.approx(-1.0)
    far = apply_transform(cube, Transform(translation=[10, 0, 0]))
    both = TriangleMesh(
        np.vstack([cube.vertices, far.vertices]),
        np.vstack([cube.triangles, far.triangles + cube.vertex_count]),
    )
    assert signed_volume(both) == pytest.approx(2.0)


def test_watertight_detects_missing_triangle():
    cube = make_primitive(Cube(edge=1))
    opened = TriangleMesh(cube.vertices, cube.triangles[:-1])
    report = edge_report(opened)
    assert not report.watertight
    assert report.boundary_edges == 3


def test_bounds():
    cube = make_primitive(Cube(edge=1))
    box = compute_bounds(cube)
    assert np.allclose(box.min, [-0.5, -0.5, -0.5])
    assert np.allclose(box.max, [0.5, 0.5, 0.5])
    moved = apply_transform(cube, Transform(translation=[3, 4, 5]))
    box2 = compute_bounds(moved)
    assert np.allclose(box2.min, [2.5, 3.5, 4.5])
    assert box2.contains(moved.vertices)
    with pytest.raises(MeshError):
        compute_bounds(TriangleMesh.empty())
    with pytest.raises(MeshError):
        Aabb([1, 0, 0], [0, 1, 1])


def test_identity_transform_returns_same_mesh():
    cube = make_primitive(Cube(edge=1))
    assert apply_transform(cube, Transform.identity()) is cube


def test_uniform_scale_cubes_volume():
    cube = make_primitive(Cube(edge=1))
    scaled = apply_transform(cube, Transform(scale=[2, 2, 2]))
    assert signed_volume(scaled) == pytest.approx(8.0, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)),
    st.floats(0.1, 3.0),
    st.floats(-math.pi, math.pi),
)
def test_transform_inverse_roundtrip(translation, scale, angle):
    t = Transform.from_axis_angle(
        [0.3, -0.5, 0.8], angle, translation=translation, scale=[scale] * 3
    )
    cube = make_primitive(Cube(edge=2))
    back = apply_transform(apply_transform(cube, t), t.inverse())
    assert np.abs(back.vertices - cube.vertices).max() < 1e-6


def test_transform_validation():
    with pytest.raises(MeshError):
        Transform(scale=[1, 1, 0])
    with pytest.raises(MeshError):
        Transform(rotation=[1, 1, 0, 0])  # not unit


def test_repair_fixes_single_flipped_triangle():
    cube = make_primitive(Cube(edge=2))
    tris = cube.triangles.copy()
    tris[0] = tris[0][[0, 2, 1]]
    result = repair_mesh(TriangleMesh(cube.vertices, tris))
    assert result.triangles_flipped == 1
    assert signed_volume(result.mesh) == pytest.approx(8.0)
    assert is_watertight(result.mesh)


def test_repair_flips_inverted_component():
    cube = make_primitive(Cube(edge=2))
    inverted = TriangleMesh(cube.vertices, cube.triangles[:, [0, 2, 1]])
    result = repair_mesh(inverted)
    assert result.components_reversed == 1
    assert signed_volume(result.mesh) == pytest.approx(8.0)


def test_repair_idempotent_and_identity_on_clean_mesh():
    cube = make_primitive(Cube(edge=2))
    first = repair_mesh(cube)
    assert first.clean
    assert first.mesh.geometry_equal(cube)
    again = repair_mesh(first.mesh)
    assert again.clean
    assert again.mesh.geometry_equal(first.mesh)


def test_repair_welds_duplicate_vertex():
    cube = make_primitive(Cube(edge=2))
    verts = np.vstack([cube.vertices, cube.vertices[0]])
    tris = cube.triangles.copy()
    tris[0, 0] = 8  # reference the duplicate
    result = repair_mesh(TriangleMesh(verts, tris))
    assert result.vertices_welded == 1
    assert result.mesh.vertex_count == 8


def test_repair_reports_nonmanifold_edges():
    cube = make_primitive(Cube(edge=2))
    # add a fin: a triangle reusing an existing edge
    fin = np.array([[0, 1, 4]], dtype=np.int32)
    tris = np.vstack([cube.triangles, fin])
    result = repair_mesh(TriangleMesh(cube.vertices.copy(), tris))
    assert result.nonmanifold_edges > 0


def test_mesh_invariants_enforced():
    with pytest.raises(MeshError):
        TriangleMesh(np.zeros((2, 3)), np.array([[0, 1, 2]], dtype=np.int32))
    with pytest.raises(MeshError):
        TriangleMesh(np.zeros((3, 3)), np.array([[0, 1, 1]], dtype=np.int32))
    with pytest.raises(MeshError):
        TriangleMesh(np.array([[np.nan, 0, 0]]), np.zeros((0, 3), dtype=np.int32))
