import math

import numpy as np
import pytest

from oracles import ngon_area
from remixd.csg import CsgOp, csg
from remixd.mesh import (
    Cube,
    Cylinder,
    Pyramid,
    Sphere,
    Transform,
    TriangleMesh,
    apply_transform,
    make_primitive,
)
from remixd.slicer import (
    SliceConfig,
    SliceError,
    generate_infill,
    generate_perimeters,
    generate_supports,
    slice_mesh,
)
from remixd.slicer.geom2d import offset_contour, polygon_area


CFG = SliceConfig()


def slice_cube(edge=10.0):
    return slice_mesh(make_primitive(Cube(edge=edge)), CFG)


def test_cube_layer_count_exact():
    layers = slice_cube(10.0)
    assert len(layers) == 50
    assert layers[0].z == pytest.approx(0.1)
    assert layers[-1].z == pytest.approx(9.9)


def test_cube_layer_areas():
    for layer in slice_cube(10.0):
        assert len(layer.contours) == 1
        assert polygon_area(layer.contours[0]) == pytest.approx(100.0, rel=1e-9)


def test_sphere_midlayer_area_within_one_percent():
    mesh = make_primitive(Sphere(radius=5, subdivisions=3))
    layers = slice_mesh(mesh, CFG)
    mid = layers[len(layers) // 2]
    area = sum(polygon_area(c) for c in mid.contours)
    assert abs(area - math.pi * 25) / (math.pi * 25) < 0.01


def test_contour_orientation_outer_ccw_hole_cw():
    ring = csg(
        CsgOp.DIFFERENCE,
        make_primitive(Cylinder(radius=10, height=4, segments=48)),
        make_primitive(Cylinder(radius=6, height=6, segments=48)),
    ).mesh
    layers = slice_mesh(ring, CFG)
    layer = layers[len(layers) // 2]
    areas = sorted(polygon_area(c) for c in layer.contours)
    assert len(areas) == 2
    assert areas[0] < 0 < areas[1]  # hole CW, outer CCW
    assert areas[1] + areas[0] == pytest.approx(
        ngon_area(10, 48) - ngon_area(6, 48), rel=1e-6
    )
    assert areas[1] >= -areas[0]


def test_contours_closed():
    for layer in slice_cube(10.0):
        for contour in layer.contours:
            assert np.allclose(contour[0], contour[-1], atol=1e-6)


def test_short_mesh_warns_and_returns_no_layers():
    flat = apply_transform(make_primitive(Cube(edge=1)), Transform(scale=[10, 10, 0.1]))
    with pytest.warns(UserWarning, match="below one layer"):
        assert slice_mesh(flat, CFG) == []


def test_non_watertight_rejected():
    cube = make_primitive(Cube(edge=10))
    opened = TriangleMesh(cube.vertices, cube.triangles[:-1])
    with pytest.raises(SliceError, match="not watertight"):
        slice_mesh(opened, CFG)


def test_perimeters_inset_analytically():
    layer = slice_cube(10.0)[0]
    generate_perimeters(layer, CFG)
    assert len(layer.perimeters) == 2
    # insets 0.2 and 0.6 -> squares of side 9.6 and 8.8
    areas = sorted(polygon_area(p) for p in layer.perimeters)
    assert areas[1] == pytest.approx(9.6 ** 2, rel=1e-9)
    assert areas[0] == pytest.approx(8.8 ** 2, rel=1e-9)


def test_circle_perimeter_radii():
    layer = slice_mesh(make_primitive(Cylinder(radius=10, height=4, segments=64)), CFG)[0]
    generate_perimeters(layer, CFG)
    assert len(layer.perimeters) == 2
    for path, inset in zip(layer.perimeters, (0.2, 0.6)):
        radii = np.linalg.norm(path[:-1], axis=1)
        # mitered offset of a regular polygon lands on the scaled polygon,
        # whose vertex radius is (r - inset / cos(pi/n)) at worst
        assert radii.max() <= 10.0 - inset + 1e-6
        assert radii.min() >= (10.0 - inset) * math.cos(math.pi / 64) - 1e-6


def test_sliver_region_gets_fewer_perimeters_and_diagnostic():
    sliver = apply_transform(make_primitive(Cube(edge=1)), Transform(scale=[0.5, 20, 2]))
    layers = slice_mesh(sliver, CFG)
    layer = generate_perimeters(layers[0], CFG)
    assert len(layer.perimeters) <= 1
    assert layer.diagnostics


def test_infill_density_zero_empty():
    layer = slice_cube(10.0)[0]
    generate_perimeters(layer, CFG)
    generate_infill(layer, CFG.replace(infill_density=0.0), 0)
    assert layer.infill == []


def test_solid_infill_line_count_and_coverage():
    cfg = CFG.replace(infill_density=1.0)
    layer = slice_cube(10.0)[0]
    generate_perimeters(layer, cfg)
    generate_infill(layer, cfg, 0)
    # infill boundary is the 8.0mm square; 45-degree solid lines at 0.4mm
    # spacing across its 11.3mm diagonal
    expected = math.floor(8.0 * math.sqrt(2.0) / 0.4)
    assert abs(len(layer.infill) - expected) <= 2
    total = sum(math.dist(a, b) for a, b in layer.infill)
    assert total * 0.4 == pytest.approx(64.0, rel=0.08)  # paints the interior


def test_infill_direction_alternates():
    layers = slice_cube(10.0)[:2]
    for i, layer in enumerate(layers):
        generate_perimeters(layer, CFG)
        generate_infill(layer, CFG, i)

    def angles(layer):
        return {
            round(math.degrees(math.atan2(b[1] - a[1], b[0] - a[0])) % 180.0, 3)
            for a, b in layer.infill
        }

    assert angles(layers[0]) == {45.0}
    assert angles(layers[1]) == {135.0}


def _sliced_with_supports(mesh, cfg=CFG):
    layers = slice_mesh(mesh, cfg)
    for i, layer in enumerate(layers):
        generate_perimeters(layer, cfg)
        generate_infill(layer, cfg, i)
    generate_supports(mesh, layers, cfg)
    return layers


def test_cube_needs_no_support():
    layers = _sliced_with_supports(make_primitive(Cube(edge=10)))
    assert sum(len(layer.support) for layer in layers) == 0


def test_45_degree_chamfer_gets_no_support():
    # pyramid sides tilt exactly 45 degrees from vertical: strict threshold
    layers = _sliced_with_supports(make_primitive(Pyramid(base_edge=10, height=5)))
    assert sum(len(layer.support) for layer in layers) == 0


def test_cantilever_supported_under_overhang_only():
    column = apply_transform(make_primitive(Cube(edge=4)), Transform(translation=[0, 0, 2]))
    beam = apply_transform(
        make_primitive(Cube(edge=1)), Transform(scale=[24, 4, 2], translation=[10, 0, 5])
    )
    part = csg(CsgOp.UNION, column, beam).mesh
    layers = _sliced_with_supports(part)
    below = [layer for layer in layers if layer.z < 4.0]
    above = [layer for layer in layers if layer.z > 4.0]
    assert all(layer.support for layer in below)
    assert sum(len(layer.support) for layer in above) == 0
    xs = [x for layer in below for seg in layer.support for x in (seg[0][0], seg[1][0])]
    # columns sit under the unsupported span, clear of the column wall
    assert min(xs) >= 2.0 + 0.3
    assert max(xs) <= 22.0 + 1e-6


def test_supports_disabled():
    column = apply_transform(make_primitive(Cube(edge=4)), Transform(translation=[0, 0, 2]))
    beam = apply_transform(
        make_primitive(Cube(edge=1)), Transform(scale=[24, 4, 2], translation=[10, 0, 5])
    )
    part = csg(CsgOp.UNION, column, beam).mesh
    layers = _sliced_with_supports(part, CFG.replace(support_enabled=False))
    assert sum(len(layer.support) for layer in layers) == 0


def test_offset_contour_vanishes_small_region():
    tiny = np.array([[0, 0], [0.3, 0], [0.3, 0.3], [0, 0.3], [0, 0]], dtype=float)
    assert offset_contour(tiny, 0.2) is None


def test_capsule_cuts_match_scalar_reference():
    from remixd.slicer.geom2d import line_capsule_interval, polygon_capsule_cuts

    rng = np.random.default_rng(11)
    for _ in range(100):
        poly = rng.uniform(-10, 10, (6, 2))
        poly = np.vstack([poly, poly[0]])
        origin = tuple(rng.uniform(-10, 10, 2))
        angle = rng.uniform(0, 2 * math.pi)
        direction = (math.cos(angle), math.sin(angle))
        radius = rng.uniform(0.1, 2.0)
        reference = []
        for p0, p1 in zip(poly[:-1], poly[1:]):
            interval = line_capsule_interval(origin, direction, p0, p1, radius)
            if interval:
                reference.append(interval)
        vectorized = polygon_capsule_cuts(origin, direction, poly, radius)
        assert len(reference) == len(vectorized)
        for (a1, b1), (a2, b2) in zip(reference, vectorized):
            assert a1 == pytest.approx(a2, abs=1e-9)
            assert b1 == pytest.approx(b2, abs=1e-9)
