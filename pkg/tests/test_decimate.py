import pytest

from remixd.decimate import DecimationConfig, maybe_auto_simplify, simplify
from remixd.mesh import (
    Cube,
    MeshError,
    Sphere,
    compute_bounds,
    is_watertight,
    make_primitive,
    signed_volume,
)


@pytest.fixture(scope="module")
def icosphere():
    return make_primitive(Sphere(radius=10.0, subdivisions=3))  # 1280 triangles


def test_icosphere_half(icosphere):
    out, stats = simplify(icosphere, 0.5)
    assert abs(out.triangle_count - 640) <= 13
    assert stats.halt_reason == "target"
    drift = abs(signed_volume(out) - signed_volume(icosphere)) / signed_volume(icosphere)
    assert drift < 0.02
    assert is_watertight(out)


def test_quality_one_is_identity(icosphere):
    out, stats = simplify(icosphere, 1.0)
    assert out.geometry_equal(icosphere)
    assert stats.halt_reason == "identity"


def test_face_count_contract(icosphere):
    for q in (0.2, 0.35, 0.6, 0.85):
        out, stats = simplify(icosphere, q)
        target = round(q * icosphere.triangle_count)
        assert abs(out.triangle_count - target) <= 0.02 * icosphere.triangle_count


def test_monotone_in_quality(icosphere):
    counts = [simplify(icosphere, q)[0].triangle_count for q in (0.2, 0.4, 0.6, 0.8)]
    assert counts == sorted(counts)


def test_bounds_preserved(icosphere):
    box_in = compute_bounds(icosphere)
    out, _ = simplify(icosphere, 0.3)
    slack = 0.01 * box_in.diagonal
    box_out = compute_bounds(out)
    assert (box_out.min >= box_in.min - slack).all()
    assert (box_out.max <= box_in.max + slack).all()


def test_volume_preserved_at_quality_030(icosphere):
    out, _ = simplify(icosphere, 0.3)
    drift = abs(signed_volume(out) - signed_volume(icosphere)) / signed_volume(icosphere)
    assert drift <= 0.03


def test_deterministic(icosphere):
    a, _ = simplify(icosphere, 0.4)
    b, _ = simplify(icosphere, 0.4)
    assert a.geometry_equal(b)


def test_invalid_inputs(icosphere):
    with pytest.raises(MeshError):
        simplify(icosphere, 0.0)
    with pytest.raises(MeshError):
        simplify(icosphere, 1.2)
    with pytest.raises(MeshError):
        DecimationConfig(quality=0)


def test_auto_simplify_threshold_semantics():
    cube = make_primitive(Cube(edge=1))  # 12 triangles
    out, applied, stats = maybe_auto_simplify(cube, DecimationConfig(quality=0.3, auto_threshold=150))
    assert not applied and out is cube and stats is None

    ico = make_primitive(Sphere(radius=1, subdivisions=3))
    out, applied, stats = maybe_auto_simplify(ico, DecimationConfig(quality=0.5, auto_threshold=100))
    assert applied and out.triangle_count < ico.triangle_count
    assert stats.halt_reason == "target"

    # exactly at the threshold: strict inequality, untouched
    out, applied, _ = maybe_auto_simplify(
        ico, DecimationConfig(quality=0.5, auto_threshold=ico.triangle_count)
    )
    assert not applied and out is ico
