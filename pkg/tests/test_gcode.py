import math

import pytest

from remixd.mesh import Cube, make_primitive, signed_volume
from remixd.slicer import (
    GcodeError,
    SliceConfig,
    emit_gcode,
    extrusion_per_mm,
    parse_gcode,
    slice_to_gcode,
)
from remixd.slicer.layers import LayerSlice


def test_extrusion_formula_single_segment():
    cfg = SliceConfig()
    de = 10.0 * extrusion_per_mm(cfg)
    expected = 10.0 * 0.2 * 0.4 / (math.pi * 0.875 ** 2)
    assert de == pytest.approx(expected, abs=1e-12)
    assert de == pytest.approx(0.3326, abs=1e-4)

    layer = LayerSlice(z=0.2, infill=[((100.0, 110.0), (110.0, 110.0))])
    program = emit_gcode([layer], cfg)
    moves = [l for l in program.lines if l.startswith("G1 X")]
    assert len(moves) == 1
    e_value = float(moves[0].split("E")[1].split()[0])
    assert e_value == pytest.approx(de, abs=1e-6)


def test_empty_layers_header_footer_only():
    program = emit_gcode([], SliceConfig())
    assert program.total_extruded == 0.0
    text = program.text
    assert text.startswith("; remixd toolpath\n")
    assert "G21" in text and "G90" in text and "M82" in text
    assert "M109" in text and "M190" in text and "G28" in text
    assert text.rstrip().endswith("M84")


def test_roundtrip_is_bytewise_identity():
    program = slice_to_gcode(make_primitive(Cube(edge=10)), SliceConfig())
    reparsed = parse_gcode(program.text)
    assert reparsed.text == program.text
    assert parse_gcode(reparsed.text).text == program.text
    assert reparsed.unknown_commands == ()


def test_unknown_commands_preserved_verbatim():
    text = "G21\nM999 S1 ; mystery\nG1 X1 Y0 E0.1 F1200\n"
    program = parse_gcode(text)
    assert program.text == text
    assert len(program.unknown_commands) == 1
    assert program.unknown_commands[0] == (2, "M999 S1 ; mystery")


def test_malformed_word_reports_line():
    with pytest.raises(GcodeError, match="line 2"):
        parse_gcode("G21\nG1 X=>\n")


def test_e_monotonic_with_retraction_pairs():
    program = slice_to_gcode(make_primitive(Cube(edge=10)), SliceConfig(infill_density=0.2))
    assert program.e_violations == 0
    # retractions appear as motion-free E drops restored by +retract_length
    e_only = [
        float(l.split("E")[1].split()[0])
        for l in program.lines
        if l.startswith("G1 E")
    ]
    assert e_only and len(e_only) % 2 == 0  # retract/unretract pairs
    for retract, unretract in zip(e_only[0::2], e_only[1::2]):
        assert unretract - retract == pytest.approx(1.0, abs=1e-6)


def test_solid_infill_volume_conservation():
    cube = make_primitive(Cube(edge=10))
    program = slice_to_gcode(cube, SliceConfig(infill_density=1.0))
    mesh_volume = signed_volume(cube)
    assert 0.9 * mesh_volume <= program.filament_volume <= 1.1 * mesh_volume


def test_coordinates_stay_inside_build_volume():
    program = slice_to_gcode(make_primitive(Cube(edge=10)), SliceConfig())
    ex, ey, ez = SliceConfig().build_volume
    assert program.max_xyz[0] <= ex and program.max_xyz[1] <= ey
    assert program.max_xyz[2] <= ez
    assert min(program.min_xyz) >= 0.0


def test_path_outside_build_volume_rejected():
    layer = LayerSlice(z=0.1, infill=[((-500.0, 0.0), (500.0, 0.0))])
    with pytest.raises(GcodeError, match="outside build volume"):
        emit_gcode([layer], SliceConfig())


def test_config_header_comments_echo_values():
    cfg = SliceConfig(layer_height=0.3, infill_density=0.45)
    program = emit_gcode([], cfg)
    assert "; layer_height = 0.3" in program.lines
    assert "; infill_density = 0.45" in program.lines


def test_solid_infill_conserves_volume_convex_corpus():
    from remixd.mesh import Cylinder, Pyramid

    cfg = SliceConfig(infill_density=1.0, support_enabled=False)
    corpus = [
        make_primitive(Cube(edge=10)),
        make_primitive(Cylinder(radius=6, height=12, segments=64)),
        make_primitive(Pyramid(base_edge=14, height=12)),
    ]
    for mesh in corpus:
        program = slice_to_gcode(mesh, cfg)
        volume = signed_volume(mesh)
        assert 0.9 * volume <= program.filament_volume <= 1.1 * volume
