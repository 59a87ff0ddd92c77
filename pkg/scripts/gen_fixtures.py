#!/usr/bin/env python3
"""Build the offline fixture corpus: models, thumbnails, environment
scans, and the scripted walkthrough sessions. Deterministic output;
run from the repository root and commit the results.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from remixd.csg import CsgOp, csg  # noqa: E402
from remixd.mesh import (  # noqa: E402
    Cube,
    Cylinder,
    Pyramid,
    Transform,
    apply_transform,
    is_watertight,
    make_primitive,
    signed_volume,
    write_stl,
)

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


def T(t=(0, 0, 0), s=(1, 1, 1), axis=None, angle=0.0):
    if axis is not None:
        return Transform.from_axis_angle(axis, angle, translation=t, scale=s)
    return Transform(np.asarray(t, float), np.array([1.0, 0, 0, 0]), np.asarray(s, float))


def union(a, b):
    return csg(CsgOp.UNION, a, b).mesh


def difference(a, b):
    return csg(CsgOp.DIFFERENCE, a, b).mesh


def pot_classic():
    outer = make_primitive(Cylinder(radius=45, height=80, segments=64))
    inner = apply_transform(
        make_primitive(Cylinder(radius=40, height=78, segments=64)), T(t=(0, 0, 3))
    )
    return difference(outer, inner)


def pot_modern():
    outer = apply_transform(make_primitive(Cube(edge=1)), T(s=(80, 80, 70)))
    inner = apply_transform(make_primitive(Cube(edge=1)), T(s=(70, 70, 68), t=(0, 0, 3)))
    return difference(outer, inner)


def pot_angular():
    # upside-down pyramid, apex trimmed flat for a printable base; the
    # rotation (not a mirror) keeps the winding positive
    body = apply_transform(
        make_primitive(Pyramid(base_edge=90, height=110)),
        T(axis=(1, 0, 0), angle=np.pi, t=(0, 0, 35)),
    )
    trim = apply_transform(make_primitive(Cube(edge=1)), T(s=(200, 200, 80), t=(0, 0, -60)))
    body = difference(body, trim)  # spans z in [-20, 90], walls taper
    cavity = apply_transform(
        make_primitive(Cylinder(radius=28, height=36, segments=48)), T(t=(0, 0, 73))
    )
    return difference(body, cavity)


def pot_fancy_noderiv():
    outer = make_primitive(Cylinder(radius=40, height=60, segments=48))
    inner = apply_transform(
        make_primitive(Cylinder(radius=36, height=58, segments=48)), T(t=(0, 0, 2))
    )
    return difference(outer, inner)


def lathe(profile, segments=48):
    """Surface of revolution around z. Profile runs bottom to top with
    r=0 at both ends (the poles); watertight by construction."""
    import numpy as _np
    from remixd.mesh import TriangleMesh

    assert profile[0][0] == 0 and profile[-1][0] == 0
    rings = profile[1:-1]
    angles = 2 * _np.pi * _np.arange(segments) / segments
    cos, sin = _np.cos(angles), _np.sin(angles)
    verts = [(0.0, 0.0, profile[0][1]), (0.0, 0.0, profile[-1][1])]
    for r, z in rings:
        verts += [(r * c, r * s, z) for c, s in zip(cos, sin)]
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris.append((0, 2 + j, 2 + i))  # bottom fan, facing down
        top0 = 2 + (len(rings) - 1) * segments
        tris.append((1, top0 + i, top0 + j))  # top fan, facing up
    for k in range(len(rings) - 1):
        a0 = 2 + k * segments
        b0 = a0 + segments
        for i in range(segments):
            j = (i + 1) % segments
            tris.append((a0 + i, a0 + j, b0 + j))
            tris.append((a0 + i, b0 + j, b0 + i))
    return TriangleMesh(_np.array(verts), _np.array(tris, dtype=_np.int32))


def figure_bust():
    profile = [
        (0, -35), (28, -34), (28, -28), (22, -26), (22, 20),
        (14, 26), (16, 32), (21, 40), (21, 52), (12, 60), (0, 64),
    ]
    return lathe(profile, segments=48)


def hook_cloth():
    plate = apply_transform(make_primitive(Cube(edge=1)), T(s=(40, 8, 60)))
    arm = apply_transform(
        make_primitive(Cylinder(radius=6, height=34, segments=32)),
        T(axis=(1, 0, 0), angle=np.pi / 2, t=(0, 19, -10)),
    )
    tip = apply_transform(
        make_primitive(Cylinder(radius=6, height=22, segments=32)), T(t=(0, 34, 0))
    )
    return union(union(plate, arm), tip)


def hook_headphone():
    plate = apply_transform(make_primitive(Cube(edge=1)), T(s=(36, 8, 44)))
    arm = apply_transform(
        make_primitive(Cube(edge=1)),
        T(s=(20, 36, 10), t=(0, 18, 8)),
    )
    lip = apply_transform(
        make_primitive(Cube(edge=1)), T(s=(20, 8, 16), t=(0, 32, 16))
    )
    return union(union(plate, arm), lip)


def pendant_animal():
    medallion = make_primitive(Cylinder(radius=15, height=6, segments=48))
    # ears point radially away from the tab
    ear_l = apply_transform(
        make_primitive(Pyramid(base_edge=7, height=9)),
        T(axis=(1, 0, 0), angle=-np.pi / 2, t=(-8, 14, 0)),
    )
    ear_r = apply_transform(
        make_primitive(Pyramid(base_edge=7, height=9)),
        T(axis=(1, 0, 0), angle=-np.pi / 2, t=(8, 14, 0)),
    )
    tab = apply_transform(make_primitive(Cube(edge=1)), T(s=(8, 14, 8), t=(0, -20, 0)))
    return union(union(union(medallion, ear_l), ear_r), tab)


def shelf_scan():
    return apply_transform(make_primitive(Cube(edge=1)), T(s=(200, 120, 18)))


def planter_scan():
    outer = make_primitive(Cylinder(radius=40, height=60, segments=64))
    inner = apply_transform(
        make_primitive(Cylinder(radius=36, height=58, segments=64)), T(t=(0, 0, 2))
    )
    return difference(outer, inner)


def desk_scan():
    table = apply_transform(make_primitive(Cube(edge=1)), T(s=(160, 100, 12), t=(0, 0, -6)))
    pot = apply_transform(planter_scan(), T(t=(30, 10, 29)))  # bottom sunk 1mm into the top
    return union(table, pot)


def hook_scan():
    return hook_cloth()


MODELS = [
    # id, title, license, tags, builder
    ("pot-classic", "Classic Round Planter Pot", "cc-by", "pot planter flower", pot_classic),
    ("pot-modern", "Modern Cube Planter Pot", "cc-by-sa", "pot planter square", pot_modern),
    ("pot-angular", "Angular Sculpted Planter Pot", "cc0", "pot planter faceted", pot_angular),
    ("pot-fancy", "Fancy Planter Pot (no derivatives)", "cc-by-nd", "pot planter fancy", pot_fancy_noderiv),
    ("figure-bust", "Garden Figure Bust", "cc-by", "figure sculpture bust statue", figure_bust),
    ("hook-cloth", "Sturdy Cloth Hook", "cc-by", "hook cloth coat wall", hook_cloth),
    ("hook-headphone", "Headphone Hook Desk Mount", "cc-by-sa", "hook headphone headset desk", hook_headphone),
    ("pendant-animal", "Animal Head Pendant", "cc-by", "pendant animal jewellery charm", pendant_animal),
]

ENV_SCANS = [
    ("shelf_scan", shelf_scan),
    ("planter_scan", planter_scan),
    ("desk_scan", desk_scan),
    ("hook_scan", hook_scan),
]

COLORS = {
    "pot-classic": (176, 105, 62),
    "pot-modern": (96, 125, 139),
    "pot-angular": (121, 85, 160),
    "pot-fancy": (190, 160, 60),
    "figure-bust": (120, 144, 90),
    "hook-cloth": (70, 130, 180),
    "hook-headphone": (60, 100, 90),
    "pendant-animal": (150, 80, 80),
}


def write_thumb(path: Path, entry_id: str) -> None:
    img = Image.new("RGB", (64, 64), COLORS[entry_id])
    draw = ImageDraw.Draw(img)
    draw.rectangle([4, 4, 59, 59], outline=(250, 250, 250))
    draw.text((8, 26), entry_id.split("-")[0][:7], fill=(250, 250, 250))
    img.save(path, format="PNG")


def scripts() -> dict:
    """The six scripted walkthrough sessions (node ids count from 1)."""
    w1p1 = [
        {"op": "search", "query": "pot"},
        {"op": "gather", "entry_id": "pot-classic"},
        {"op": "gather", "entry_id": "pot-modern"},
        {"op": "gather", "entry_id": "pot-angular"},
        {"op": "remove_gathered", "index": 1},
        {"op": "place", "gathered_index": 0, "transform": {"t": [0, 0, 40]}},
        {"op": "set_transform", "node": 1, "transform": {"t": [0, 0, 40], "s": [1.18, 1.18, 1.1]}},
        {"op": "export_stl", "node": 1, "file": "walkthrough1_path1.stl"},
    ]
    w1p2 = [
        {"op": "search", "query": "figure"},
        {"op": "gather", "entry_id": "figure-bust"},
        {"op": "place", "gathered_index": 0, "transform": {"t": [0, 0, 35]}},
        {"op": "place_primitive", "spec": {"kind": "cylinder", "radius": 14, "height": 40, "segments": 48},
         "transform": {"t": [0, 0, 90]}},
        {"op": "csg", "csg_op": "difference", "first": 1, "second": 2},
        {"op": "export_stl", "node": 3, "file": "walkthrough1_path2.stl"},
    ]
    w1p3 = [
        {"op": "import_env", "file": "../env/planter_scan.stl", "pose": {"t": [-60, 0, 30]}, "label": "existing planter"},
        {"op": "duplicate", "node": 1},
        {"op": "set_transform", "node": 2, "transform": {"t": [40, 0, 27], "s": [0.9, 0.9, 0.9]}},
        {"op": "export_stl", "node": 2, "file": "walkthrough1_path3_copy.stl"},
        {"op": "import_env", "file": "../env/desk_scan.stl", "pose": {}, "label": "desk with planter"},
        {"op": "place_primitive", "spec": {"kind": "cube", "edge": 95}, "transform": {"t": [30, 10, 48.0]}},
        {"op": "csg", "csg_op": "intersection", "first": 4, "second": 3},
        {"op": "export_stl", "node": 5, "file": "walkthrough1_path3_extract.stl"},
    ]
    w2p1 = [
        {"op": "search", "query": "hook"},
        {"op": "gather", "entry_id": "hook-cloth"},
        {"op": "gather", "entry_id": "hook-headphone"},
        {"op": "place", "gathered_index": 1, "transform": {"t": [0, 0, 30]}},
        {"op": "set_transform", "node": 1, "transform": {"t": [0, 0, 34], "s": [1.25, 1.25, 1.25]}},
        {"op": "export_stl", "node": 1, "file": "walkthrough2_path1.stl"},
    ]
    w2p2 = [
        {"op": "import_env", "file": "../env/shelf_scan.stl", "pose": {"t": [0, -70, -9]}, "label": "shelf"},
        {"op": "place_primitive", "spec": {"kind": "cylinder", "radius": 20, "height": 60, "segments": 64},
         "transform": {}},
        {"op": "csg", "csg_op": "difference", "first": 2, "second": 1},
        {"op": "search", "query": "pendant"},
        {"op": "gather", "entry_id": "pendant-animal"},
        {"op": "place", "gathered_index": 0, "transform": {"t": [0, 42, 9]}},
        {"op": "csg", "csg_op": "union", "first": 3, "second": 4},
        {"op": "export_stl", "node": 5, "file": "walkthrough2_path2.stl"},
        {"op": "export_gcode", "node": 5, "file": "walkthrough2_path2.gcode",
         "config": {"infill_density": 0.2}},
    ]
    w2p3 = [
        {"op": "import_env", "file": "../env/hook_scan.stl", "pose": {"t": [-50, 0, 30]}, "label": "existing hook"},
        {"op": "duplicate", "node": 1},
        {"op": "set_transform", "node": 2, "transform": {"t": [20, 0, 24], "s": [0.8, 0.8, 0.8]}},
        {"op": "export_stl", "node": 2, "file": "walkthrough2_path3.stl"},
    ]
    return {
        "walkthrough1_path1": w1p1,
        "walkthrough1_path2": w1p2,
        "walkthrough1_path3": w1p3,
        "walkthrough2_path1": w2p1,
        "walkthrough2_path2": w2p2,
        "walkthrough2_path3": w2p3,
    }


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "thumbs").mkdir(exist_ok=True)
    (FIXTURES / "env").mkdir(exist_ok=True)
    (FIXTURES / "scripts").mkdir(exist_ok=True)

    index = []
    for entry_id, title, license_id, tags, builder in MODELS:
        mesh = builder()
        assert is_watertight(mesh), f"{entry_id} not watertight"
        assert signed_volume(mesh) > 0, f"{entry_id} inverted"
        stl = write_stl(mesh, "binary")
        (FIXTURES / f"{entry_id}.stl").write_bytes(stl)
        write_thumb(FIXTURES / "thumbs" / f"{entry_id}.png", entry_id)
        index.append(
            {
                "id": entry_id,
                "title": title,
                "license": license_id,
                "tags": tags,
                "thumbnail": f"thumbs/{entry_id}.png",
                "files": [f"{entry_id}.stl"],
            }
        )
        print(f"{entry_id}: {mesh.triangle_count} tris, {signed_volume(mesh):.0f} mm^3")

    for name, builder in ENV_SCANS:
        mesh = builder()
        assert is_watertight(mesh), f"{name} not watertight"
        (FIXTURES / "env" / f"{name}.stl").write_bytes(write_stl(mesh, "binary"))
        print(f"env/{name}: {mesh.triangle_count} tris")

    (FIXTURES / "index.json").write_text(json.dumps(index, indent=2) + "\n")

    for name, ops in scripts().items():
        path = FIXTURES / "scripts" / f"{name}.remix.json"
        path.write_text(json.dumps(ops, indent=2) + "\n")
        print(f"script {name}: {len(ops)} ops")
    return 0


if __name__ == "__main__":
    sys.exit(main())
