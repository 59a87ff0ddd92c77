"""Remix session state: gathered models, placed nodes, boolean edits, undo.

One Scene is a single-writer value: callers serialize mutations (the
service keeps a lock per scene). Every mutating operation pushes exactly
one undo record, and undo restores the previous state exactly; node ids
are never reused, so references held by clients stay unambiguous after
an undo (the id counter is deliberately not part of restored state).

Node meshes are snapped to the float32 grid when they enter the scene:
the scene file embeds geometry as binary STL, and save/load must round-
trip exactly.
"""
from __future__ import annotations

import base64
import json
import uuid
import warnings
from dataclasses import dataclass

import numpy as np

from .csg import CsgOp, CsgResult, csg
from .mesh import (
    MeshError,
    PrimitiveKind,
    Transform,
    TriangleMesh,
    apply_transform,
    load_stl,
    make_primitive,
    primitive_to_dict,
    repair_mesh,
    write_stl,
)

__all__ = [
    "Scene",
    "SceneNode",
    "GatherItem",
    "SceneError",
    "NothingToUndo",
    "scene_equal",
    "snapshot",
    "quantize_f32",
    "save_scene",
    "load_scene",
]

SCENE_FILE_VERSION = 1


class SceneError(MeshError):
    pass


class NothingToUndo(SceneError):
    pass


def quantize_f32(mesh: TriangleMesh) -> TriangleMesh:
    """Normalize a mesh to its scene-file form.

    Scene files embed geometry as binary STL, which quantizes coordinates
    to float32 and drops facets that become degenerate on that grid. Doing
    the same roundtrip at insertion makes save/load an exact identity on
    every mesh the scene holds.
    """
    if mesh.is_empty():
        return TriangleMesh.empty()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        normalized = load_stl(write_stl(mesh, "binary"))
    return normalized


@dataclass
class SceneNode:
    id: int
    kind: str  # "model" | "environment"
    source: dict
    mesh: TriangleMesh
    transform: Transform

    def baked_mesh(self) -> TriangleMesh:
        return apply_transform(self.mesh, self.transform)


@dataclass
class GatherItem:
    entry_id: str
    title: str
    mesh: TriangleMesh


class Scene:
    def __init__(self, scene_id: str | None = None):
        self.scene_id = scene_id or uuid.uuid4().hex[:12]
        self.nodes: list[SceneNode] = []
        self.gathered: list[GatherItem] = []
        self.undo_stack: list[dict] = []
        self.next_node_id = 1

    # -- lookups -----------------------------------------------------------

    def node(self, node_id: int) -> SceneNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise SceneError(f"unknown node {node_id}")

    def _node_index(self, node_id: int) -> int:
        for i, n in enumerate(self.nodes):
            if n.id == node_id:
                return i
        raise SceneError(f"unknown node {node_id}")

    def _new_id(self) -> int:
        nid = self.next_node_id
        self.next_node_id += 1
        return nid

    # -- gather list (the comparison carousel) ------------------------------

    def gather(self, entry_id: str, title: str, mesh: TriangleMesh) -> int:
        """Append a downloaded model to the carousel. Gathering the same
        entry twice keeps two independent items."""
        self.gathered.append(GatherItem(entry_id, title, quantize_f32(mesh)))
        self.undo_stack.append({"kind": "gather"})
        return len(self.gathered) - 1

    def remove_gathered(self, index: int) -> None:
        if not (0 <= index < len(self.gathered)):
            raise SceneError(f"gathered index {index} out of range")
        item = self.gathered.pop(index)
        self.undo_stack.append(
            {"kind": "remove_gathered", "index": index, "item": item}
        )

    # -- placement and transforms -------------------------------------------

    def place_gathered(self, index: int, transform: Transform) -> int:
        if not (0 <= index < len(self.gathered)):
            raise SceneError(f"gathered index {index} out of range")
        item = self.gathered[index]
        nid = self._new_id()
        self.nodes.append(
            SceneNode(
                id=nid,
                kind="model",
                source={"type": "repository", "entry_id": item.entry_id},
                mesh=item.mesh,
                transform=transform,
            )
        )
        self.undo_stack.append({"kind": "place", "node_id": nid})
        return nid

    def place_primitive(self, spec: PrimitiveKind, transform: Transform) -> int:
        mesh = quantize_f32(make_primitive(spec))
        nid = self._new_id()
        self.nodes.append(
            SceneNode(
                id=nid,
                kind="model",
                source={"type": "primitive", "spec": primitive_to_dict(spec)},
                mesh=mesh,
                transform=transform,
            )
        )
        self.undo_stack.append({"kind": "place", "node_id": nid})
        return nid

    def set_transform(self, node_id: int, transform: Transform) -> None:
        node = self.node(node_id)
        prior = node.transform
        node.transform = transform
        # a no-op update still records, keeping undo depth predictable
        self.undo_stack.append(
            {"kind": "set_transform", "node_id": node_id, "prior": prior}
        )

    def duplicate(self, node_id: int) -> int:
        """Copy a node. Copies are always printable candidates, even when
        the source is environment geometry (real-world copy-and-paste)."""
        src = self.node(node_id)
        nid = self._new_id()
        self.nodes.append(
            SceneNode(
                id=nid,
                kind="model",
                source={"type": "duplicate", "parent": src.id},
                mesh=src.mesh,
                transform=src.transform,
            )
        )
        self.undo_stack.append({"kind": "duplicate", "node_id": nid})
        return nid

    # -- boolean remixing ----------------------------------------------------

    def apply_csg(self, op: CsgOp, first_id: int, second_id: int) -> tuple[int, CsgResult]:
        """Combine two nodes; for difference the first selection is the
        minuend. Model operands are consumed, environment operands stay.
        On error the scene is untouched."""
        if first_id == second_id:
            raise SceneError("boolean needs two distinct nodes")
        a = self.node(first_id)
        b = self.node(second_id)
        result = csg(op, a.baked_mesh(), b.baked_mesh())

        removed = []
        for node in (a, b):
            if node.kind == "model":
                idx = self._node_index(node.id)
                removed.append((idx, self.nodes.pop(idx)))
        nid = self._new_id()
        self.nodes.append(
            SceneNode(
                id=nid,
                kind="model",
                source={"type": "csg", "op": op.value, "parents": [a.id, b.id]},
                mesh=quantize_f32(result.mesh),
                transform=Transform.identity(),
            )
        )
        self.undo_stack.append(
            {"kind": "csg", "result_id": nid, "removed": removed}
        )
        return nid, result

    # -- environment ---------------------------------------------------------

    def import_environment(
        self, stl_payload: bytes, pose: Transform, label: str
    ) -> tuple[int, list]:
        """Ingest a scanned mesh with its measured placement pose. The node
        is never exportable; a non-watertight scan is accepted with a
        warning and only blocks boolean use until repaired."""
        notes: list = []
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            mesh = load_stl(stl_payload)
        notes.extend(str(w.message) for w in caught)
        repaired = repair_mesh(mesh, orient="outward")
        if repaired.boundary_edges or repaired.nonmanifold_edges:
            notes.append(
                f"scan is not watertight ({repaired.boundary_edges} boundary, "
                f"{repaired.nonmanifold_edges} non-manifold edges); boolean "
                "operations against it will be rejected"
            )
        nid = self._new_id()
        self.nodes.append(
            SceneNode(
                id=nid,
                kind="environment",
                source={"type": "environment", "label": label},
                mesh=quantize_f32(repaired.mesh),
                transform=pose,
            )
        )
        self.undo_stack.append({"kind": "import_environment", "node_id": nid})
        return nid, notes

    # -- undo ------------------------------------------------------------------

    def undo(self) -> str:
        """Revert the most recent mutation. Returns the reverted kind."""
        if not self.undo_stack:
            raise NothingToUndo("nothing to undo")
        record = self.undo_stack.pop()
        kind = record["kind"]
        if kind == "gather":
            self.gathered.pop()
        elif kind == "remove_gathered":
            self.gathered.insert(record["index"], record["item"])
        elif kind in ("place", "duplicate", "import_environment"):
            self.nodes.pop(self._node_index(record["node_id"]))
        elif kind == "set_transform":
            self.node(record["node_id"]).transform = record["prior"]
        elif kind == "csg":
            self.nodes.pop(self._node_index(record["result_id"]))
            # indices were recorded against the shrinking list, so the
            # removals must be unwound last-first
            for idx, node in reversed(record["removed"]):
                self.nodes.insert(idx, node)
        else:  # pragma: no cover - records are created by this class only
            raise SceneError(f"corrupt undo record kind {kind!r}")
        return kind

    # -- export ------------------------------------------------------------------

    def export_node_stl(self, node_id: int) -> bytes:
        node = self.node(node_id)
        if node.kind == "environment":
            raise SceneError(
                f"node {node_id} is environment geometry and cannot be exported"
            )
        baked = node.baked_mesh()
        if baked.is_empty():
            raise SceneError(f"node {node_id} has an empty mesh")
        return write_stl(baked, "binary")


# -- equality (tests and undo verification) -----------------------------------


def _mesh_equal(a: TriangleMesh, b: TriangleMesh) -> bool:
    # corner-wise: STL embedding rebuilds the vertex array in first-use
    # order, which must not count as a difference
    if a.triangles.shape != b.triangles.shape:
        return False
    return np.array_equal(a.corners(), b.corners())


def _transform_equal(a: Transform, b: Transform, tol: float = 1e-9) -> bool:
    return (
        np.allclose(a.translation, b.translation, atol=tol, rtol=0)
        and np.allclose(a.rotation, b.rotation, atol=tol, rtol=0)
        and np.allclose(a.scale, b.scale, atol=tol, rtol=0)
    )


def _node_equal(a: SceneNode, b: SceneNode) -> bool:
    return (
        a.id == b.id
        and a.kind == b.kind
        and a.source == b.source
        and _transform_equal(a.transform, b.transform)
        and _mesh_equal(a.mesh, b.mesh)
    )


def _record_equal(a: dict, b: dict) -> bool:
    if a.keys() != b.keys() or a.get("kind") != b.get("kind"):
        return False
    for key in a:
        va, vb = a[key], b[key]
        if key == "item":
            if not (
                va.entry_id == vb.entry_id
                and va.title == vb.title
                and _mesh_equal(va.mesh, vb.mesh)
            ):
                return False
        elif key == "prior":
            if not _transform_equal(va, vb):
                return False
        elif key == "removed":
            if len(va) != len(vb):
                return False
            for (ia, na), (ib, nb) in zip(va, vb):
                if ia != ib or not _node_equal(na, nb):
                    return False
        elif va != vb:
            return False
    return True


def scene_equal(a: Scene, b: Scene, include_undo: bool = True) -> bool:
    """Deep equality of scene content. The node id counter is excluded:
    ids are never reused, so it legitimately advances across an
    operation/undo pair."""
    if a.scene_id != b.scene_id:
        return False
    if len(a.nodes) != len(b.nodes) or len(a.gathered) != len(b.gathered):
        return False
    for na, nb in zip(a.nodes, b.nodes):
        if not _node_equal(na, nb):
            return False
    for ga, gb in zip(a.gathered, b.gathered):
        if not (
            ga.entry_id == gb.entry_id
            and ga.title == gb.title
            and _mesh_equal(ga.mesh, gb.mesh)
        ):
            return False
    if include_undo:
        if len(a.undo_stack) != len(b.undo_stack):
            return False
        for ra, rb in zip(a.undo_stack, b.undo_stack):
            if not _record_equal(ra, rb):
                return False
    return True


def snapshot(scene: Scene) -> Scene:
    """Independent deep copy (used by tests as the undo oracle)."""
    return load_scene(save_scene(scene))


# -- persistence ----------------------------------------------------------------


def _mesh_to_b64(mesh: TriangleMesh) -> str:
    if mesh.is_empty():
        return ""
    return base64.b64encode(write_stl(mesh, "binary")).decode("ascii")


def _mesh_from_b64(blob: str) -> TriangleMesh:
    if not blob:
        return TriangleMesh.empty()
    return load_stl(base64.b64decode(blob.encode("ascii")))


def _node_to_dict(node: SceneNode) -> dict:
    return {
        "id": node.id,
        "kind": node.kind,
        "source": node.source,
        "transform": node.transform.to_dict(),
        "mesh_stl_b64": _mesh_to_b64(node.mesh),
    }


def _node_from_dict(d: dict) -> SceneNode:
    return SceneNode(
        id=int(d["id"]),
        kind=str(d["kind"]),
        source=dict(d["source"]),
        mesh=_mesh_from_b64(d["mesh_stl_b64"]),
        transform=Transform.from_dict(d["transform"]),
    )


def _record_to_dict(record: dict) -> dict:
    kind = record["kind"]
    out = {"kind": kind}
    if kind == "remove_gathered":
        item = record["item"]
        out["index"] = record["index"]
        out["item"] = {
            "entry_id": item.entry_id,
            "title": item.title,
            "mesh_stl_b64": _mesh_to_b64(item.mesh),
        }
    elif kind in ("place", "duplicate", "import_environment"):
        out["node_id"] = record["node_id"]
    elif kind == "set_transform":
        out["node_id"] = record["node_id"]
        out["prior"] = record["prior"].to_dict()
    elif kind == "csg":
        out["result_id"] = record["result_id"]
        out["removed"] = [
            {"index": idx, "node": _node_to_dict(node)}
            for idx, node in record["removed"]
        ]
    return out


def _record_from_dict(d: dict) -> dict:
    kind = d["kind"]
    record = {"kind": kind}
    if kind == "remove_gathered":
        item = d["item"]
        record["index"] = int(d["index"])
        record["item"] = GatherItem(
            entry_id=item["entry_id"],
            title=item["title"],
            mesh=_mesh_from_b64(item["mesh_stl_b64"]),
        )
    elif kind in ("place", "duplicate", "import_environment"):
        record["node_id"] = int(d["node_id"])
    elif kind == "set_transform":
        record["node_id"] = int(d["node_id"])
        record["prior"] = Transform.from_dict(d["prior"])
    elif kind == "csg":
        record["result_id"] = int(d["result_id"])
        record["removed"] = [
            (int(r["index"]), _node_from_dict(r["node"])) for r in d["removed"]
        ]
    return record


def save_scene(scene: Scene) -> bytes:
    doc = {
        "version": SCENE_FILE_VERSION,
        "scene_id": scene.scene_id,
        "next_node_id": scene.next_node_id,
        "nodes": [_node_to_dict(n) for n in scene.nodes],
        "gathered": [
            {
                "entry_id": g.entry_id,
                "title": g.title,
                "mesh_stl_b64": _mesh_to_b64(g.mesh),
            }
            for g in scene.gathered
        ],
        "undo": [_record_to_dict(r) for r in scene.undo_stack],
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def load_scene(payload: bytes) -> Scene:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SceneError(f"corrupt scene payload: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise SceneError("corrupt scene payload: missing version")
    if doc["version"] != SCENE_FILE_VERSION:
        raise SceneError(
            f"scene file version {doc['version']} unsupported "
            f"(expected {SCENE_FILE_VERSION})"
        )
    try:
        scene = Scene(scene_id=doc["scene_id"])
        scene.next_node_id = int(doc["next_node_id"])
        scene.nodes = [_node_from_dict(n) for n in doc["nodes"]]
        scene.gathered = [
            GatherItem(
                entry_id=g["entry_id"],
                title=g["title"],
                mesh=_mesh_from_b64(g["mesh_stl_b64"]),
            )
            for g in doc["gathered"]
        ]
        scene.undo_stack = [_record_from_dict(r) for r in doc["undo"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"corrupt scene payload: {exc}") from exc
    return scene
