"""HTTP facade over the remix pipeline.

Scenes live in memory behind per-scene locks (one serialized mutation
stream each); when a snapshot directory is configured every accepted
mutation also writes the scene file. Every error response carries a
stable machine-readable code.
"""
from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response, UploadFile, Form, File
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..csg import CsgError, CsgOp
from ..mesh import (
    MeshError,
    StlError,
    Transform,
    compute_bounds,
    is_watertight,
    load_stl,
    primitive_from_dict,
    signed_volume,
    write_stl,
)
from ..repo import (
    BackendUnreachable,
    MalformedResponse,
    RepoClient,
    RepoError,
    backend_from_env,
)
from ..scene import (
    NothingToUndo,
    Scene,
    SceneError,
    SceneNode,
    save_scene,
)
from ..slicer import SliceConfig, SliceError, slice_to_gcode
from .schemas import (
    BoundsModel,
    CreateSceneRequest,
    CsgRequest,
    CsgResponse,
    CsgStatsModel,
    EntryModel,
    ErrorModel,
    GatheredItemModel,
    GatherRequest,
    JobModel,
    NodeModel,
    NodeResponse,
    PlaceRequest,
    RemoveGatheredRequest,
    SearchPageModel,
    SearchRequest,
    SceneModel,
    TransformModel,
    TransformRequest,
    UndoResponse,
)

DEFAULT_LISTEN = "127.0.0.1:8787"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class SceneBox:
    __slots__ = ("scene", "lock", "accepted_mutations")

    def __init__(self, scene: Scene):
        self.scene = scene
        self.lock = threading.Lock()
        self.accepted_mutations = 0


class AppState:
    def __init__(self, repo: RepoClient | None = None, scene_dir: str | None = None):
        self.repo = repo or RepoClient(backend_from_env())
        self.scene_dir = Path(scene_dir) if scene_dir else None
        self.scenes: dict[str, SceneBox] = {}
        self.registry_lock = threading.Lock()

    def box(self, scene_id: str) -> SceneBox:
        with self.registry_lock:
            box = self.scenes.get(scene_id)
        if box is None:
            raise ApiError(404, "unknown_scene", f"no scene {scene_id!r}")
        return box

    def create_scene(self, scene_id: str | None = None) -> SceneBox:
        scene = Scene(scene_id)
        box = SceneBox(scene)
        with self.registry_lock:
            if scene.scene_id in self.scenes:
                raise ApiError(409, "scene_exists", f"scene {scene.scene_id!r} already exists")
            self.scenes[scene.scene_id] = box
        return box

    def snapshot(self, box: SceneBox) -> None:
        if self.scene_dir is None:
            return
        self.scene_dir.mkdir(parents=True, exist_ok=True)
        path = self.scene_dir / f"{box.scene.scene_id}.scene.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(save_scene(box.scene))
        tmp.replace(path)


def _entry_model(entry) -> EntryModel:
    return EntryModel(
        id=entry.id,
        title=entry.title,
        license=entry.license,
        remix_allowed=entry.remix_allowed,
        thumbnail_url=entry.thumbnail_url,
        files=list(entry.file_locators),
    )


def _job_model(job) -> JobModel:
    return JobModel(
        job_id=job.job_id,
        entry_id=job.entry_id,
        state=job.state,
        error=job.error,
        triangles=job.triangles,
        auto_simplified=job.auto_simplified,
        gathered_into=list(job.gathered_into),
    )


def _node_model(node: SceneNode) -> NodeModel:
    baked = node.baked_mesh()
    bounds = None
    if not baked.is_empty():
        box = compute_bounds(baked)
        bounds = BoundsModel(min=list(box.min), max=list(box.max))
    return NodeModel(
        id=node.id,
        kind=node.kind,
        source=node.source,
        transform=TransformModel.from_transform(node.transform),
        triangles=node.mesh.triangle_count,
        watertight=bool(not node.mesh.is_empty() and is_watertight(node.mesh)),
        volume=signed_volume(baked),
        bounds=bounds,
    )


def _scene_model(scene: Scene) -> SceneModel:
    return SceneModel(
        scene_id=scene.scene_id,
        nodes=[_node_model(n) for n in scene.nodes],
        gathered=[
            GatheredItemModel(
                index=i,
                entry_id=g.entry_id,
                title=g.title,
                triangles=g.mesh.triangle_count,
            )
            for i, g in enumerate(scene.gathered)
        ],
        undo_depth=len(scene.undo_stack),
        next_node_id=scene.next_node_id,
    )


def create_app(
    repo: RepoClient | None = None,
    scene_dir: str | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    state = AppState(repo=repo, scene_dir=scene_dir)
    app = FastAPI(title="remixd", version="0.1.0")
    app.state.remixd = state

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        body = ErrorModel(code=exc.code, message=exc.message, detail=exc.detail)
        return JSONResponse(status_code=exc.status, content=body.model_dump())

    def _translate(exc: Exception) -> ApiError:
        if isinstance(exc, NothingToUndo):
            return ApiError(409, "nothing_to_undo", str(exc))
        if isinstance(exc, CsgError):
            return ApiError(409, "csg_rejected", str(exc))
        if isinstance(exc, StlError):
            return ApiError(400, "bad_stl", str(exc))
        if isinstance(exc, SliceError):
            return ApiError(409, "unsliceable", str(exc))
        if isinstance(exc, SceneError):
            msg = str(exc)
            if "unknown node" in msg:
                return ApiError(404, "unknown_node", msg)
            if "out of range" in msg:
                return ApiError(404, "unknown_gathered_item", msg)
            if "environment" in msg:
                return ApiError(409, "environment_not_exportable", msg)
            return ApiError(400, "scene_error", msg)
        if isinstance(exc, (BackendUnreachable,)):
            return ApiError(502, "backend_unreachable", str(exc))
        if isinstance(exc, MalformedResponse):
            return ApiError(502, "backend_malformed", str(exc))
        if isinstance(exc, RepoError):
            msg = str(exc)
            if "unknown entry" in msg or "unknown job" in msg:
                return ApiError(404, "unknown_entry" if "entry" in msg else "unknown_job", msg)
            if "does not permit remixing" in msg:
                return ApiError(403, "license_filtered", msg)
            return ApiError(400, "repo_error", msg)
        if isinstance(exc, MeshError):
            return ApiError(400, "bad_geometry", str(exc))
        return ApiError(500, "internal_error", f"{type(exc).__name__}: {exc}")

    def guarded(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except ApiError:
                raise
            except Exception as exc:
                raise _translate(exc) from exc

        return run

    # -- repository -----------------------------------------------------

    @app.post("/api/search", response_model=SearchPageModel)
    def search(req: SearchRequest):
        if not req.query.strip():
            raise ApiError(400, "validation_error", "query must be non-empty")
        page = guarded(state.repo.search)(req.query, req.page)
        return SearchPageModel(
            query=page.query,
            page=page.page,
            entries=[_entry_model(e) for e in page.entries],
            total_available=page.total_available,
        )

    @app.post("/api/gather", response_model=JobModel)
    def gather(req: GatherRequest):
        entry = guarded(state.repo.entry)(req.entry_id)
        on_ready = None
        if req.scene_id is not None:
            box = state.box(req.scene_id)

            def on_ready(job, mesh, _box=box, _entry=entry):
                with _box.lock:
                    _box.scene.gather(_entry.id, _entry.title, mesh)
                    _box.accepted_mutations += 1
                    state.snapshot(_box)
                state.repo.note_gathered(job.job_id, _box.scene.scene_id)

        job = guarded(state.repo.enqueue_download)(entry, on_ready=on_ready)
        return _job_model(state.repo.poll_job(job.job_id))

    @app.get("/api/jobs/{job_id}", response_model=JobModel)
    def poll_job(job_id: str):
        return _job_model(guarded(state.repo.poll_job)(job_id))

    @app.get("/api/jobs/{job_id}/mesh.stl")
    def job_mesh(job_id: str):
        mesh = guarded(state.repo.job_mesh)(job_id)
        payload = write_stl(mesh, "binary")
        return Response(content=payload, media_type="application/octet-stream")

    @app.get("/api/thumbnails/{entry_id}")
    def thumbnail(entry_id: str):
        payload = guarded(state.repo.thumbnail)(entry_id)
        return Response(content=payload, media_type="image/png")

    # -- scenes -----------------------------------------------------------

    @app.post("/api/scenes", response_model=SceneModel)
    def create_scene(req: CreateSceneRequest | None = None):
        box = state.create_scene(req.scene_id if req else None)
        return _scene_model(box.scene)

    @app.get("/api/scenes/{scene_id}", response_model=SceneModel)
    def get_scene(scene_id: str):
        box = state.box(scene_id)
        with box.lock:
            return _scene_model(box.scene)

    @app.get("/api/scenes/{scene_id}/file")
    def scene_file(scene_id: str):
        box = state.box(scene_id)
        with box.lock:
            payload = save_scene(box.scene)
        return Response(content=payload, media_type="application/json")

    def _mutate(scene_id: str, fn):
        """Run one mutation under the scene lock; count it only if it
        succeeds, and snapshot afterwards."""
        box = state.box(scene_id)
        with box.lock:
            try:
                result = fn(box.scene)
            except ApiError:
                raise
            except Exception as exc:
                raise _translate(exc) from exc
            box.accepted_mutations += 1
            state.snapshot(box)
            return result

    @app.post("/api/scenes/{scene_id}/nodes", response_model=NodeResponse)
    def place(scene_id: str, req: PlaceRequest):
        transform = req.transform.to_transform()

        def apply(scene: Scene):
            if req.source.kind == "gathered":
                if req.source.index is None:
                    raise ApiError(400, "validation_error", "gathered source needs index")
                nid = scene.place_gathered(req.source.index, transform)
            elif req.source.kind == "primitive":
                if not req.source.spec:
                    raise ApiError(400, "validation_error", "primitive source needs spec")
                nid = scene.place_primitive(primitive_from_dict(req.source.spec), transform)
            else:
                raise ApiError(400, "validation_error", f"unknown source kind {req.source.kind!r}")
            return NodeResponse(
                node=_node_model(scene.node(nid)), scene=_scene_model(scene)
            )

        return _mutate(scene_id, apply)

    @app.post("/api/scenes/{scene_id}/gathered/remove", response_model=SceneModel)
    def remove_gathered(scene_id: str, req: RemoveGatheredRequest):
        def apply(scene: Scene):
            scene.remove_gathered(req.index)
            return _scene_model(scene)

        return _mutate(scene_id, apply)

    @app.patch("/api/scenes/{scene_id}/nodes/{node_id}/transform", response_model=NodeResponse)
    def set_transform(scene_id: str, node_id: int, req: TransformRequest):
        def apply(scene: Scene):
            scene.set_transform(node_id, req.transform.to_transform())
            return NodeResponse(
                node=_node_model(scene.node(node_id)), scene=_scene_model(scene)
            )

        return _mutate(scene_id, apply)

    @app.post("/api/scenes/{scene_id}/nodes/{node_id}/duplicate", response_model=NodeResponse)
    def duplicate(scene_id: str, node_id: int):
        def apply(scene: Scene):
            nid = scene.duplicate(node_id)
            return NodeResponse(
                node=_node_model(scene.node(nid)), scene=_scene_model(scene)
            )

        return _mutate(scene_id, apply)

    @app.post("/api/scenes/{scene_id}/csg", response_model=CsgResponse)
    def apply_csg(scene_id: str, req: CsgRequest):
        try:
            op = CsgOp(req.op.lower())
        except ValueError:
            raise ApiError(400, "validation_error", f"unknown op {req.op!r}") from None

        def apply(scene: Scene):
            nid, result = scene.apply_csg(op, req.first, req.second)
            return CsgResponse(
                node=_node_model(scene.node(nid)),
                stats=CsgStatsModel(
                    input_triangles=list(result.stats.input_triangles),
                    output_triangles=result.stats.output_triangles,
                    split_polygons=result.stats.split_polygons,
                    watertight=result.stats.watertight,
                ),
                scene=_scene_model(scene),
            )

        return _mutate(scene_id, apply)

    @app.post("/api/scenes/{scene_id}/undo", response_model=UndoResponse)
    def undo(scene_id: str):
        def apply(scene: Scene):
            reverted = scene.undo()
            return UndoResponse(reverted=reverted, scene=_scene_model(scene))

        return _mutate(scene_id, apply)

    @app.post("/api/scenes/{scene_id}/environment", response_model=NodeResponse)
    def import_environment(
        scene_id: str,
        file: UploadFile = File(...),
        pose: str = Form("{}"),
        label: str = Form("environment"),
    ):
        payload = file.file.read()
        try:
            pose_transform = Transform.from_dict(json.loads(pose))
        except (json.JSONDecodeError, MeshError) as exc:
            raise ApiError(400, "validation_error", f"bad pose: {exc}") from exc

        def apply(scene: Scene):
            nid, notes = scene.import_environment(payload, pose_transform, label)
            return NodeResponse(
                node=_node_model(scene.node(nid)),
                scene=_scene_model(scene),
                notes=notes,
            )

        return _mutate(scene_id, apply)

    @app.get("/api/scenes/{scene_id}/nodes/{node_id}/mesh.stl")
    def node_mesh(scene_id: str, node_id: int, frame: str = "local"):
        box = state.box(scene_id)
        with box.lock:
            node = guarded(box.scene.node)(node_id)
            if frame == "world":
                payload = guarded(box.scene.export_node_stl)(node_id)
            elif frame == "local":
                if node.mesh.is_empty():
                    raise ApiError(409, "empty_mesh", f"node {node_id} has no geometry")
                payload = write_stl(node.mesh, "binary")
            else:
                raise ApiError(400, "validation_error", f"unknown frame {frame!r}")
        return Response(
            content=payload,
            media_type="application/octet-stream",
            headers={"Content-Length": str(len(payload))},
        )

    @app.post("/api/scenes/{scene_id}/nodes/{node_id}/export/gcode")
    def export_gcode(scene_id: str, node_id: int, overrides: dict | None = None):
        box = state.box(scene_id)
        with box.lock:
            node = guarded(box.scene.node)(node_id)
            if node.kind == "environment":
                raise ApiError(
                    409, "environment_not_exportable",
                    f"node {node_id} is environment geometry",
                )
            baked = node.baked_mesh()
        try:
            config = SliceConfig.from_dict(overrides or {})
        except MeshError as exc:
            raise ApiError(400, "validation_error", str(exc)) from exc
        program = guarded(slice_to_gcode)(baked, config)
        return Response(
            content=program.text.encode("utf-8"),
            media_type="application/octet-stream",
            headers={"X-Remixd-Extruded-Mm": f"{program.total_extruded:.3f}"},
        )

    # -- standalone slicing (CLI convenience) ------------------------------

    @app.post("/api/slice")
    def slice_upload(file: UploadFile = File(...), config: str = Form("{}")):
        payload = file.file.read()
        try:
            overrides = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ApiError(400, "validation_error", f"bad config: {exc}") from exc
        mesh = guarded(load_stl)(payload)
        try:
            cfg = SliceConfig.from_dict(overrides)
        except MeshError as exc:
            raise ApiError(400, "validation_error", str(exc)) from exc
        program = guarded(slice_to_gcode)(mesh, cfg)
        return Response(
            content=program.text.encode("utf-8"),
            media_type="application/octet-stream",
            headers={"X-Remixd-Extruded-Mm": f"{program.total_extruded:.3f}"},
        )

    ui_path = ui_dir or os.environ.get("REMIXD_UI_DIR", "") or "frontend/dist"
    if ui_path and Path(ui_path).is_dir():
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app
