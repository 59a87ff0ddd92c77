"""Request/response bodies. Field names mirror the scene-file schema, so
clients see one vocabulary over both transports."""
from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..mesh import Transform


class TransformModel(BaseModel):
    t: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    q: list[float] = Field(default=[1.0, 0.0, 0.0, 0.0], min_length=4, max_length=4)
    s: list[float] = Field(default=[1.0, 1.0, 1.0], min_length=3, max_length=3)

    @field_validator("s")
    @classmethod
    def _positive_scale(cls, v):
        if any(c <= 0 for c in v):
            raise ValueError("scale factors must be > 0")
        return v

    def to_transform(self) -> Transform:
        return Transform.from_dict({"t": self.t, "q": self.q, "s": self.s})

    @staticmethod
    def from_transform(t: Transform) -> "TransformModel":
        return TransformModel(**t.to_dict())


class EntryModel(BaseModel):
    id: str
    title: str
    license: str
    remix_allowed: bool
    thumbnail_url: str = ""
    files: list[str] = []


class SearchRequest(BaseModel):
    query: str
    page: int = 0


class SearchPageModel(BaseModel):
    query: str
    page: int
    entries: list[EntryModel]
    total_available: int


class GatherRequest(BaseModel):
    entry_id: str
    scene_id: str | None = None


class JobModel(BaseModel):
    job_id: str
    entry_id: str
    state: str
    error: str = ""
    triangles: int = 0
    auto_simplified: bool = False
    gathered_into: list[str] = []


class BoundsModel(BaseModel):
    min: list[float]
    max: list[float]


class NodeModel(BaseModel):
    id: int
    kind: str
    source: dict
    transform: TransformModel
    triangles: int
    watertight: bool
    volume: float
    bounds: BoundsModel | None = None


class GatheredItemModel(BaseModel):
    index: int
    entry_id: str
    title: str
    triangles: int


class SceneModel(BaseModel):
    scene_id: str
    nodes: list[NodeModel]
    gathered: list[GatheredItemModel]
    undo_depth: int
    next_node_id: int


class CreateSceneRequest(BaseModel):
    scene_id: str | None = None


class PlaceSource(BaseModel):
    kind: str  # "gathered" | "primitive"
    index: int | None = None
    spec: dict | None = None


class PlaceRequest(BaseModel):
    source: PlaceSource
    transform: TransformModel = TransformModel()


class TransformRequest(BaseModel):
    transform: TransformModel


class CsgRequest(BaseModel):
    op: str  # union | difference | intersection
    first: int
    second: int


class CsgStatsModel(BaseModel):
    input_triangles: list[int]
    output_triangles: int
    split_polygons: int
    watertight: bool


class NodeResponse(BaseModel):
    node: NodeModel
    scene: SceneModel
    notes: list[str] = []


class CsgResponse(BaseModel):
    node: NodeModel
    stats: CsgStatsModel
    scene: SceneModel


class UndoResponse(BaseModel):
    reverted: str
    scene: SceneModel


class RemoveGatheredRequest(BaseModel):
    index: int


class ErrorModel(BaseModel):
    code: str
    message: str
    detail: dict | None = None
