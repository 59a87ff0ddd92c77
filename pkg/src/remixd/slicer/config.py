"""Print parameters. Lengths mm, speeds mm/min, temperatures Celsius."""
from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..mesh import MeshError


@dataclass(frozen=True)
class SliceConfig:
    layer_height: float = 0.2
    extrusion_width: float = 0.4
    filament_diameter: float = 1.75
    perimeter_count: int = 2
    infill_density: float = 0.2
    support_enabled: bool = True
    overhang_threshold_deg: float = 45.0
    print_speed: float = 3000.0
    travel_speed: float = 7200.0
    nozzle_temp: float = 205.0
    bed_temp: float = 60.0
    retract_length: float = 1.0
    retract_travel_min: float = 2.0
    support_density: float = 0.15
    support_clearance: float = 0.3
    build_volume: tuple = field(default=(220.0, 220.0, 250.0))

    def __post_init__(self):
        if self.layer_height <= 0:
            raise MeshError("layer_height must be > 0")
        if self.extrusion_width < self.layer_height:
            raise MeshError("extrusion_width must be >= layer_height")
        if not (0.0 <= self.infill_density <= 1.0):
            raise MeshError("infill_density must be within [0, 1]")
        if self.perimeter_count < 0:
            raise MeshError("perimeter_count must be >= 0")
        if self.filament_diameter <= 0:
            raise MeshError("filament_diameter must be > 0")

    def replace(self, **overrides) -> "SliceConfig":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(overrides)
        return SliceConfig(**current)

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return d

    @staticmethod
    def from_dict(d: dict) -> "SliceConfig":
        known = {f.name for f in fields(SliceConfig)}
        unknown = set(d) - known
        if unknown:
            raise MeshError(f"unknown slice config keys: {sorted(unknown)}")
        kwargs = dict(d)
        if "build_volume" in kwargs:
            kwargs["build_volume"] = tuple(kwargs["build_volume"])
        return SliceConfig(**kwargs)
