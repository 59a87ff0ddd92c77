"""Marlin-flavored G-code emission and parsing.

Dialect: G0/G1 moves, G28 home, G92 position set, M82 absolute E,
M104/M109 nozzle, M140/M190 bed, M84 motors off; absolute coordinates,
millimeters, LF line endings. The parser keeps every line verbatim, so
emit(parse(emit(x))) reproduces emit(x) byte for byte; unknown commands
survive untouched and are merely counted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..mesh import MeshError
from .config import SliceConfig

__all__ = ["GcodeError", "ToolpathProgram", "emit_gcode", "parse_gcode", "extrusion_per_mm"]

_KNOWN = {"G0", "G1", "G21", "G28", "G90", "G92", "M82", "M84", "M104", "M109", "M140", "M190"}


class GcodeError(MeshError):
    pass


@dataclass(frozen=True)
class ToolpathProgram:
    lines: tuple                      # raw lines, no trailing newline each
    total_extruded: float             # mm of filament pushed while moving
    filament_volume: float            # mm^3, from the filament cross-section
    command_count: int
    unknown_commands: tuple           # (line_number, raw) pairs
    e_violations: int                 # E decreases that are not retractions
    max_xyz: tuple
    min_xyz: tuple

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def extrusion_per_mm(config: SliceConfig) -> float:
    """Absolute-E increment per mm of extruding XY travel."""
    r = config.filament_diameter / 2.0
    return config.layer_height * config.extrusion_width / (math.pi * r * r)


def _fmt(value: float, decimals: int) -> str:
    s = f"{value:.{decimals}f}"
    return s


def emit_gcode(layers: list, config: SliceConfig) -> ToolpathProgram:
    """Serialize toolpaths into a printable program.

    The model is shifted in XY so its footprint centers on the bed; a
    path landing outside the build volume is an error. Travels longer
    than the retract threshold get a retract/unretract pair.
    """
    ex, ey, ez = config.build_volume
    points = []
    for layer in layers:
        for path in layer.perimeters:
            points.append(path[:-1])
        for seg in layer.infill + layer.support:
            points.append(np.asarray(seg, dtype=float))
    if points:
        allpts = np.vstack(points)
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
        cx, cy = (lo + hi) / 2.0
        ox = round(ex / 2.0 - cx, 3)
        oy = round(ey / 2.0 - cy, 3)
    else:
        ox = oy = 0.0

    lines = [
        "; remixd toolpath",
        f"; layer_height = {config.layer_height}",
        f"; extrusion_width = {config.extrusion_width}",
        f"; filament_diameter = {config.filament_diameter}",
        f"; perimeter_count = {config.perimeter_count}",
        f"; infill_density = {config.infill_density}",
        f"; support_enabled = {config.support_enabled}",
        f"; overhang_threshold_deg = {config.overhang_threshold_deg}",
        f"; xy_offset = {ox} {oy}",
        "G21",
        "G90",
        "M82",
        f"M140 S{_fmt(config.bed_temp, 0)}",
        f"M190 S{_fmt(config.bed_temp, 0)}",
        f"M104 S{_fmt(config.nozzle_temp, 0)}",
        f"M109 S{_fmt(config.nozzle_temp, 0)}",
        "G28",
        "G92 E0",
    ]

    e_per_mm = extrusion_per_mm(config)
    e = 0.0
    pos = None  # current XY
    feed_print = _fmt(config.print_speed, 0)
    feed_travel = _fmt(config.travel_speed, 0)

    def check(x, y):
        if not (0.0 <= x <= ex and 0.0 <= y <= ey):
            raise GcodeError(
                f"toolpath point ({x:.2f}, {y:.2f}) outside build volume "
                f"{ex}x{ey} mm"
            )

    def travel_to(x, y):
        nonlocal pos, e
        check(x, y)
        if pos is not None:
            dist = math.hypot(x - pos[0], y - pos[1])
            if dist > config.retract_travel_min and config.retract_length > 0:
                e -= config.retract_length
                lines.append(f"G1 E{_fmt(e, 6)} F1800")
                lines.append(f"G0 X{_fmt(x, 3)} Y{_fmt(y, 3)} F{feed_travel}")
                e += config.retract_length
                lines.append(f"G1 E{_fmt(e, 6)} F1800")
                pos = (x, y)
                return
        lines.append(f"G0 X{_fmt(x, 3)} Y{_fmt(y, 3)} F{feed_travel}")
        pos = (x, y)

    def extrude_to(x, y):
        nonlocal pos, e
        check(x, y)
        dist = math.hypot(x - pos[0], y - pos[1])
        e += dist * e_per_mm
        lines.append(f"G1 X{_fmt(x, 3)} Y{_fmt(y, 3)} E{_fmt(e, 6)} F{feed_print}")
        pos = (x, y)

    for layer in layers:
        if layer.z > ez:
            raise GcodeError(f"layer z {layer.z:.2f} above build volume height {ez}")
        lines.append(f"G0 Z{_fmt(layer.z, 3)} F{feed_travel}")
        for path in layer.perimeters:
            pts = [(float(p[0]) + ox, float(p[1]) + oy) for p in path]
            travel_to(*pts[0])
            for p in pts[1:]:
                extrude_to(*p)
        for seg in layer.infill + layer.support:
            (x0, y0), (x1, y1) = seg
            travel_to(x0 + ox, y0 + oy)
            extrude_to(x1 + ox, y1 + oy)

    lines += [
        "M104 S0",
        "M140 S0",
        "G28 X Y",
        "M84",
    ]
    text = "\n".join(lines) + "\n"
    program = parse_gcode(text)
    if program.unknown_commands:
        raise GcodeError(f"emitted unknown commands: {program.unknown_commands[:3]}")
    return program


def parse_gcode(text: str) -> ToolpathProgram:
    """Parse a program in the emitted dialect, keeping lines verbatim.

    Unknown commands are preserved and counted; malformed coordinate
    words fail with their line number.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    x = y = z = 0.0
    e = 0.0
    seen_min = [math.inf] * 3
    seen_max = [-math.inf] * 3
    total_extruded = 0.0
    command_count = 0
    unknown = []
    e_violations = 0

    for lineno, raw in enumerate(lines, start=1):
        body = raw.split(";", 1)[0].strip()
        if not body:
            continue
        tokens = body.split()
        cmd = tokens[0].upper()
        command_count += 1
        if cmd not in _KNOWN:
            unknown.append((lineno, raw))
            continue
        words = {}
        for tok in tokens[1:]:
            letter = tok[0].upper()
            rest = tok[1:]
            if letter not in "XYZEFSPT":
                raise GcodeError(f"line {lineno}: unexpected word {tok!r}")
            if rest == "" and cmd == "G28":
                words[letter] = None  # bare axis letters on home
                continue
            try:
                words[letter] = float(rest)
            except ValueError:
                raise GcodeError(f"line {lineno}: bad coordinate word {tok!r}") from None

        if cmd in ("G0", "G1"):
            nx = words.get("X", x)
            ny = words.get("Y", y)
            nz = words.get("Z", z)
            moved = (nx != x) or (ny != y)
            if "E" in words:
                ne = words["E"]
                delta = ne - e
                if delta < 0 and moved:
                    e_violations += 1  # extrusion moving backwards mid-move
                elif delta > 0 and moved:
                    total_extruded += delta
                e = ne
            x, y, z = nx, ny, nz
            for i, v in enumerate((x, y, z)):
                seen_min[i] = min(seen_min[i], v)
                seen_max[i] = max(seen_max[i], v)
        elif cmd == "G92":
            x = words.get("X", x)
            y = words.get("Y", y)
            z = words.get("Z", z)
            e = words.get("E", e)
        elif cmd == "G28":
            axes = [a for a in ("X", "Y", "Z") if a in words]
            if not axes:
                x = y = z = 0.0
            else:
                if "X" in words:
                    x = 0.0
                if "Y" in words:
                    y = 0.0
                if "Z" in words:
                    z = 0.0

    if not math.isfinite(seen_min[0]):
        seen_min = [0.0, 0.0, 0.0]
        seen_max = [0.0, 0.0, 0.0]

    filament_area = None
    for raw in lines:
        if raw.startswith("; filament_diameter = "):
            try:
                d = float(raw.rsplit("=", 1)[1])
                filament_area = math.pi * (d / 2.0) ** 2
            except ValueError:
                pass
            break
    if filament_area is None:
        filament_area = math.pi * (1.75 / 2.0) ** 2

    return ToolpathProgram(
        lines=tuple(lines),
        total_extruded=total_extruded,
        filament_volume=total_extruded * filament_area,
        command_count=command_count,
        unknown_commands=tuple(unknown),
        e_violations=e_violations,
        max_xyz=tuple(seen_max),
        min_xyz=tuple(seen_min),
    )
