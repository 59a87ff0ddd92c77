"""Headless driver.

Every subcommand speaks to the HTTP API: against REMIXD_SERVER when set,
otherwise against an in-process application instance (same code path,
no socket). That keeps exactly one behavior for UI, scripts, and tests.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import httpx

from .service import DEFAULT_LISTEN, create_app

_USAGE_EXIT = 2
_DOMAIN_EXIT = 1


class CliError(RuntimeError):
    pass


class ApiClient:
    """httpx wrapper that talks to a live server or an in-process app."""

    def __init__(self, server: str | None = None):
        server = server if server is not None else os.environ.get("REMIXD_SERVER", "")
        if server:
            base = server if server.startswith("http") else f"http://{server}"
            self._client = httpx.Client(base_url=base, timeout=60.0)
        else:
            # in-process: same HTTP surface without a socket
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DeprecationWarning)
                from fastapi.testclient import TestClient
            self._client = TestClient(create_app())

    def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        response = self._client.request(method, path, **kwargs)
        if response.status_code >= 400:
            try:
                payload = response.json()
                raise CliError(f"{payload.get('code', response.status_code)}: {payload.get('message', '')}")
            except (ValueError, KeyError):
                raise CliError(f"HTTP {response.status_code}: {response.text[:200]}") from None
        return response

    def get(self, path: str, **kw) -> httpx.Response:
        return self.request("GET", path, **kw)

    def post(self, path: str, **kw) -> httpx.Response:
        return self.request("POST", path, **kw)

    def patch(self, path: str, **kw) -> httpx.Response:
        return self.request("PATCH", path, **kw)


def _wait_job(client: ApiClient, job_id: str, scene_id: str | None, timeout: float = 60.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        if job["state"] == "failed":
            raise CliError(f"download failed: {job['error']}")
        if job["state"] == "ready" and (
            scene_id is None or scene_id in job["gathered_into"]
        ):
            return job
        time.sleep(0.02)
    raise CliError(f"job {job_id} did not become ready in {timeout}s")


def cmd_search(client: ApiClient, args) -> int:
    page = client.post(
        "/api/search", json={"query": args.query, "page": args.page}
    ).json()
    entries = page["entries"]
    if not entries:
        print(f"no remixable results for {args.query!r}")
        return 0
    width = max(len(e["id"]) for e in entries)
    print(f"{'ID'.ljust(width)}  {'LICENSE'.ljust(12)}  TITLE")
    for e in entries:
        print(f"{e['id'].ljust(width)}  {e['license'].ljust(12)}  {e['title']}")
    print(f"({len(entries)} of {page['total_available']} remixable results)")
    return 0


def cmd_fetch(client: ApiClient, args) -> int:
    job = client.post("/api/gather", json={"entry_id": args.entry_id}).json()
    job = _wait_job(client, job["job_id"], None)
    payload = client.get(f"/api/jobs/{job['job_id']}/mesh.stl").content
    out = Path(args.out or f"{args.entry_id}.stl")
    out.write_bytes(payload)
    note = " (auto-simplified)" if job["auto_simplified"] else ""
    print(f"{args.entry_id}: {job['triangles']} triangles{note} -> {out}")
    return 0


def _slice_config_from_args(args) -> dict:
    overrides = {}
    if args.layer_height is not None:
        overrides["layer_height"] = args.layer_height
    if args.extrusion_width is not None:
        overrides["extrusion_width"] = args.extrusion_width
    if args.infill is not None:
        overrides["infill_density"] = args.infill
    if args.perimeters is not None:
        overrides["perimeter_count"] = args.perimeters
    if args.no_supports:
        overrides["support_enabled"] = False
    return overrides


def cmd_slice(client: ApiClient, args) -> int:
    path = Path(args.stl)
    if not path.is_file():
        raise CliError(f"no such file: {path}")
    overrides = _slice_config_from_args(args)
    response = client.post(
        "/api/slice",
        files={"file": (path.name, path.read_bytes(), "application/octet-stream")},
        data={"config": json.dumps(overrides)},
    )
    text = response.content.decode("utf-8")
    out = Path(args.out or path.with_suffix(".gcode").name)
    out.write_text(text)
    layers = sum(1 for line in text.splitlines() if line.startswith("G0 Z"))
    extruded = response.headers.get("X-Remixd-Extruded-Mm", "?")
    print(f"{path.name}: {layers} layers, {extruded} mm filament -> {out}")
    return 0


def _replay_op(client: ApiClient, scene_id: str, op: dict, script_dir: Path, out_dir: Path) -> dict:
    kind = op.get("op")
    result: dict = {"op": kind}
    if kind == "search":
        page = client.post(
            "/api/search", json={"query": op["query"], "page": op.get("page", 0)}
        ).json()
        result["results"] = [e["id"] for e in page["entries"]]
    elif kind == "gather":
        job = client.post(
            "/api/gather", json={"entry_id": op["entry_id"], "scene_id": scene_id}
        ).json()
        job = _wait_job(client, job["job_id"], scene_id)
        result["triangles"] = job["triangles"]
    elif kind == "remove_gathered":
        client.post(
            f"/api/scenes/{scene_id}/gathered/remove", json={"index": op["index"]}
        )
    elif kind == "place":
        body = {
            "source": {"kind": "gathered", "index": op["gathered_index"]},
            "transform": op.get("transform", {}),
        }
        node = client.post(f"/api/scenes/{scene_id}/nodes", json=body).json()["node"]
        result["node"] = node["id"]
        result["volume"] = node["volume"]
    elif kind == "place_primitive":
        body = {
            "source": {"kind": "primitive", "spec": op["spec"]},
            "transform": op.get("transform", {}),
        }
        node = client.post(f"/api/scenes/{scene_id}/nodes", json=body).json()["node"]
        result["node"] = node["id"]
        result["volume"] = node["volume"]
    elif kind == "set_transform":
        client.patch(
            f"/api/scenes/{scene_id}/nodes/{op['node']}/transform",
            json={"transform": op["transform"]},
        )
    elif kind == "duplicate":
        node = client.post(
            f"/api/scenes/{scene_id}/nodes/{op['node']}/duplicate"
        ).json()["node"]
        result["node"] = node["id"]
    elif kind == "csg":
        body = {"op": op["csg_op"], "first": op["first"], "second": op["second"]}
        data = client.post(f"/api/scenes/{scene_id}/csg", json=body).json()
        result["node"] = data["node"]["id"]
        result["volume"] = data["node"]["volume"]
        result["watertight"] = data["stats"]["watertight"]
    elif kind == "undo":
        data = client.post(f"/api/scenes/{scene_id}/undo").json()
        result["reverted"] = data["reverted"]
    elif kind == "import_env":
        stl_path = (script_dir / op["file"]).resolve()
        if not stl_path.is_file():
            raise CliError(f"environment mesh not found: {stl_path}")
        node = client.post(
            f"/api/scenes/{scene_id}/environment",
            files={"file": (stl_path.name, stl_path.read_bytes(), "application/octet-stream")},
            data={
                "pose": json.dumps(op.get("pose", {})),
                "label": op.get("label", stl_path.stem),
            },
        ).json()["node"]
        result["node"] = node["id"]
    elif kind == "export_stl":
        payload = client.get(
            f"/api/scenes/{scene_id}/nodes/{op['node']}/mesh.stl",
            params={"frame": "world"},
        ).content
        target = out_dir / op["file"]
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(payload)
        result["file"] = str(target)
        result["bytes"] = len(payload)
    elif kind == "export_gcode":
        response = client.post(
            f"/api/scenes/{scene_id}/nodes/{op['node']}/export/gcode",
            json=op.get("config", {}),
        )
        target = out_dir / op["file"]
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(response.content)
        result["file"] = str(target)
        result["extruded_mm"] = response.headers.get("X-Remixd-Extruded-Mm")
    else:
        raise CliError(f"unknown script op {kind!r}")
    return result


def cmd_replay(client: ApiClient, args) -> int:
    script_path = Path(args.script)
    if not script_path.is_file():
        raise CliError(f"no such script: {script_path}")
    try:
        ops = json.loads(script_path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"script is not valid JSON: {exc}") from exc
    if not isinstance(ops, list):
        raise CliError("script must be a JSON array of operations")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scene = client.post("/api/scenes", json={"scene_id": f"replay-{script_path.stem}"}).json()
    scene_id = scene["scene_id"]

    report = {"script": script_path.name, "scene_id": scene_id, "steps": []}
    started = time.monotonic()
    for index, op in enumerate(ops):
        step_started = time.monotonic()
        result = _replay_op(client, scene_id, op, script_path.parent, out_dir)
        result["seconds"] = round(time.monotonic() - step_started, 4)
        report["steps"].append(result)
        print(f"[{index + 1}/{len(ops)}] {result}")
    final = client.get(f"/api/scenes/{scene_id}").json()
    report["seconds"] = round(time.monotonic() - started, 4)
    report["final_nodes"] = [
        {
            "id": n["id"],
            "kind": n["kind"],
            "triangles": n["triangles"],
            "volume": n["volume"],
            "watertight": n["watertight"],
        }
        for n in final["nodes"]
    ]
    report_path = out_dir / f"{script_path.stem}.report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"report -> {report_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    listen = args.listen or os.environ.get("REMIXD_LISTEN", DEFAULT_LISTEN)
    host, _, port = listen.partition(":")
    app = create_app(scene_dir=os.environ.get("REMIXD_SCENE_DIR") or None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8787), log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remixd",
        description="Search, remix, and fabricate repository models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="search the repository (remixable results only)")
    p.add_argument("query")
    p.add_argument("--page", type=int, default=0)

    p = sub.add_parser("fetch", help="download and preprocess one entry")
    p.add_argument("entry_id")
    p.add_argument("--out", default=None)

    p = sub.add_parser("replay", help="replay a scripted remix session")
    p.add_argument("script")
    p.add_argument("--out-dir", default=os.environ.get("REMIXD_OUT_DIR", "./out"))

    p = sub.add_parser("slice", help="slice an STL file to G-code")
    p.add_argument("stl")
    p.add_argument("--out", default=None)
    p.add_argument("--layer-height", type=float, default=None)
    p.add_argument("--extrusion-width", type=float, default=None)
    p.add_argument("--infill", type=float, default=None)
    p.add_argument("--perimeters", type=int, default=None)
    p.add_argument("--no-supports", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--listen", default=None, help=f"host:port (default {DEFAULT_LISTEN})")

    return parser


def main(argv: list | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and _USAGE_EXIT
    try:
        if args.command == "serve":
            return cmd_serve(args)
        client = ApiClient()
        if args.command == "search":
            return cmd_search(client, args)
        if args.command == "fetch":
            return cmd_fetch(client, args)
        if args.command == "replay":
            return cmd_replay(client, args)
        if args.command == "slice":
            return cmd_slice(client, args)
        parser.error(f"unknown command {args.command!r}")
        return _USAGE_EXIT
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())
