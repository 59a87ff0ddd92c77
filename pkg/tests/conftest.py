import os
import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))

os.environ.setdefault("REMIXD_FIXTURE_DIR", str(FIXTURE_DIR))

_acceptance_lines: list = []


def record_acceptance(ok: bool, name: str, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    _acceptance_lines.append(f"[{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def scan_mesh_699k():
    """Synthetic watertight scan with exactly 699,000 triangles: a UV
    sphere (500 slices x 700 stacks) with smooth radial detail."""
    from remixd.mesh import TriangleMesh

    slices, stacks, radius, bump = 500, 700, 40.0, 0.06
    rng = np.random.default_rng(7)
    amps = rng.uniform(-1, 1, 6)
    verts = [(0.0, 0.0, radius), (0.0, 0.0, -radius)]
    ring_start = []
    for j in range(1, stacks):
        phi = np.pi * j / stacks
        ring_start.append(len(verts))
        th = 2 * np.pi * np.arange(slices) / slices
        r = radius * (
            1.0
            + bump
            * (
                amps[0] * np.sin(3 * th) * np.sin(2 * phi)
                + amps[1] * np.cos(5 * th) * np.sin(3 * phi)
                + amps[2] * np.sin(2 * th + 1.0) * np.cos(4 * phi)
                + amps[3] * np.cos(7 * th) * np.sin(5 * phi)
                + amps[4] * np.sin(11 * th) * np.sin(7 * phi)
                + amps[5] * np.cos(4 * th) * np.sin(6 * phi)
            )
        )
        ring = np.stack(
            [r * np.sin(phi) * np.cos(th), r * np.sin(phi) * np.sin(th), r * np.cos(phi) * np.ones_like(th)],
            axis=1,
        )
        verts.extend(map(tuple, ring))
    tris = []
    r0 = ring_start[0]
    for i in range(slices):
        tris.append((0, r0 + i, r0 + (i + 1) % slices))
    for j in range(len(ring_start) - 1):
        ra, rb = ring_start[j], ring_start[j + 1]
        for i in range(slices):
            i2 = (i + 1) % slices
            tris.append((ra + i, rb + i, rb + i2))
            tris.append((ra + i, rb + i2, ra + i2))
    rl = ring_start[-1]
    for i in range(slices):
        tris.append((1, rl + (i + 1) % slices, rl + i))
    mesh = TriangleMesh(np.array(verts), np.array(tris, dtype=np.int32))
    assert mesh.triangle_count == 699_000
    return mesh


@pytest.fixture()
def client():
    """In-process HTTP client over a fresh app with the fixture backend."""
    from fastapi.testclient import TestClient

    from remixd.repo import FixtureBackend, RepoClient
    from remixd.service import create_app

    repo = RepoClient(FixtureBackend(FIXTURE_DIR))
    app = create_app(repo=repo)
    with TestClient(app) as tc:
        yield tc
    repo.shutdown()
