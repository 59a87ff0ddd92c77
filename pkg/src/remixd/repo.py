"""Model-repository client: search, license filtering, download queue.

Two interchangeable backends sit behind one contract: a live HTTP
backend (JSON search endpoint plus file downloads) and an offline
fixture backend reading an index.json directory. Search never returns an
entry whose license forbids remixing; unknown licenses fail closed.

Downloaded meshes are preprocessed before they reach the caller: parsed,
repaired, and auto-simplified when heavy. The queue runs at most three
transfers at once; job snapshots are immutable values.
"""
from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import httpx

from .decimate import DecimationConfig, maybe_auto_simplify
from .mesh import TriangleMesh, load_stl, repair_mesh

__all__ = [
    "RepoError",
    "RepoEntry",
    "SearchPage",
    "DownloadJob",
    "RepoClient",
    "FixtureBackend",
    "HttpBackend",
    "remix_allowed",
    "backend_from_env",
    "PAGE_SIZE",
]

PAGE_SIZE = 20
MAX_CONCURRENT_DOWNLOADS = 3

# licenses that forbid derivatives, checked before the allow list so
# "cc-by-nd" does not match the "cc-by" prefix
_DENY_MARKERS = ("nd", "no-deriv", "noderiv", "all rights reserved", "all-rights-reserved", "proprietary")
_ALLOW_PREFIXES = (
    "cc0",
    "public domain",
    "public-domain",
    "pd",
    "cc-by",
    "cc by",
    "bsd",
    "mit",
    "gpl",
    "lgpl",
    "agpl",
)


class RepoError(RuntimeError):
    pass


class BackendUnreachable(RepoError):
    pass


class MalformedResponse(RepoError):
    pass


def remix_allowed(license_id: str) -> bool:
    """Conservative license gate: derivatives must be clearly permitted.

    Unknown or empty license strings fail closed.
    """
    norm = (license_id or "").strip().lower()
    if not norm:
        return False
    tokens = norm.replace("_", "-")
    for marker in _DENY_MARKERS:
        if marker in ("nd", "pd"):
            continue
        if marker in tokens:
            return False
    # word-ish match for the short 'nd' tag: cc-by-nd, cc-by-nc-nd-4.0
    parts = tokens.replace(".", "-").replace(" ", "-").split("-")
    if "nd" in parts:
        return False
    if tokens in ("pd", "publicdomain"):
        return True
    return any(tokens.startswith(p) for p in _ALLOW_PREFIXES)


@dataclass(frozen=True)
class RepoEntry:
    id: str
    title: str
    license: str
    thumbnail_url: str = ""
    file_locators: tuple = ()
    remix_allowed: bool = field(default=False)

    @staticmethod
    def from_record(record: dict) -> "RepoEntry":
        try:
            entry_id = str(record["id"])
            title = str(record.get("title", entry_id))
            license_id = str(record.get("license", ""))
            locators = tuple(str(f) for f in record.get("files", []))
        except (TypeError, KeyError) as exc:
            raise MalformedResponse(f"bad repository record: {exc}") from exc
        if not entry_id:
            raise MalformedResponse("repository record with empty id")
        return RepoEntry(
            id=entry_id,
            title=title,
            license=license_id,
            thumbnail_url=str(record.get("thumbnail", "")),
            file_locators=locators,
            remix_allowed=remix_allowed(license_id),
        )


@dataclass(frozen=True)
class SearchPage:
    query: str
    page: int
    entries: tuple
    total_available: int


@dataclass(frozen=True)
class DownloadJob:
    job_id: str
    entry_id: str
    state: str  # queued | downloading | preprocessing | ready | failed
    error: str = ""
    triangles: int = 0
    auto_simplified: bool = False
    gathered_into: tuple = ()


class FixtureBackend:
    """Offline backend over a directory with index.json, STL files, and
    thumbnail images referenced by relative path."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _index(self) -> list:
        path = self.root / "index.json"
        try:
            raw = path.read_text()
        except OSError as exc:
            raise BackendUnreachable(f"fixture index unreadable: {exc}") from exc
        try:
            records = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"fixture index is not JSON: {exc}") from exc
        if not isinstance(records, list):
            raise MalformedResponse("fixture index must be a JSON array")
        return records

    def search(self, query: str, page: int):
        terms = query.lower().split()
        hits = []
        for record in self._index():
            entry = RepoEntry.from_record(record)
            haystack = " ".join(
                [entry.title.lower(), str(record.get("tags", "")).lower()]
            )
            if all(t in haystack for t in terms):
                hits.append(entry)
        return hits

    def fetch_entry(self, entry_id: str) -> RepoEntry | None:
        for record in self._index():
            if str(record.get("id")) == entry_id:
                return RepoEntry.from_record(record)
        return None

    def download(self, entry: RepoEntry) -> bytes:
        if not entry.file_locators:
            raise RepoError(f"entry {entry.id} has no files")
        path = self.root / entry.file_locators[0]
        try:
            return path.read_bytes()
        except OSError as exc:
            raise BackendUnreachable(f"fixture file unreadable: {exc}") from exc

    def thumbnail(self, entry: RepoEntry) -> bytes:
        if not entry.thumbnail_url:
            raise RepoError(f"entry {entry.id} has no thumbnail")
        try:
            return (self.root / entry.thumbnail_url).read_bytes()
        except OSError as exc:
            raise BackendUnreachable(f"thumbnail unreadable: {exc}") from exc


class HttpBackend:
    """Live JSON-over-REST backend. Path templates are configuration:
    search_path receives query/page/per_page format args."""

    def __init__(
        self,
        base_url: str,
        search_path: str = "/search?q={query}&page={page}&per_page={per_page}",
        timeout: float = 20.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.search_path = search_path
        self._client = httpx.Client(timeout=timeout)

    def search(self, query: str, page: int):
        url = self.base_url + self.search_path.format(
            query=httpx.QueryParams({"q": query})["q"], page=page, per_page=PAGE_SIZE
        )
        try:
            response = self._client.get(url)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"search failed: {exc}") from exc
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedResponse(f"search response is not JSON: {exc}") from exc
        records = payload.get("items") if isinstance(payload, dict) else payload
        if not isinstance(records, list):
            raise MalformedResponse("search response lacks a result array")
        return [RepoEntry.from_record(r) for r in records]

    def fetch_entry(self, entry_id: str) -> RepoEntry | None:
        hits = self.search(entry_id, 0)
        for entry in hits:
            if entry.id == entry_id:
                return entry
        return None

    def download(self, entry: RepoEntry) -> bytes:
        if not entry.file_locators:
            raise RepoError(f"entry {entry.id} has no files")
        url = entry.file_locators[0]
        if not url.startswith("http"):
            url = self.base_url + "/" + url.lstrip("/")
        try:
            response = self._client.get(url, follow_redirects=True)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"download failed: {exc}") from exc
        return response.content

    def thumbnail(self, entry: RepoEntry) -> bytes:
        if not entry.thumbnail_url:
            raise RepoError(f"entry {entry.id} has no thumbnail")
        url = entry.thumbnail_url
        if not url.startswith("http"):
            url = self.base_url + "/" + url.lstrip("/")
        try:
            response = self._client.get(url, follow_redirects=True)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(f"thumbnail failed: {exc}") from exc
        return response.content


def backend_from_env(env: dict | None = None):
    """REMIXD_REPO_BASE_URL selects the live backend; otherwise fixtures
    at REMIXD_FIXTURE_DIR (default ./fixtures)."""
    env = os.environ if env is None else env
    base = env.get("REMIXD_REPO_BASE_URL", "").strip()
    if base:
        return HttpBackend(base)
    return FixtureBackend(env.get("REMIXD_FIXTURE_DIR", "./fixtures"))


class RepoClient:
    """Search plus an asynchronous download/preprocess queue."""

    def __init__(self, backend, decimation: DecimationConfig | None = None):
        self.backend = backend
        self.decimation = decimation or DecimationConfig()
        self._lock = threading.Lock()
        self._jobs: dict = {}
        self._meshes: dict = {}
        self._by_entry: dict = {}
        self._listeners: dict = {}
        self._pool = ThreadPoolExecutor(
            max_workers=MAX_CONCURRENT_DOWNLOADS, thread_name_prefix="repo-dl"
        )
        self._serial = 0

    # -- search ------------------------------------------------------------

    def search(self, query: str, page: int = 0) -> SearchPage:
        q = query.strip()
        if not q:
            raise RepoError("empty search query")
        if page < 0:
            raise RepoError("page must be >= 0")
        hits = [e for e in self.backend.search(q, page) if e.remix_allowed]
        start = page * PAGE_SIZE
        return SearchPage(
            query=q,
            page=page,
            entries=tuple(hits[start: start + PAGE_SIZE]),
            total_available=len(hits),
        )

    def entry(self, entry_id: str) -> RepoEntry:
        entry = self.backend.fetch_entry(entry_id)
        if entry is None:
            raise RepoError(f"unknown entry {entry_id!r}")
        if not entry.remix_allowed:
            raise RepoError(f"entry {entry_id!r} does not permit remixing")
        return entry

    def thumbnail(self, entry_id: str) -> bytes:
        return self.backend.thumbnail(self.entry(entry_id))

    # -- download queue ----------------------------------------------------

    def enqueue_download(self, entry: RepoEntry, on_ready=None) -> DownloadJob:
        """Start (or join) the download of a search result.

        Re-enqueueing an entry whose job has not failed returns the
        existing job; on_ready callbacks fire once the mesh is usable,
        including immediately for already-ready jobs.
        """
        fire = None
        with self._lock:
            existing_id = self._by_entry.get(entry.id)
            if existing_id is not None and self._jobs[existing_id].state != "failed":
                job = self._jobs[existing_id]
                if on_ready is not None:
                    if job.state == "ready":
                        fire = (job, self._meshes[existing_id])
                    else:
                        self._listeners.setdefault(existing_id, []).append(on_ready)
            else:
                self._serial += 1
                job_id = f"job-{self._serial}"
                job = DownloadJob(job_id=job_id, entry_id=entry.id, state="queued")
                self._jobs[job_id] = job
                self._by_entry[entry.id] = job_id
                if on_ready is not None:
                    self._listeners.setdefault(job_id, []).append(on_ready)
                self._pool.submit(self._run_job, job_id, entry)
        if fire is not None:
            on_ready(*fire)
            job = self.poll_job(job.job_id)
        return job

    def _set(self, job_id: str, **changes) -> DownloadJob:
        with self._lock:
            job = replace(self._jobs[job_id], **changes)
            self._jobs[job_id] = job
            return job

    def _run_job(self, job_id: str, entry: RepoEntry) -> None:
        try:
            self._set(job_id, state="downloading")
            payload = self.backend.download(entry)
            self._set(job_id, state="preprocessing")
            try:
                mesh = load_stl(payload)
            except Exception as exc:
                raise RepoError(f"stl parse error: {exc}") from exc
            mesh = repair_mesh(mesh, orient="outward").mesh
            mesh, simplified, _stats = maybe_auto_simplify(mesh, self.decimation)
            # state flip and listener handoff must be atomic, or a
            # just-registered listener could miss its ready event
            with self._lock:
                self._meshes[job_id] = mesh
                job = replace(
                    self._jobs[job_id],
                    state="ready",
                    triangles=mesh.triangle_count,
                    auto_simplified=simplified,
                )
                self._jobs[job_id] = job
                listeners = self._listeners.pop(job_id, [])
            for listener in listeners:
                try:
                    listener(job, mesh)
                except Exception:  # listener errors must not fail the job
                    pass
        except Exception as exc:
            with self._lock:
                self._listeners.pop(job_id, None)
            self._set(job_id, state="failed", error=str(exc))

    def poll_job(self, job_id: str) -> DownloadJob:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise RepoError(f"unknown job {job_id!r}")
        return job

    def job_mesh(self, job_id: str) -> TriangleMesh:
        job = self.poll_job(job_id)
        if job.state != "ready":
            raise RepoError(f"job {job_id} is {job.state}, not ready")
        with self._lock:
            return self._meshes[job_id]

    def wait(self, job_id: str, timeout: float = 30.0) -> DownloadJob:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            job = self.poll_job(job_id)
            if job.state in ("ready", "failed"):
                return job
            time.sleep(0.02)
        raise RepoError(f"job {job_id} did not settle within {timeout}s")

    def note_gathered(self, job_id: str, scene_id: str) -> DownloadJob:
        with self._lock:
            job = self._jobs[job_id]
            job = replace(job, gathered_into=job.gathered_into + (scene_id,))
            self._jobs[job_id] = job
            return job

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False)
