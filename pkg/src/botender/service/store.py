"""Document-store persistence with optimistic concurrency."""

from __future__ import annotations

import copy
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from botender.errors import ConflictError, NotFoundError

COLLECTIONS = ("servers", "tasks", "proposals", "cases")


@dataclass(frozen=True)
class PersistenceRecord:
    collection: str
    id: str
    body: dict[str, Any]
    revision: str


class DocumentStore:
    """In-memory document collections, optionally snapshotted to one JSON file.

    Writes must supply the revision they read; a mismatch is a conflict and
    nothing changes. Reads are copies, so callers cannot mutate the store
    behind its back.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self._path = Path(path) if path else None
        self._lock = threading.RLock()
        self._data: dict[str, dict[str, tuple[int, dict[str, Any]]]] = {
            name: {} for name in COLLECTIONS
        }
        if self._path and self._path.exists():
            self._load_file()

    def _check_collection(self, collection: str) -> None:
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection {collection!r}")

    def load(self, collection: str, doc_id: str) -> PersistenceRecord:
        self._check_collection(collection)
        with self._lock:
            try:
                revision, body = self._data[collection][doc_id]
            except KeyError:
                raise NotFoundError(f"{collection}/{doc_id} not found") from None
            return PersistenceRecord(collection, doc_id, copy.deepcopy(body), str(revision))

    def persist(self, collection: str, doc_id: str, body: dict[str, Any],
                revision: str | None) -> PersistenceRecord:
        """Create (revision None) or update (revision must match) one document."""
        self._check_collection(collection)
        with self._lock:
            current = self._data[collection].get(doc_id)
            if revision is None:
                if current is not None:
                    raise ConflictError(f"{collection}/{doc_id} already exists")
                next_revision = 1
            else:
                if current is None:
                    raise NotFoundError(f"{collection}/{doc_id} not found")
                if str(current[0]) != revision:
                    raise ConflictError(
                        f"stale revision for {collection}/{doc_id}: "
                        f"have {revision}, current {current[0]}")
                next_revision = current[0] + 1
            self._data[collection][doc_id] = (next_revision, copy.deepcopy(body))
            self._flush()
            return PersistenceRecord(collection, doc_id, copy.deepcopy(body),
                                     str(next_revision))

    def upsert(self, collection: str, doc_id: str, body: dict[str, Any]) -> PersistenceRecord:
        """Write-through for single-writer callers that already hold the
        domain lock: reads the current revision and persists over it."""
        with self._lock:
            try:
                current = self.load(collection, doc_id)
                return self.persist(collection, doc_id, body, current.revision)
            except NotFoundError:
                return self.persist(collection, doc_id, body, None)

    def list_collection(self, collection: str) -> list[PersistenceRecord]:
        self._check_collection(collection)
        with self._lock:
            return [
                PersistenceRecord(collection, doc_id, copy.deepcopy(body), str(revision))
                for doc_id, (revision, body) in sorted(self._data[collection].items())
            ]

    # -- file snapshot ----------------------------------------------------

    def _flush(self) -> None:
        if not self._path:
            return
        snapshot = {
            collection: {doc_id: {"revision": revision, "body": body}
                         for doc_id, (revision, body) in docs.items()}
            for collection, docs in self._data.items()
        }
        tmp = self._path.with_suffix(".tmp")
        tmp.write_text(json.dumps(snapshot, ensure_ascii=False, indent=2),
                       encoding="utf-8")
        tmp.replace(self._path)

    def _load_file(self) -> None:
        assert self._path is not None
        snapshot = json.loads(self._path.read_text(encoding="utf-8"))
        for collection, docs in snapshot.items():
            if collection not in self._data:
                continue
            for doc_id, wrapped in docs.items():
                self._data[collection][doc_id] = (wrapped["revision"], wrapped["body"])
