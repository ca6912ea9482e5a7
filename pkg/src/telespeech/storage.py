"""Single-node durable persistence: JSON documents plus content-addressed audio.

Every write lands via temp-file + fsync + atomic rename, so an acknowledged
write survives kill-and-restart byte for byte. No external database.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _safe_id(doc_id: str) -> str:
    if not doc_id or "/" in doc_id or doc_id.startswith("."):
        raise ValueError(f"invalid document id: {doc_id!r}")
    return doc_id


class DocumentStore:
    """Directory-per-collection JSON store with atomic writes."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, collection: str, doc_id: str) -> Path:
        d = self.root / _safe_id(collection)
        d.mkdir(parents=True, exist_ok=True)
        return d / f"{_safe_id(doc_id)}.json"

    def put(self, collection: str, doc_id: str, doc: dict) -> None:
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        _atomic_write(self._path(collection, doc_id), blob)

    def get(self, collection: str, doc_id: str) -> dict | None:
        path = self._path(collection, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_bytes())

    def delete(self, collection: str, doc_id: str) -> bool:
        path = self._path(collection, doc_id)
        if path.exists():
            path.unlink()
            return True
        return False

    def list_ids(self, collection: str) -> list[str]:
        d = self.root / _safe_id(collection)
        if not d.is_dir():
            return []
        return sorted(p.stem for p in d.glob("*.json"))

    def all(self, collection: str) -> list[dict]:
        return [doc for doc_id in self.list_ids(collection) if (doc := self.get(collection, doc_id)) is not None]


class AudioStore:
    """Content-addressed WAV blobs; the id is the SHA-256 of the bytes.

    Content addressing gives reference-feature cache coherence for free:
    changing an item's audio changes the id, so stale features can never be
    looked up under the new recording.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, audio_id: str) -> Path:
        return self.root / f"{_safe_id(audio_id)}.wav"

    def put(self, data: bytes) -> str:
        audio_id = hashlib.sha256(data).hexdigest()
        path = self._path(audio_id)
        if not path.exists():
            _atomic_write(path, data)
        return audio_id

    def get(self, audio_id: str) -> bytes | None:
        path = self._path(audio_id)
        if not path.exists():
            return None
        return path.read_bytes()

    def exists(self, audio_id: str) -> bool:
        return self._path(audio_id).exists()
