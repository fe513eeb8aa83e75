"""Atomic file persistence for documents and sessions.

Writes go to a temp file in the target directory followed by an atomic
rename, so a crash between the two leaves the previous committed state
intact. Stray ``*.tmp`` files from interrupted writes are ignored on
load.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import PersistenceError, SessionLoadError
from .session import SummarySession


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}") from exc


def save_session(data_dir: Path, session: SummarySession) -> Path:
    path = Path(data_dir) / "sessions" / f"{session.session_id}.json"
    payload = json.dumps(session.to_dict(), sort_keys=True, indent=2).encode("utf-8")
    atomic_write_bytes(path, payload)
    return path


def load_session(data_dir: Path, session_id: str) -> SummarySession:
    path = Path(data_dir) / "sessions" / f"{session_id}.json"
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return SummarySession.from_dict(data)
    except FileNotFoundError as exc:
        raise SessionLoadError(f"session {session_id!r}: no persisted file") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SessionLoadError(f"session {session_id!r}: corrupt persisted file: {exc}") from exc


def list_sessions(data_dir: Path) -> list[str]:
    sessions_dir = Path(data_dir) / "sessions"
    if not sessions_dir.is_dir():
        return []
    return sorted(p.stem for p in sessions_dir.glob("*.json"))


def save_document(data_dir: Path, doc_key: str, raw: bytes) -> Path:
    path = Path(data_dir) / "documents" / f"{doc_key}.json"
    atomic_write_bytes(path, raw)
    return path


def load_document_bytes(data_dir: Path, doc_key: str) -> bytes:
    path = Path(data_dir) / "documents" / f"{doc_key}.json"
    try:
        return path.read_bytes()
    except FileNotFoundError as exc:
        raise PersistenceError(f"document {doc_key!r}: no persisted file") from exc


def list_documents(data_dir: Path) -> list[str]:
    documents_dir = Path(data_dir) / "documents"
    if not documents_dir.is_dir():
        return []
    return sorted(p.stem for p in documents_dir.glob("*.json"))
