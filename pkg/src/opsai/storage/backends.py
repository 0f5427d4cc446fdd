"""Object store backends for the bulk log database.

Objects are immutable once written (unless the caller explicitly allows
overwrite, used only for session meta updates). Every backend counts reads
and writes so tests can prove which paths touched the log database.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConflictError, NotFoundError, StorageError


@dataclass
class StoreStats:
    reads: int = 0
    writes: int = 0
    lists: int = 0


class ObjectStore:
    def __init__(self):
        self.stats = StoreStats()

    def get(self, key: str) -> bytes:
        raise NotImplementedError

    def put(self, key: str, data: bytes, overwrite: bool = False) -> None:
        raise NotImplementedError

    def exists(self, key: str) -> bool:
        raise NotImplementedError

    def list_keys(self, prefix: str) -> list[str]:
        raise NotImplementedError


class MemoryObjectStore(ObjectStore):
    def __init__(self):
        super().__init__()
        self._objects: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> bytes:
        self.stats.reads += 1
        with self._lock:
            if key not in self._objects:
                raise NotFoundError(f"object {key!r} not found")
            return self._objects[key]

    def put(self, key: str, data: bytes, overwrite: bool = False) -> None:
        self.stats.writes += 1
        with self._lock:
            if key in self._objects and not overwrite:
                raise ConflictError(f"object {key!r} already exists", code="immutable")
            self._objects[key] = bytes(data)

    def exists(self, key: str) -> bool:
        with self._lock:
            return key in self._objects

    def list_keys(self, prefix: str) -> list[str]:
        self.stats.lists += 1
        with self._lock:
            return sorted(k for k in self._objects if k.startswith(prefix))


class FilesystemObjectStore(ObjectStore):
    """Keys map onto paths under root; writes are tmp+fsync+rename atomic."""

    def __init__(self, root: Path):
        super().__init__()
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            probe = self.root / ".writable"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise StorageError(f"storage root {self.root} is not writable: {exc}")

    def _path(self, key: str) -> Path:
        path = (self.root / key).resolve()
        if not str(path).startswith(str(self.root.resolve())):
            raise StorageError(f"key {key!r} escapes the storage root")
        return path

    def get(self, key: str) -> bytes:
        self.stats.reads += 1
        path = self._path(key)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"object {key!r} not found")

    def put(self, key: str, data: bytes, overwrite: bool = False) -> None:
        self.stats.writes += 1
        path = self._path(key)
        if path.exists() and not overwrite:
            raise ConflictError(f"object {key!r} already exists", code="immutable")
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def exists(self, key: str) -> bool:
        return self._path(key).exists()

    def list_keys(self, prefix: str) -> list[str]:
        self.stats.lists += 1
        base = self._path(prefix.rstrip("/"))
        if not base.is_dir():
            return []
        keys = []
        for dirpath, _dirnames, filenames in os.walk(base):
            for name in filenames:
                if name.endswith(".tmp"):
                    continue
                rel = Path(dirpath, name).relative_to(self.root)
                keys.append(str(rel).replace(os.sep, "/"))
        return sorted(keys)
