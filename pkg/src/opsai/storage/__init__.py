from .backends import FilesystemObjectStore, MemoryObjectStore, ObjectStore, StoreStats
from .index import MemoryReferenceIndex, ReferenceIndex, SqliteReferenceIndex
from .records import (
    ALL_SESSIONS,
    QueryFilter,
    ReferenceEntry,
    SessionMeta,
    StorageConfig,
    log_key,
    meta_key,
    segment_key,
)
from .store import LogStore

__all__ = [
    "ALL_SESSIONS",
    "FilesystemObjectStore",
    "LogStore",
    "MemoryObjectStore",
    "MemoryReferenceIndex",
    "ObjectStore",
    "QueryFilter",
    "ReferenceEntry",
    "ReferenceIndex",
    "SessionMeta",
    "SqliteReferenceIndex",
    "StorageConfig",
    "StoreStats",
    "log_key",
    "meta_key",
    "segment_key",
]
