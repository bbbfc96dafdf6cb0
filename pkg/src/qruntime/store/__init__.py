from .eventlog import (
    EVENT_SCHEMAS,
    Event,
    EventLog,
    ReplayReport,
    SchemaViolation,
    SnapshotFile,
    StorageFailure,
    StoreError,
    replay_file,
)

__all__ = [
    "EVENT_SCHEMAS",
    "Event",
    "EventLog",
    "ReplayReport",
    "SchemaViolation",
    "SnapshotFile",
    "StorageFailure",
    "StoreError",
    "replay_file",
]
