"""Durable append-only event log with sidecar snapshots.

One JSON object per line, UTF-8, "seq" first, with a CRC-32 of the record
(computed over the serialized object without the "crc" field) appended as the
last field. Appends are fsynced before they are acknowledged. Replay verifies
seq continuity and CRCs and stops at the last valid record, reporting the
truncation point instead of propagating garbage.

Snapshots are whole-state JSON files written atomically next to the log;
recovery loads the snapshot (if any) and replays the suffix.
"""

from __future__ import annotations

import json
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

# Minimal schema per event kind; payloads are free-form dicts beyond this.
EVENT_SCHEMAS: dict[str, dict] = {
    "job_submitted": {
        "type": "object",
        "required": ["job_id", "descriptor"],
        "properties": {"job_id": {"type": "string"}, "descriptor": {"type": "object"}},
    },
    "job_transition": {
        "type": "object",
        "required": ["job_id", "from", "to"],
        "properties": {
            "job_id": {"type": "string"},
            "from": {"type": "string"},
            "to": {"type": "string"},
        },
    },
    "job_checkpoint": {
        "type": "object",
        "required": ["job_id", "iteration"],
        "properties": {"job_id": {"type": "string"}, "iteration": {"type": "integer", "minimum": 0}},
    },
    "job_results": {
        "type": "object",
        "required": ["job_id", "results"],
        "properties": {"job_id": {"type": "string"}},
    },
    "job_progress": {
        "type": "object",
        "required": ["job_id", "completed", "total"],
        "properties": {"job_id": {"type": "string"}},
    },
    "job_cancel_requested": {"type": "object", "required": ["job_id"]},
    "worker_registered": {"type": "object", "required": ["worker_id"]},
    "worker_heartbeat": {"type": "object", "required": ["worker_id", "at"]},
    "reservation_created": {"type": "object", "required": ["reservation_id", "backend_id", "user", "start", "end"]},
    "session_opened": {"type": "object", "required": ["session_id", "user", "backend_id"]},
    "session_closed": {"type": "object", "required": ["session_id"]},
    "session_touched": {"type": "object", "required": ["session_id", "at"]},
    "calibration_recorded": {"type": "object", "required": ["backend_id", "timestamp"]},
}


class StoreError(Exception):
    pass


class SchemaViolation(StoreError):
    def __init__(self, kind: str, detail: str):
        super().__init__(f"event '{kind}' failed schema validation: {detail}")
        self.kind = kind


class StorageFailure(StoreError):
    pass


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: float
    kind: str
    payload: dict


@dataclass
class ReplayReport:
    events: list[Event] = field(default_factory=list)
    truncated_at_seq: int | None = None  # first bad record's expected seq
    truncation_reason: str | None = None
    valid_bytes: int = 0  # file offset just past the last valid record

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else 0


def _encode(seq: int, timestamp: float, kind: str, payload: dict) -> str:
    body = json.dumps(
        {"seq": seq, "ts": timestamp, "kind": kind, "payload": payload},
        separators=(",", ":"),
        ensure_ascii=True,
    )
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return body[:-1] + f',"crc":{crc}}}'


def _decode(line: str) -> Event:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    crc = obj.pop("crc", None)
    if crc is None:
        raise ValueError("record has no crc")
    body = json.dumps(
        {"seq": obj["seq"], "ts": obj["ts"], "kind": obj["kind"], "payload": obj["payload"]},
        separators=(",", ":"),
        ensure_ascii=True,
    )
    if (zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF) != crc:
        raise ValueError("crc mismatch")
    return Event(seq=int(obj["seq"]), timestamp=float(obj["ts"]), kind=str(obj["kind"]), payload=obj["payload"])


def replay_file(path: str | Path, from_seq: int = 1) -> ReplayReport:
    """Scan a log file, verifying CRCs and seq continuity; stops at the first
    bad record and reports where and why."""
    path = Path(path)
    report = ReplayReport()
    if not path.exists():
        return report
    expected = None
    offset = 0
    try:
        with open(path, "rb") as fh:
            for raw in fh:
                line = raw.decode("utf-8", errors="replace").rstrip("\n")
                if not line.strip():
                    offset += len(raw)
                    continue
                try:
                    event = _decode(line)
                except (ValueError, KeyError, TypeError) as exc:
                    report.truncated_at_seq = (expected + 1) if expected is not None else from_seq
                    report.truncation_reason = str(exc)
                    break
                if expected is not None and event.seq != expected + 1:
                    report.truncated_at_seq = expected + 1
                    report.truncation_reason = f"sequence gap: expected {expected + 1}, found {event.seq}"
                    break
                expected = event.seq
                offset += len(raw)
                if event.seq >= from_seq:
                    report.events.append(event)
    except OSError as exc:
        raise StorageFailure(f"replay failed: {exc}") from exc
    report.valid_bytes = offset
    return report


class EventLog:
    """Single-writer append-only log. Concurrent readers must work off
    replay() results or snapshots, never the live file handle."""

    def __init__(self, path: str | Path, fsync: bool = True):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._fh = None
        self._next_seq = self._open_and_repair()

    def _open_and_repair(self) -> int:
        """Scan the log; if the tail is corrupt, move it aside and truncate so
        subsequent appends continue from the last valid record."""
        if not self.path.exists():
            return 1
        report = self.replay()
        if report.truncated_at_seq is not None:
            with open(self.path, "rb") as fh:
                data = fh.read()
            bad_tail = data[report.valid_bytes :]
            if bad_tail:
                with open(self.path.with_suffix(self.path.suffix + ".corrupt"), "ab") as out:
                    out.write(bad_tail)
            with open(self.path, "r+b") as fh:
                fh.truncate(report.valid_bytes)
        return report.last_seq + 1

    def _handle(self):
        if self._fh is None or self._fh.closed:
            self._fh = open(self.path, "a", encoding="utf-8")
        return self._fh

    def append(self, kind: str, payload: dict, timestamp: float) -> int:
        schema = EVENT_SCHEMAS.get(kind)
        if schema is None:
            raise SchemaViolation(kind, "unknown event kind")
        try:
            jsonschema.validate(payload, schema)
        except jsonschema.ValidationError as exc:
            raise SchemaViolation(kind, exc.message) from None
        seq = self._next_seq
        line = _encode(seq, timestamp, kind, payload)
        try:
            fh = self._handle()
            fh.write(line + "\n")
            fh.flush()
            if self._fsync:
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageFailure(f"append failed: {exc}") from exc
        self._next_seq = seq + 1
        return seq

    def replay(self, from_seq: int = 1) -> ReplayReport:
        return replay_file(self.path, from_seq)

    def close(self) -> None:
        if self._fh is not None and not self._fh.closed:
            self._fh.close()


class SnapshotFile:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def save(self, as_of_seq: int, state: dict) -> None:
        body = json.dumps({"as_of_seq": as_of_seq, "state": state}, separators=(",", ":"), ensure_ascii=True)
        crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"crc": crc, "snapshot": {"as_of_seq": as_of_seq, "state": state}}, ensure_ascii=True))
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except OSError as exc:
            raise StorageFailure(f"snapshot write failed: {exc}") from exc

    def load(self) -> tuple[int, dict] | None:
        """(as_of_seq, state), or None when missing/corrupt (callers fall back
        to a full replay)."""
        if not self.path.exists():
            return None
        try:
            with open(self.path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            snap = obj["snapshot"]
            body = json.dumps(
                {"as_of_seq": snap["as_of_seq"], "state": snap["state"]},
                separators=(",", ":"),
                ensure_ascii=True,
            )
            if (zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF) != obj["crc"]:
                return None
            return int(snap["as_of_seq"]), snap["state"]
        except (OSError, ValueError, KeyError, TypeError):
            return None
