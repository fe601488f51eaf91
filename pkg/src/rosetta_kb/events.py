"""Append-only JSON-lines event log with an optional snapshot file.

Every write is appended (and flushed) before the caller acknowledges it.
Replaying the log reproduces store state bit-exactly; a snapshot shortcuts
replay by recording full state plus the number of events it covers.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterator, List, Optional

from .errors import DataDirectoryUnwritable, ReplayError

LOG_VERSION = 1
KNOWN_EVENT_TYPES = frozenset({
    "header",
    "term.register", "term.map",
    "schema.create", "schema.evolve",
    "stmt.create", "stmt.edit", "stmt.delete", "stmt.version",
    "stmt.classify", "stmt.declassify",
    "question.store",
    "crosswalk.define",
    "template.register",
})


class EventLog:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            probe = self.data_dir / ".write-probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise DataDirectoryUnwritable(str(self.data_dir)) from exc
        self.log_path = self.data_dir / "events.jsonl"
        self.snapshot_path = self.data_dir / "snapshot.json"
        if not self.log_path.exists():
            self._write_line({"type": "header", "log_version": LOG_VERSION})
        self.event_count = sum(1 for _ in self.read_events())

    def _write_line(self, record: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())

    def append(self, event: dict) -> None:
        self._write_line(event)
        self.event_count += 1

    def read_events(self) -> Iterator[dict]:
        """All events after the header, validating the header on the way."""
        if not self.log_path.exists():
            return
        with self.log_path.open(encoding="utf-8") as fh:
            first = fh.readline()
            if not first:
                return
            header = json.loads(first)
            if header.get("type") != "header":
                raise ReplayError("event log does not start with a header record")
            if header.get("log_version") != LOG_VERSION:
                raise ReplayError(
                    f"unsupported log version {header.get('log_version')!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event.get("type") not in KNOWN_EVENT_TYPES:
                    raise ReplayError(f"unknown event type {event.get('type')!r}")
                yield event

    def write_snapshot(self, state: dict) -> None:
        doc = {"offset": self.event_count, "state": state}
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
        tmp.replace(self.snapshot_path)

    def read_snapshot(self) -> Optional[dict]:
        if not self.snapshot_path.exists():
            return None
        return json.loads(self.snapshot_path.read_text(encoding="utf-8"))
