"""Append-only log and snapshot persistence.

The log is line-delimited JSON, one record per line::

    {"seq": <1-based int>, "at": "<ISO-8601 UTC>", "kind": "<record kind>", "data": {...}}

Engine state is a pure fold of these records; snapshots store a serialized
fold state plus the log position they cover and only speed up recovery.  A
malformed final line is treated as a torn write and dropped with a warning;
a malformed or out-of-sequence record anywhere else refuses to load.
"""

from __future__ import annotations

import json
import logging
import os
import re
from pathlib import Path
from typing import Optional

from .errors import CorruptLog

logger = logging.getLogger(__name__)

LOG_NAME = "log.jsonl"

_SNAPSHOT = re.compile(r"^snapshot-(\d{9})\.json$")


class EventLog:
    """Durable append-only record log; every append is flushed (and fsynced
    unless disabled) before the mutation is acknowledged."""

    def __init__(self, directory: Path, fsync: bool = True):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / LOG_NAME
        self.fsync = fsync
        self._handle = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict) -> None:
        line = json.dumps(record, separators=(",", ":"), ensure_ascii=False)
        self._handle.write(line + "\n")
        self._handle.flush()
        if self.fsync:
            os.fsync(self._handle.fileno())

    def close(self) -> None:
        self._handle.close()

    def read_all(self) -> tuple[list[dict], list[str]]:
        """All complete records, in order, plus recovery warnings."""
        if not self.path.exists():
            return [], []
        raw = self.path.read_text(encoding="utf-8")
        lines = raw.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        records: list[dict] = []
        warnings: list[str] = []
        for index, line in enumerate(lines):
            try:
                record = json.loads(line)
                if not isinstance(record, dict) or "seq" not in record or "kind" not in record:
                    raise ValueError("not a log record")
            except ValueError:
                if index == len(lines) - 1:
                    warnings.append(
                        f"dropped torn trailing record at line {index + 1}"
                    )
                    logger.warning("recovery: %s", warnings[-1])
                    break
                raise CorruptLog(f"malformed record at line {index + 1}", index + 1) from None
            expected = len(records) + 1
            if record["seq"] != expected:
                raise CorruptLog(
                    f"expected sequence {expected}, found {record['seq']}", expected
                )
            records.append(record)
        return records, warnings

    def truncate_to(self, count: int) -> None:
        """Keep only the first ``count`` records (torn-tail cleanup)."""
        records, _ = self.read_all()
        keep = records[:count]
        self._handle.close()
        with open(self.path, "w", encoding="utf-8") as handle:
            for record in keep:
                handle.write(json.dumps(record, separators=(",", ":"), ensure_ascii=False) + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        self._handle = open(self.path, "a", encoding="utf-8")


def save_snapshot(directory: Path, seq: int, state: dict) -> Path:
    """Atomically write a snapshot covering the first ``seq`` records."""
    directory = Path(directory)
    path = directory / f"snapshot-{seq:09d}.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"seq": seq, "state": state}, ensure_ascii=False),
                   encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_latest_snapshot(directory: Path) -> Optional[tuple[int, dict]]:
    """Newest readable snapshot, or None.  Unreadable snapshots are skipped
    with a warning; the log remains the source of truth."""
    directory = Path(directory)
    candidates = sorted(
        (p for p in directory.iterdir() if _SNAPSHOT.match(p.name)),
        reverse=True,
    )
    for path in candidates:
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
            return int(payload["seq"]), payload["state"]
        except (ValueError, KeyError) as err:
            logger.warning("skipping unreadable snapshot %s: %s", path.name, err)
    return None
