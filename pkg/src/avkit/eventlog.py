"""Append-only newline-delimited JSON event log.

Every append is flushed and fsynced before it is acknowledged, so a crash
loses at most the event being written.  Replaying the file from the top
reconstructs the writer's state.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterator


class EventLogError(RuntimeError):
    pass


def read_events(path: str | Path) -> Iterator[dict]:
    """Yield all complete events in the log, oldest first.

    A trailing partial line (torn write from a crash) is skipped; a corrupt
    line anywhere else is an error.
    """
    path = Path(path)
    if not path.exists():
        return
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    for i, line in enumerate(lines):
        if not line:
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                return
            raise EventLogError(f"{path}: corrupt event at line {i + 1}") from None


class EventLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a", encoding="utf-8")

    def append(self, event: dict) -> None:
        line = json.dumps(event, separators=(",", ":"), sort_keys=True)
        self._fh.write(line + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
