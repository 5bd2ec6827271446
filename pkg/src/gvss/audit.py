"""Append-only audit log shared by the protection state machine."""
from __future__ import annotations

import threading
import time
from datetime import datetime, timezone
from pathlib import Path

EVENTS = ("ARM", "DISARM", "BREACH", "LOCK", "UNLOCK", "NOTIFY_OK", "NOTIFY_FAIL", "HEALTH")


class AuditLog:
    """Writes `<ISO-8601 timestamp> <EVENT> <episode_id> <detail>` lines.

    Every line is flushed as written so the log survives an abrupt stop.
    """

    def __init__(self, path: str | Path, now_fn=time.time):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._now = now_fn
        self._mu = threading.Lock()
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, event: str, episode_id: int, detail: str = "") -> None:
        if event not in EVENTS:
            raise ValueError(f"unknown audit event: {event!r}")
        stamp = datetime.fromtimestamp(self._now(), tz=timezone.utc).strftime(
            "%Y-%m-%dT%H:%M:%S.%f"
        )[:-3] + "Z"
        line = f"{stamp} {event} {episode_id} {detail}".rstrip() + "\n"
        with self._mu:
            self._fh.write(line)
            self._fh.flush()

    def close(self) -> None:
        with self._mu:
            if not self._fh.closed:
                self._fh.flush()
                self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
