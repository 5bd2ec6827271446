"""Beam sensor polling and debounce.

The tripwire hardware is abstracted behind a ``BeamSource`` with three
backends: a watched file whose content is CLEAR/OBSTRUCTED, a line-delimited
feed on standard input, and a scripted sequence for tests. Read failures are
a separate health signal, never an obstruction — an I/O error must not lock
the workstation.
"""
from __future__ import annotations

import select
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Protocol

MIN_POLL_INTERVAL_MS = 10
DEFAULT_POLL_INTERVAL_MS = 100
DEFAULT_DEBOUNCE_COUNT = 2

# Consecutive read failures before the loop reports degraded health.
FAILURES_BEFORE_DEGRADED = 3


class SourceUnavailable(Exception):
    """The backing file/feed cannot be read — hardware fault, not a breach."""


class BeamStatus(Enum):
    CLEAR = "CLEAR"
    OBSTRUCTED = "OBSTRUCTED"


class SourceKind(str, Enum):
    SIMULATED_FILE = "simulated_file"
    STDIN_FEED = "stdin"
    SCRIPTED = "scripted"


@dataclass(frozen=True)
class BeamReading:
    status: BeamStatus
    observed_at: int  # monotonic milliseconds


@dataclass(frozen=True)
class BeamTransition:
    status: BeamStatus
    observed_at: int


@dataclass(frozen=True)
class BeamSourceConfig:
    kind: SourceKind
    poll_interval_ms: int = DEFAULT_POLL_INTERVAL_MS
    debounce_count: int = DEFAULT_DEBOUNCE_COUNT

    def __post_init__(self):
        if self.poll_interval_ms < MIN_POLL_INTERVAL_MS:
            raise ValueError(f"poll_interval_ms must be >= {MIN_POLL_INTERVAL_MS}")
        if self.debounce_count < 1:
            raise ValueError("debounce_count must be >= 1")


class BeamSource(Protocol):
    def read(self) -> BeamStatus: ...


def _monotonic_ms() -> int:
    return time.monotonic_ns() // 1_000_000


def _parse_token(token: str) -> BeamStatus:
    # Vocabulary is case-sensitive on purpose; anything else reads as a
    # broken source, same as an I/O failure.
    if token == "CLEAR":
        return BeamStatus.CLEAR
    if token == "OBSTRUCTED":
        return BeamStatus.OBSTRUCTED
    raise SourceUnavailable(f"unrecognized beam token: {token!r}")


class SimulatedFileSource:
    """Re-reads a text file each poll; its first token is the beam status."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def read(self) -> BeamStatus:
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise SourceUnavailable(f"cannot read {self.path}: {exc}") from exc
        tokens = text.split()
        if not tokens:
            raise SourceUnavailable(f"{self.path} is empty")
        return _parse_token(tokens[0])


class StdinFeedSource:
    """One status token per line on a stream (stdin by default).

    Reads never block past one poll: whatever lines are already available are
    drained and the newest wins; with nothing pending, the previous status
    stays in force (initially CLEAR). EOF means the feed died.
    """

    def __init__(self, stream=None):
        import sys

        self._stream = sys.stdin if stream is None else stream
        self._current = BeamStatus.CLEAR
        self._eof = False

    def read(self) -> BeamStatus:
        if self._eof:
            raise SourceUnavailable("beam feed closed")
        while True:
            ready, _, _ = select.select([self._stream], [], [], 0)
            if not ready:
                break
            line = self._stream.readline()
            if line == "":
                self._eof = True
                raise SourceUnavailable("beam feed closed")
            token = line.strip()
            if token:
                self._current = _parse_token(token)
        return self._current


class ScriptedSource:
    """Plays back a fixed token sequence, sticking on the last entry.

    Tokens: CLEAR / OBSTRUCTED / ERROR (or C / O / E). ERROR entries raise
    SourceUnavailable, which lets tests script health degradation.
    """

    _ALIASES = {"C": "CLEAR", "O": "OBSTRUCTED", "E": "ERROR"}

    def __init__(self, tokens: Iterable[str]):
        self._tokens = [self._ALIASES.get(t.strip(), t.strip()) for t in tokens if t.strip()]
        if not self._tokens:
            raise ValueError("scripted source needs at least one token")
        for t in self._tokens:
            if t not in ("CLEAR", "OBSTRUCTED", "ERROR"):
                raise ValueError(f"bad scripted token: {t!r}")
        self._pos = 0

    def read(self) -> BeamStatus:
        token = self._tokens[min(self._pos, len(self._tokens) - 1)]
        self._pos += 1
        if token == "ERROR":
            raise SourceUnavailable("scripted read failure")
        return _parse_token(token)


def check_status(source: BeamSource) -> BeamReading:
    """One instantaneous reading off the source."""
    status = source.read()
    return BeamReading(status, _monotonic_ms())


class Debouncer:
    """Accepts a status change only after N consecutive identical readings.

    The last emitted state starts as CLEAR (an armed system assumes an intact
    beam), so a persistently obstructed beam at startup still emits.
    """

    def __init__(self, debounce_count: int, initial: BeamStatus = BeamStatus.CLEAR):
        if debounce_count < 1:
            raise ValueError("debounce_count must be >= 1")
        self._needed = debounce_count
        self._emitted = initial
        self._run_status: BeamStatus | None = None
        self._run_length = 0

    @property
    def state(self) -> BeamStatus:
        return self._emitted

    def update(self, status: BeamStatus) -> BeamStatus | None:
        """Feed one reading; returns the newly accepted state or None."""
        if status is self._run_status:
            self._run_length += 1
        else:
            self._run_status = status
            self._run_length = 1
        if status is not self._emitted and self._run_length >= self._needed:
            self._emitted = status
            return status
        return None


def poll_loop(
    source: BeamSource,
    config: BeamSourceConfig,
    sink: Callable[[BeamTransition], None],
    *,
    health_sink: Callable[[bool, str], None] | None = None,
    stop: threading.Event | None = None,
) -> None:
    """Poll the source until `stop` is set, pushing debounced transitions.

    After FAILURES_BEFORE_DEGRADED consecutive read failures the loop reports
    degraded health (once); the first good reading afterwards reports
    recovery. Failed reads never feed the debouncer.
    """
    stop = stop or threading.Event()
    debouncer = Debouncer(config.debounce_count)
    interval = config.poll_interval_ms / 1000.0
    failures = 0
    degraded = False
    while not stop.is_set():
        try:
            reading = check_status(source)
        except SourceUnavailable as exc:
            failures += 1
            if failures >= FAILURES_BEFORE_DEGRADED and not degraded:
                degraded = True
                if health_sink is not None:
                    health_sink(False, str(exc))
        else:
            failures = 0
            if degraded:
                degraded = False
                if health_sink is not None:
                    health_sink(True, "beam source recovered")
            accepted = debouncer.update(reading.status)
            if accepted is not None:
                sink(BeamTransition(accepted, reading.observed_at))
        stop.wait(interval)
