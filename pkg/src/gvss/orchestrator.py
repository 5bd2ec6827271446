"""The intrusion state machine and its breach response.

Modes: Disarmed <-> Armed (operator), Armed -> Breached (sensor),
Breached -> LockedStreaming (automatic once the lock guard is engaged),
Breached/LockedStreaming -> Armed (operator unlock). Everything else is
rejected and leaves state untouched.

All transitions serialize through one mutex; breach sub-actions (lock guard,
notification) run as child tasks that re-check their episode before touching
state, so a racing unlock cancels whatever has not started and releases
whatever has.
"""
from __future__ import annotations

import logging
import subprocess
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Callable

from gvss.audit import AuditLog
from gvss.notify import DeliveryStatus, Notifier, format_breach_message
from gvss.sensor import BeamStatus, BeamTransition

log = logging.getLogger("gvss.orchestrator")

HOOK_TIMEOUT_SECONDS = 10.0


class Mode(Enum):
    DISARMED = "Disarmed"
    ARMED = "Armed"
    BREACHED = "Breached"
    LOCKED_STREAMING = "LockedStreaming"


class NotLocked(Exception):
    """Unlock requested while nothing is locked — a stale client command."""


class IllegalTransition(Exception):
    pass


@dataclass(frozen=True)
class IntrusionState:
    mode: Mode
    episode_id: int
    entered_at: float
    lock_engaged: bool
    stream_enabled: bool


@dataclass
class BreachActions:
    lock_engaged: bool = False
    notification_receipt: str | None = None
    stream_enabled: bool = False


def _run_hook(argv: list[str] | None, label: str) -> None:
    """Best-effort platform command; failure is logged, never raised."""
    if not argv:
        return
    try:
        subprocess.run(
            argv,
            timeout=HOOK_TIMEOUT_SECONDS,
            check=True,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
    except (OSError, subprocess.SubprocessError) as exc:
        log.warning("%s hook failed: %s", label, exc)


class LockGuard:
    """Process-wide stand-in for disabled input devices.

    Engaging/releasing flips a flag and writes a LOCK/UNLOCK audit line; the
    optional platform commands are run by the orchestrator outside its state
    mutex. Idempotent in both directions.
    """

    def __init__(self, audit: AuditLog):
        self._audit = audit
        self._active = False
        self._mu = threading.Lock()

    @property
    def active(self) -> bool:
        with self._mu:
            return self._active

    def engage(self, episode_id: int, detail: str = "") -> bool:
        with self._mu:
            if self._active:
                return False
            self._active = True
        self._audit.append("LOCK", episode_id, detail)
        return True

    def release(self, episode_id: int, detail: str = "") -> bool:
        with self._mu:
            if not self._active:
                return False
            self._active = False
        self._audit.append("UNLOCK", episode_id, detail)
        return True


def _thread_spawn(fn: Callable, *args) -> None:
    threading.Thread(target=fn, args=args, daemon=True).start()


class Orchestrator:
    def __init__(
        self,
        audit: AuditLog,
        notifier: Notifier,
        *,
        recipient: str,
        camera_id: str,
        lock_command: list[str] | None = None,
        unlock_command: list[str] | None = None,
        now_fn: Callable[[], float] = time.time,
        spawn: Callable = _thread_spawn,
    ):
        self._audit = audit
        self._notifier = notifier
        self._recipient = recipient
        self._camera_id = camera_id
        self._lock_command = lock_command
        self._unlock_command = unlock_command
        self._now = now_fn
        self._spawn = spawn

        self._mu = threading.Lock()
        # The monitor starts protecting immediately; Disarmed is an operator
        # affordance, not the initial state.
        self._mode = Mode.ARMED
        self._episode_id = 0
        self._entered_at = self._now()
        self._actions = BreachActions()
        self._guard = LockGuard(audit)
        self._notified_episodes: set[int] = set()

    # -- state access ------------------------------------------------------

    def _snapshot_locked(self) -> IntrusionState:
        return IntrusionState(
            mode=self._mode,
            episode_id=self._episode_id,
            entered_at=self._entered_at,
            lock_engaged=self._guard.active,
            stream_enabled=self._actions.stream_enabled,
        )

    def state(self) -> IntrusionState:
        with self._mu:
            return self._snapshot_locked()

    def breach_actions(self) -> BreachActions:
        with self._mu:
            return BreachActions(
                self._actions.lock_engaged,
                self._actions.notification_receipt,
                self._actions.stream_enabled,
            )

    @property
    def lock_engaged(self) -> bool:
        return self._guard.active

    def frame_access_allowed(self) -> bool:
        """Live frames are served in every mode except Disarmed."""
        with self._mu:
            return self._mode is not Mode.DISARMED

    # -- sensor input ------------------------------------------------------

    def handle_transition(self, t: BeamTransition) -> IntrusionState:
        """React to a debounced beam transition.

        An obstruction while Armed opens a breach episode; while already
        Breached/LockedStreaming it is absorbed; while Disarmed it is only
        audit-logged. Beam re-clearing never ends an episode — that takes an
        operator unlock.
        """
        if t.status is not BeamStatus.OBSTRUCTED:
            return self.state()
        with self._mu:
            if self._mode is Mode.ARMED:
                self._episode_id += 1
                self._mode = Mode.BREACHED
                self._entered_at = self._now()
                self._actions = BreachActions()
                episode = self._episode_id
                self._audit.append("BREACH", episode, "beam obstructed")
            elif self._mode in (Mode.BREACHED, Mode.LOCKED_STREAMING):
                return self._snapshot_locked()
            else:
                self._audit.append("HEALTH", self._episode_id, "obstruction ignored while disarmed")
                return self._snapshot_locked()
        # Sub-actions are failure-isolated from each other: a dead notifier
        # transport must not keep the lock or the stream from engaging.
        self._spawn(self._lock_task, episode)
        self._spawn(self._notify_task, episode)
        return self.state()

    def _episode_active_locked(self, episode: int) -> bool:
        return self._episode_id == episode and self._mode in (Mode.BREACHED, Mode.LOCKED_STREAMING)

    def _lock_task(self, episode: int) -> None:
        hook = False
        with self._mu:
            if not self._episode_active_locked(episode):
                return
            hook = self._guard.engage(episode, "input devices locked")
            self._actions.lock_engaged = True
            self._actions.stream_enabled = True
            if self._mode is Mode.BREACHED:
                self._mode = Mode.LOCKED_STREAMING
        if hook:
            _run_hook(self._lock_command, "lock")

    def _notify_task(self, episode: int) -> None:
        with self._mu:
            if not self._episode_active_locked(episode):
                return  # unlocked before dispatch: cancelled
            if episode in self._notified_episodes:
                return
            self._notified_episodes.add(episode)
            entered_at = self._entered_at
        message = format_breach_message(
            episode,
            self._camera_id,
            datetime.fromtimestamp(entered_at, tz=timezone.utc),
            recipient=self._recipient,
        )
        receipt = self._notifier.notify(message)
        with self._mu:
            if self._episode_id == episode:
                self._actions.notification_receipt = receipt.receipt_id
        event = "NOTIFY_OK" if receipt.status is DeliveryStatus.SENT else "NOTIFY_FAIL"
        detail = f"receipt={receipt.receipt_id} transport={receipt.transport}"
        if receipt.detail:
            detail += f" {receipt.detail}"
        self._audit.append(event, episode, detail)

    # -- operator commands ---------------------------------------------------

    def unlock(self, reason: str) -> IntrusionState:
        """Release the lock and re-arm. Live streaming stays available to
        authenticated sessions after unlock; only Disarm withdraws it."""
        with self._mu:
            if self._mode not in (Mode.BREACHED, Mode.LOCKED_STREAMING):
                raise NotLocked(f"cannot unlock while {self._mode.value}")
            hook = self._guard.release(self._episode_id, reason)
            self._mode = Mode.ARMED
            self._entered_at = self._now()
            self._actions = BreachActions()
            snap = self._snapshot_locked()
        if hook:
            _run_hook(self._unlock_command, "unlock")
        return snap

    def arm(self) -> IntrusionState:
        with self._mu:
            if self._mode is not Mode.DISARMED:
                raise IllegalTransition(f"cannot arm while {self._mode.value}")
            self._mode = Mode.ARMED
            self._entered_at = self._now()
            self._audit.append("ARM", self._episode_id, "operator arm")
            return self._snapshot_locked()

    def disarm(self) -> IntrusionState:
        with self._mu:
            if self._mode is not Mode.ARMED:
                raise IllegalTransition(f"cannot disarm while {self._mode.value}")
            self._mode = Mode.DISARMED
            self._entered_at = self._now()
            self._audit.append("DISARM", self._episode_id, "operator disarm")
            return self._snapshot_locked()

    # -- health / shutdown -------------------------------------------------

    def record_health(self, ok: bool, detail: str) -> None:
        self._audit.append("HEALTH", self._episode_id, ("ok: " if ok else "degraded: ") + detail)

    def shutdown(self) -> None:
        """Release the guard (if held) so a stop never leaves input locked."""
        hook = False
        with self._mu:
            hook = self._guard.release(self._episode_id, "daemon shutdown")
        if hook:
            _run_hook(self._unlock_command, "unlock")
