"""Assembly of the whole daemon from one parsed config.

Owns the lifecycle: storage recovery, audit log, camera loops, sensor poll
loop, and the HTTP service. `stop()` is safe to call once things are partly
up (start failures unwind cleanly) and always releases the lock guard and
flushes the audit log on the way out.
"""
from __future__ import annotations

import logging
import os
import sys
import threading
from pathlib import Path

from gvss.audit import AuditLog
from gvss.camera import Camera, CameraDescriptor, CameraHub, FileSequenceSource, SourceKind, SyntheticSource
from gvss.config import CameraConfig, DaemonConfig
from gvss.notify import FileTransport, Notifier, StdoutTransport, WebhookTransport
from gvss.orchestrator import Orchestrator
from gvss.sensor import (
    BeamTransition,
    SimulatedFileSource,
    SourceKind as SensorKind,
    StdinFeedSource,
    poll_loop,
)
from gvss.service import DEFAULT_PORT, GvssServer, ServiceContext, build_server, serve_forever
from gvss.session import SessionStore, UserTable
from gvss.store import SnapshotStore

log = logging.getLogger("gvss.daemon")

UI_DIR_ENV = "GVSS_UI_DIR"


def _build_camera(cfg: CameraConfig) -> Camera:
    if cfg.kind == "files":
        source = FileSequenceSource(cfg.path)
        kind = SourceKind.FILE_SEQUENCE
    else:
        source = SyntheticSource(cfg.width, cfg.height)
        kind = SourceKind.SYNTHETIC
    descriptor = CameraDescriptor(
        camera_id=cfg.camera_id,
        name=cfg.name,
        kind=kind,
        native_width=source.width,
        native_height=source.height,
    )
    return Camera(descriptor, source, cfg.cadence_ms)


def _find_ui_dir() -> Path | None:
    override = os.environ.get(UI_DIR_ENV)
    candidates = [Path(override)] if override else [Path("frontend") / "dist"]
    for candidate in candidates:
        if candidate.is_dir():
            return candidate
    return None


def _warm_pipeline() -> None:
    """Run each encoder once so JIT compilation happens at startup, not on the
    first live request."""
    from datetime import datetime, timezone

    from gvss.camera import synthetic_frame
    from gvss.pipeline import Encoding, RenderSettings, render

    frame = synthetic_frame(16, 16, 0)
    when = datetime.now(timezone.utc)
    for encoding in (Encoding.JPEG, Encoding.PNG8, Encoding.PNG_GRAY):
        render(frame, RenderSettings(8, 8, encoding=encoding), when)


class Daemon:
    def __init__(self, config: DaemonConfig, *, bind: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.config = config
        self.bind = bind
        self.port = port

        self.audit = AuditLog(config.audit_log)
        self.store = SnapshotStore(config.snapshot_dir)
        self.hub = CameraHub([_build_camera(c) for c in config.cameras])
        self.notifier = Notifier(self._build_transport())
        self.orchestrator = Orchestrator(
            self.audit,
            self.notifier,
            recipient=config.notifier.recipient,
            camera_id=config.cameras[0].camera_id,
            lock_command=config.lock_command or None,
            unlock_command=config.unlock_command or None,
        )
        self.sessions = SessionStore()
        self.users = UserTable(config.users)

        self._beam_health = "ok"
        self._health_mu = threading.Lock()
        self._stop = threading.Event()
        self._sensor_thread: threading.Thread | None = None
        self.server: GvssServer | None = None
        self._server_thread: threading.Thread | None = None
        self._stopped = False

    # -- construction helpers ----------------------------------------------

    def _build_transport(self):
        cfg = self.config.notifier
        if cfg.transport == "file":
            return FileTransport(cfg.file)
        if cfg.transport == "webhook":
            return WebhookTransport(cfg.url)
        return StdoutTransport()

    def _build_beam_source(self):
        cfg = self.config.sensor
        if cfg.kind is SensorKind.SIMULATED_FILE:
            path = Path(cfg.path)
            if not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text("CLEAR\n", encoding="utf-8")
            return SimulatedFileSource(path)
        return StdinFeedSource(sys.stdin)

    def beam_health(self) -> str:
        with self._health_mu:
            return self._beam_health

    def _on_health(self, ok: bool, detail: str) -> None:
        with self._health_mu:
            self._beam_health = "ok" if ok else "degraded"
        self.orchestrator.record_health(ok, detail)

    def _on_transition(self, transition: BeamTransition) -> None:
        self.orchestrator.handle_transition(transition)

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        """Bring everything up; on any failure, tear down what already runs."""
        try:
            _warm_pipeline()
            ctx = ServiceContext(
                users=self.users,
                sessions=self.sessions,
                hub=self.hub,
                orchestrator=self.orchestrator,
                store=self.store,
                beam_health=self.beam_health,
                ui_dir=_find_ui_dir(),
            )
            self.server = build_server(ctx, self.bind, self.port)
            self.port = self.server.server_address[1]

            self.hub.start()
            source = self._build_beam_source()
            self._sensor_thread = threading.Thread(
                target=poll_loop,
                args=(source, self.config.sensor.poll, self._on_transition),
                kwargs={"health_sink": self._on_health, "stop": self._stop},
                name="gvss-sensor",
                daemon=True,
            )
            self._sensor_thread.start()
            self._server_thread = serve_forever(self.server)
        except BaseException:
            self.stop()
            raise

    def stop(self) -> None:
        if self._stopped:
            return
        self._stopped = True
        self._stop.set()
        if self.server is not None:
            self.server.shutdown()
            self.server.server_close()
        if self._server_thread is not None:
            self._server_thread.join(timeout=5)
        if self._sensor_thread is not None:
            self._sensor_thread.join(timeout=5)
        self.hub.stop()
        self.orchestrator.shutdown()
        self.audit.close()

    def banner(self) -> str:
        cameras = ", ".join(d.camera_id for d in self.hub.descriptors())
        return (
            f"gvss listening on http://{self.bind}:{self.port} "
            f"(cameras: {cameras}; sensor: {self.config.sensor.kind.value})"
        )
