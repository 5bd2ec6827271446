"""The HTTP surface: login, live frames, control, snapshots, state.

Built on the stdlib threading HTTP server; every shared object the handlers
touch (orchestrator, camera hub, store, sessions) already serializes its own
state, so handlers never coordinate with each other directly.
"""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable
from urllib.parse import parse_qs, urlsplit

from gvss import store as store_mod
from gvss.camera import Camera, CameraHub, NoFrameYet, NORMAL_HEIGHT, NORMAL_WIDTH, UnknownCamera
from gvss.orchestrator import NotLocked, Orchestrator
from gvss.pipeline import Encoding, FontSize, RenderSettings, render
from gvss.session import SessionStore, TOKEN_HEADER, UserTable

log = logging.getLogger("gvss.service")

DEFAULT_PORT = 8686
KILL_COMMAND = "Kill"

# Method, path template, and whether a session token is required — the
# authoritative list the 401 sweep and the CLI coverage check iterate.
ROUTE_TABLE = (
    ("POST", "/login", False),
    ("GET", "/state", True),
    ("GET", "/cameras", True),
    ("GET", "/frame", True),
    ("POST", "/control", True),
    ("POST", "/snapshots", True),
    ("GET", "/snapshots", True),
    ("GET", "/snapshots/<id>", True),
    ("DELETE", "/snapshots/<id>", True),
)

_UI_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}

_BOOL_WORDS = {"true": True, "1": True, "false": False, "0": False}


@dataclass
class ServiceContext:
    users: UserTable
    sessions: SessionStore
    hub: CameraHub
    orchestrator: Orchestrator
    store: store_mod.SnapshotStore
    beam_health: Callable[[], str] = lambda: "ok"
    now_fn: Callable[[], datetime] = lambda: datetime.now(timezone.utc)
    ui_dir: Path | None = None
    default_camera_id: str = ""

    def __post_init__(self):
        if not self.default_camera_id:
            descriptors = self.hub.descriptors()
            if descriptors:
                self.default_camera_id = descriptors[0].camera_id


def camera_document(camera: Camera) -> dict:
    d = camera.descriptor
    return {
        "camera_id": d.camera_id,
        "name": d.name,
        "kind": d.kind.value,
        "native_width": d.native_width,
        "native_height": d.native_height,
        "normal_width": NORMAL_WIDTH,
        "normal_height": NORMAL_HEIGHT,
        "cadence_ms": camera.cadence_ms,
    }


def record_document(record: store_mod.SnapshotRecord) -> dict:
    return {
        "snapshot_id": record.snapshot_id,
        "camera_id": record.camera_id,
        "captured_at": record.captured_at,
        "encoding": record.encoding.value,
        "byte_length": record.byte_length,
        "media_type": record.media_type,
    }


class _BadRequest(Exception):
    pass


def _single(params: dict[str, list[str]], key: str) -> str | None:
    values = params.get(key)
    if not values:
        return None
    return values[-1]


def _parse_bool(params, key: str, default: bool) -> bool:
    raw = _single(params, key)
    if raw is None:
        return default
    try:
        return _BOOL_WORDS[raw.lower()]
    except KeyError:
        raise _BadRequest(f"parameter '{key}' must be true or false, got {raw!r}") from None


def _parse_int(params, key: str, default: int) -> int:
    raw = _single(params, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise _BadRequest(f"parameter '{key}' must be an integer, got {raw!r}") from None


def parse_render_settings(params: dict[str, list[str]]) -> RenderSettings:
    """Decode the w/h/constrain/enc/time/font query parameters.

    Defaults are the normal viewing mode: 320x240, constrained, JPEG,
    timestamp on at the medium font.
    """
    enc_raw = _single(params, "enc") or Encoding.JPEG.value
    try:
        encoding = Encoding(enc_raw)
    except ValueError:
        raise _BadRequest(f"parameter 'enc' must be one of "
                          f"{', '.join(e.value for e in Encoding)}, got {enc_raw!r}") from None
    font_raw = _parse_int(params, "font", int(FontSize.MEDIUM))
    try:
        font = FontSize(font_raw)
    except ValueError:
        raise _BadRequest(f"parameter 'font' must be 1, 2 or 3, got {font_raw}") from None
    try:
        return RenderSettings(
            target_width=_parse_int(params, "w", NORMAL_WIDTH),
            target_height=_parse_int(params, "h", NORMAL_HEIGHT),
            constrain=_parse_bool(params, "constrain", True),
            encoding=encoding,
            show_time=_parse_bool(params, "time", True),
            font_size=font,
        )
    except ValueError as exc:
        raise _BadRequest(str(exc)) from None


class GvssRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "gvss"

    # -- plumbing ----------------------------------------------------------

    @property
    def ctx(self) -> ServiceContext:
        return self.server.ctx  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _respond(self, status: int, body: bytes, content_type: str, headers: dict | None = None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, document, headers: dict | None = None):
        body = json.dumps(document).encode("utf-8")
        self._respond(status, body, "application/json", headers)

    def _error(self, status: int, message: str):
        self._json(status, {"error": message})

    def _authenticate(self):
        token = self.headers.get(TOKEN_HEADER)
        session = self.ctx.sessions.validate(token)
        if session is None:
            self._error(401, "unauthorized")
        return session

    def _body_params(self) -> dict[str, list[str]]:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        content_type = (self.headers.get("Content-Type") or "").split(";")[0].strip().lower()
        if content_type == "application/json":
            try:
                doc = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                raise _BadRequest("request body is not valid JSON") from None
            if not isinstance(doc, dict):
                raise _BadRequest("request body must be a JSON object")
            return {k: [str(v)] for k, v in doc.items()}
        return parse_qs(raw.decode("utf-8", "replace"), keep_blank_values=True)

    def _state_document(self) -> dict:
        state = self.ctx.orchestrator.state()
        return {
            "mode": state.mode.value,
            "episode_id": state.episode_id,
            "lock_engaged": state.lock_engaged,
            "beam_health": self.ctx.beam_health(),
        }

    # -- dispatch ----------------------------------------------------------

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def _dispatch(self, method: str):
        url = urlsplit(self.path)
        route = url.path.rstrip("/") or "/"
        params = parse_qs(url.query, keep_blank_values=True)
        try:
            handler = self._resolve(method, route, url.path)
            if handler is None:
                self._error(404, "no such resource")
                return
            handler(params)
        except _BadRequest as exc:
            self._error(400, str(exc))
        except BrokenPipeError:
            pass  # client went away mid-response
        except Exception:
            log.exception("unhandled error serving %s %s", method, self.path)
            try:
                self._error(500, "internal error")
            except OSError:
                pass

    def _resolve(self, method: str, route: str, raw_path: str):
        if method == "GET":
            if route == "/state":
                return self._get_state
            if route == "/cameras":
                return self._get_cameras
            if route == "/frame":
                return self._get_frame
            if route == "/snapshots":
                return self._list_snapshots
            if route.startswith("/snapshots/"):
                return lambda params: self._get_snapshot(route.rsplit("/", 1)[1])
            if route == "/ui" or raw_path.startswith("/ui/"):
                return lambda params: self._serve_ui(raw_path)
        elif method == "POST":
            if route == "/login":
                return self._post_login
            if route == "/control":
                return self._post_control
            if route == "/snapshots":
                return self._post_snapshot
        elif method == "DELETE":
            if route.startswith("/snapshots/"):
                return lambda params: self._delete_snapshot(route.rsplit("/", 1)[1])
        return None

    # -- routes ------------------------------------------------------------

    def _post_login(self, params):
        body = self._body_params()
        username = _single(body, "username")
        password = _single(body, "password")
        if username is None or password is None:
            raise _BadRequest("username and password are required")
        if not self.ctx.users.check(username, password):
            self._error(401, "invalid credentials")
            return
        session = self.ctx.sessions.issue(username)
        cameras = [camera_document(self.ctx.hub.get(d.camera_id)) for d in self.ctx.hub.descriptors()]
        self._json(200, {"token": session.token, "cameras": cameras})

    def _get_state(self, params):
        if self._authenticate() is None:
            return
        self._json(200, self._state_document())

    def _get_cameras(self, params):
        if self._authenticate() is None:
            return
        cameras = [camera_document(self.ctx.hub.get(d.camera_id)) for d in self.ctx.hub.descriptors()]
        self._json(200, cameras)

    def _rendered_frame(self, params):
        """Shared /frame and POST /snapshots path: resolve camera, render
        the latest frame per the request's settings. Returns None after
        having already sent an error response."""
        settings = parse_render_settings(params)
        camera_id = _single(params, "cam") or self.ctx.default_camera_id
        try:
            camera = self.ctx.hub.get(camera_id)
        except UnknownCamera:
            self._error(404, f"unknown camera: {camera_id}")
            return None
        if not self.ctx.orchestrator.frame_access_allowed():
            self._error(409, "live view is disabled while disarmed")
            return None
        try:
            frame = camera.latest()
        except NoFrameYet:
            self._respond(503, b'{"error": "no frame captured yet"}', "application/json",
                          {"Retry-After": "1"})
            return None
        return camera, frame, render(frame, settings, self.ctx.now_fn()), settings

    def _get_frame(self, params):
        if self._authenticate() is None:
            return
        result = self._rendered_frame(params)
        if result is None:
            return
        _camera, frame, image, _settings = result
        self._respond(200, image.data, image.media_type,
                      {"X-Frame-Sequence": str(frame.sequence)})

    def _post_control(self, params):
        if self._authenticate() is None:
            return
        command = _single(params, "Type")
        if command is None:
            command = _single(self._body_params(), "Type")
        if command is None:
            raise _BadRequest("missing parameter 'Type'")
        if command != KILL_COMMAND:
            # The one recognized value, compared exactly — "kill" is a typo,
            # not a command.
            raise _BadRequest(f"unrecognized Type {command!r}")
        try:
            self.ctx.orchestrator.unlock("remote kill command")
        except NotLocked as exc:
            self._error(409, str(exc))
            return
        self._json(200, self._state_document())

    def _post_snapshot(self, params):
        if self._authenticate() is None:
            return
        result = self._rendered_frame(params)
        if result is None:
            return
        camera, frame, image, _settings = result
        try:
            record = self.ctx.store.save(image, camera.descriptor.camera_id, frame.captured_at)
        except store_mod.IoError as exc:
            self._error(507, str(exc))
            return
        self._json(200, record_document(record))

    def _list_snapshots(self, params):
        if self._authenticate() is None:
            return
        self._json(200, [record_document(r) for r in self.ctx.store.list()])

    def _get_snapshot(self, snapshot_id: str):
        if self._authenticate() is None:
            return
        try:
            image = self.ctx.store.fetch(snapshot_id)
        except store_mod.NotFound:
            self._error(404, f"no snapshot {snapshot_id}")
            return
        except store_mod.IoError as exc:
            self._error(507, str(exc))
            return
        self._respond(200, image.data, image.media_type)

    def _delete_snapshot(self, snapshot_id: str):
        if self._authenticate() is None:
            return
        try:
            self.ctx.store.delete(snapshot_id)
        except store_mod.NotFound:
            self._error(404, f"no snapshot {snapshot_id}")
            return
        except store_mod.IoError as exc:
            self._error(507, str(exc))
            return
        self._json(200, {"deleted": snapshot_id})

    def _serve_ui(self, raw_path: str):
        root = self.ctx.ui_dir
        if root is None:
            self._error(404, "no UI bundle installed")
            return
        rel = raw_path[len("/ui"):].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        try:
            target.relative_to(root.resolve())
        except ValueError:
            self._error(404, "no such resource")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._error(404, "no such resource")
            return
        content_type = _UI_CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
        self._respond(200, target.read_bytes(), content_type)


class GvssServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], ctx: ServiceContext):
        super().__init__(address, GvssRequestHandler)
        self.ctx = ctx


def build_server(ctx: ServiceContext, bind: str = "127.0.0.1", port: int = DEFAULT_PORT) -> GvssServer:
    """Bind the service socket. OSError (e.g. port in use) propagates."""
    return GvssServer((bind, port), ctx)


def serve_forever(server: GvssServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, name="gvss-http", daemon=True)
    thread.start()
    return thread
