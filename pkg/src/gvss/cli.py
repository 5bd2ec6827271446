"""Command line: `serve` runs the daemon; the client verbs drive a running
daemon over HTTP so everything is scriptable headlessly.

Exit codes are fixed so shell scripts can branch on them:
  0 success, 1 HTTP 4xx, 2 configuration error, 3 listen port in use,
  4 simulated breach not observed in time, 5 HTTP 5xx, 6 network failure.
"""
from __future__ import annotations

import argparse
import errno
import json
import logging
import os
import signal
import stat
import sys
import threading
import time
from pathlib import Path

import requests

from gvss.camera import CameraError
from gvss.config import ConfigError, load_config
from gvss.daemon import Daemon
from gvss.sensor import SourceKind as SensorKind
from gvss.service import DEFAULT_PORT
from gvss.session import TOKEN_HEADER

EXIT_OK = 0
EXIT_HTTP_4XX = 1
EXIT_CONFIG = 2
EXIT_PORT_BOUND = 3
EXIT_BREACH_TIMEOUT = 4
EXIT_HTTP_5XX = 5
EXIT_NETWORK = 6

DEFAULT_SERVER = f"http://127.0.0.1:{DEFAULT_PORT}"
SESSION_FILE_ENV = "GVSS_SESSION_FILE"
CONFIG_ENV = "GVSS_CONFIG"
REQUEST_TIMEOUT = 10.0
BREACH_WAIT_SECONDS = 5.0


def _fail(message: str, code: int) -> int:
    print(f"gvss: {message}", file=sys.stderr)
    return code


# -- session cache -----------------------------------------------------------

def _session_path() -> Path:
    override = os.environ.get(SESSION_FILE_ENV)
    return Path(override) if override else Path.home() / ".gvss-session"


def _store_session(token: str, server: str) -> None:
    path = _session_path()
    payload = json.dumps({"token": token, "server": server}) + "\n"
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, stat.S_IRUSR | stat.S_IWUSR)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(payload)


def _load_session() -> dict:
    path = _session_path()
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, ValueError):
        return {}


# -- HTTP client plumbing ------------------------------------------------------

class _ClientExit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _request(method: str, server: str, route: str, *, token: str | None = None,
             params: dict | None = None, data: dict | None = None) -> requests.Response:
    headers = {TOKEN_HEADER: token} if token else {}
    try:
        return requests.request(
            method,
            server.rstrip("/") + route,
            headers=headers,
            params=params,
            data=data,
            timeout=REQUEST_TIMEOUT,
        )
    except requests.RequestException as exc:
        raise _ClientExit(EXIT_NETWORK, f"cannot reach {server}: {exc}") from exc


def _status_exit(response: requests.Response) -> int:
    if response.status_code >= 500:
        return EXIT_HTTP_5XX
    if response.status_code >= 400:
        return EXIT_HTTP_4XX
    return EXIT_OK


def _report(response: requests.Response) -> int:
    body = response.text.strip()
    code = _status_exit(response)
    print(body, file=sys.stdout if code == EXIT_OK else sys.stderr)
    return code


def _require_token(args) -> str:
    session = _load_session()
    token = session.get("token")
    if not token:
        raise _ClientExit(EXIT_HTTP_4XX, "no session cached; run `gvss login` first")
    return token


def _render_params(args) -> dict:
    params = {}
    if getattr(args, "cam", None):
        params["cam"] = args.cam
    for flag, key in (("width", "w"), ("height", "h"), ("constrain", "constrain"),
                      ("enc", "enc"), ("time", "time"), ("font", "font")):
        value = getattr(args, flag, None)
        if value is not None:
            params[key] = str(value)
    return params


# -- client verbs ------------------------------------------------------------

def _cmd_login(args) -> int:
    response = _request("POST", args.server, "/login",
                        data={"username": args.user, "password": args.password})
    if response.status_code == 200:
        token = response.json().get("token", "")
        _store_session(token, args.server)
    return _report(response)


def _cmd_state(args) -> int:
    return _report(_request("GET", args.server, "/state", token=_require_token(args)))


def _cmd_cameras(args) -> int:
    return _report(_request("GET", args.server, "/cameras", token=_require_token(args)))


def _cmd_kill(args) -> int:
    return _report(_request("POST", args.server, "/control",
                            token=_require_token(args), params={"Type": args.type}))


def _write_image(response: requests.Response, out: str) -> None:
    Path(out).write_bytes(response.content)
    sequence = response.headers.get("X-Frame-Sequence")
    suffix = f" (sequence {sequence})" if sequence else ""
    print(f"wrote {len(response.content)} bytes to {out}{suffix}")


def _cmd_frame(args) -> int:
    response = _request("GET", args.server, "/frame",
                        token=_require_token(args), params=_render_params(args))
    if response.status_code != 200:
        return _report(response)
    _write_image(response, args.out)
    return EXIT_OK


def _cmd_snapshot(args) -> int:
    token = _require_token(args)
    if args.list:
        return _report(_request("GET", args.server, "/snapshots", token=token))
    if args.get:
        response = _request("GET", args.server, f"/snapshots/{args.get}", token=token)
        if response.status_code != 200:
            return _report(response)
        if not args.out:
            raise _ClientExit(EXIT_HTTP_4XX, "--get needs --out <path>")
        _write_image(response, args.out)
        return EXIT_OK
    if args.delete:
        return _report(_request("DELETE", args.server, f"/snapshots/{args.delete}", token=token))
    return _report(_request("POST", args.server, "/snapshots",
                            token=token, params=_render_params(args)))


def _cmd_simulate_breach(args) -> int:
    try:
        config = load_config(_config_path(args))
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    if config.sensor.kind is not SensorKind.SIMULATED_FILE:
        return _fail(
            f"simulate-breach needs sensor kind 'simulated_file', config has "
            f"{config.sensor.kind.value!r}",
            EXIT_CONFIG,
        )
    token = _require_token(args)

    Path(config.sensor.path).write_text("OBSTRUCTED\n", encoding="utf-8")
    poll = config.sensor.poll
    # One debounce window: enough polls to accept the new state.
    time.sleep(poll.poll_interval_ms * (poll.debounce_count + 1) / 1000.0)

    deadline = time.monotonic() + BREACH_WAIT_SECONDS
    while True:
        response = _request("GET", args.server, "/state", token=token)
        if response.status_code != 200:
            return _report(response)
        document = response.json()
        if document.get("mode") in ("Breached", "LockedStreaming"):
            print(response.text.strip())
            return EXIT_OK
        if time.monotonic() >= deadline:
            return _fail(f"state still {document.get('mode')!r} after "
                         f"{BREACH_WAIT_SECONDS:.0f}s", EXIT_BREACH_TIMEOUT)
        time.sleep(0.1)


# -- serve ---------------------------------------------------------------------

def _config_path(args) -> str:
    if args.config:
        return args.config
    fallback = os.environ.get(CONFIG_ENV)
    if fallback:
        return fallback
    raise ConfigError(f"no --config given and {CONFIG_ENV} is unset")


def _cmd_serve(args) -> int:
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        config = load_config(_config_path(args))
        daemon = Daemon(config, bind=args.bind, port=args.port)
    except (ConfigError, CameraError) as exc:
        return _fail(str(exc), EXIT_CONFIG)

    try:
        daemon.start()
    except OSError as exc:
        daemon.stop()
        if exc.errno in (errno.EADDRINUSE, errno.EACCES):
            return _fail(f"cannot listen on {args.bind}:{args.port}: {exc}", EXIT_PORT_BOUND)
        return _fail(str(exc), EXIT_PORT_BOUND)

    stop = threading.Event()

    def _on_signal(signum, _frame):
        stop.set()

    signal.signal(signal.SIGTERM, _on_signal)
    signal.signal(signal.SIGINT, _on_signal)

    print(daemon.banner(), flush=True)
    try:
        stop.wait()
    finally:
        daemon.stop()
    return EXIT_OK


# -- argument surface ------------------------------------------------------------

def _add_server_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", default=DEFAULT_SERVER,
                        help=f"daemon base URL (default {DEFAULT_SERVER})")


def _add_render_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cam", help="camera id (default: first configured)")
    parser.add_argument("--width", type=int, help="target width in pixels")
    parser.add_argument("--height", type=int, help="target height in pixels")
    parser.add_argument("--constrain", choices=("true", "false"),
                        help="preserve aspect ratio (default true)")
    parser.add_argument("--enc", choices=("jpeg", "png24", "png8", "pnggray"),
                        help="image encoding (default jpeg)")
    parser.add_argument("--time", choices=("true", "false"),
                        help="burn the capture timestamp into the frame (default true)")
    parser.add_argument("--font", type=int, choices=(1, 2, 3),
                        help="timestamp font scale (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gvss", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True)

    serve = sub.add_parser("serve", help="run the surveillance daemon")
    serve.add_argument("--config", help=f"INI config path (fallback: ${CONFIG_ENV})")
    serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    serve.add_argument("--bind", default="127.0.0.1")
    serve.add_argument("--log-level", default="info",
                       choices=("debug", "info", "warning", "error"))
    serve.set_defaults(func=_cmd_serve)

    login = sub.add_parser("login", help="authenticate and cache the session token")
    _add_server_arg(login)
    login.add_argument("--user", required=True)
    login.add_argument("--password", required=True)
    login.set_defaults(func=_cmd_login)

    frame = sub.add_parser("frame", help="fetch one rendered frame")
    _add_server_arg(frame)
    _add_render_args(frame)
    frame.add_argument("--out", required=True, help="file to write the image to")
    frame.set_defaults(func=_cmd_frame)

    snapshot = sub.add_parser("snapshot", help="save/list/fetch/delete stored snapshots")
    _add_server_arg(snapshot)
    _add_render_args(snapshot)
    group = snapshot.add_mutually_exclusive_group()
    group.add_argument("--list", action="store_true", help="list stored snapshots")
    group.add_argument("--get", metavar="ID", help="download a stored snapshot")
    group.add_argument("--delete", metavar="ID", help="delete a stored snapshot")
    snapshot.add_argument("--out", help="output path for --get")
    snapshot.set_defaults(func=_cmd_snapshot)

    kill = sub.add_parser("kill", help="send the unlock control command")
    _add_server_arg(kill)
    kill.add_argument("--type", default="Kill", help=argparse.SUPPRESS)
    kill.set_defaults(func=_cmd_kill)

    state = sub.add_parser("state", help="show the protection state")
    _add_server_arg(state)
    state.set_defaults(func=_cmd_state)

    cameras = sub.add_parser("cameras", help="list configured cameras")
    _add_server_arg(cameras)
    cameras.set_defaults(func=_cmd_cameras)

    breach = sub.add_parser("simulate-breach",
                            help="trip the simulated beam and wait for the daemon to react")
    _add_server_arg(breach)
    breach.add_argument("--config", help=f"INI config path (fallback: ${CONFIG_ENV})")
    breach.set_defaults(func=_cmd_simulate_breach)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ClientExit as exc:
        return _fail(str(exc), exc.code)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
