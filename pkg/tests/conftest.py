"""Shared fixtures: config file builder, in-process daemon, subprocess daemon,
and an in-process CLI runner that captures output and exit codes.
"""
from __future__ import annotations

import io
import json
import socket
import subprocess
import sys
import time
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import dataclass
from pathlib import Path

import pytest
import requests

from gvss.config import load_config
from gvss.daemon import Daemon


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


DEFAULT_CONFIG = {
    "camera_kind": "synthetic",
    "camera_id": "front",
    "width": 64,
    "height": 48,
    "cadence_ms": 50,
    "username": "alice",
    "password": "secret",
    "transport": "stdout",
    "poll_interval_ms": 20,
    "debounce_count": 2,
}


def write_config(tmp_path: Path, **overrides) -> Path:
    """Write a complete INI config into tmp_path and return its path."""
    values = {**DEFAULT_CONFIG, **overrides}
    sensor_path = values.get("sensor_path") or tmp_path / "beam.txt"
    if not Path(sensor_path).exists():
        Path(sensor_path).write_text("CLEAR\n", encoding="utf-8")
    snapshot_dir = values.get("snapshot_dir") or tmp_path / "snapshots"
    audit_log = values.get("audit_log") or tmp_path / "audit.log"

    lines = [
        f"[camera:{values['camera_id']}]",
        f"kind = {values['camera_kind']}",
    ]
    if values["camera_kind"] == "synthetic":
        lines += [f"width = {values['width']}", f"height = {values['height']}"]
    else:
        lines += [f"path = {values['camera_path']}"]
    if values.get("cadence_ms") is not None:
        lines += [f"cadence_ms = {values['cadence_ms']}"]
    lines += [
        "",
        "[users]",
        f"{values['username']} = plain:{values['password']}",
        "",
        "[notifier]",
        f"transport = {values['transport']}",
        "recipient = owner",
    ]
    if values.get("notify_file"):
        lines += [f"file = {values['notify_file']}"]
    if values.get("notify_url"):
        lines += [f"url = {values['notify_url']}"]
    lines += [
        "",
        "[sensor]",
        "kind = simulated_file",
        f"path = {sensor_path}",
        f"poll_interval_ms = {values['poll_interval_ms']}",
        f"debounce_count = {values['debounce_count']}",
        "",
        "[storage]",
        f"snapshot_dir = {snapshot_dir}",
        f"audit_log = {audit_log}",
    ]
    if values.get("lock_command"):
        lines += ["", "[control]", f"lock_command = {values['lock_command']}"]
        if values.get("unlock_command"):
            lines += [f"unlock_command = {values['unlock_command']}"]
    elif values.get("unlock_command"):
        lines += ["", "[control]", f"unlock_command = {values['unlock_command']}"]

    path = tmp_path / "gvss.ini"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@dataclass
class RunningDaemon:
    url: str
    config_path: Path
    sensor_path: Path
    audit_log: Path
    snapshot_dir: Path
    daemon: Daemon | None = None
    process: subprocess.Popen | None = None

    def login(self, username="alice", password="secret") -> str:
        r = requests.post(f"{self.url}/login",
                          data={"username": username, "password": password}, timeout=5)
        assert r.status_code == 200, r.text
        return r.json()["token"]

    def headers(self, token: str) -> dict:
        return {"X-GVSS-Token": token}

    def trip_beam(self) -> None:
        self.sensor_path.write_text("OBSTRUCTED\n", encoding="utf-8")

    def clear_beam(self) -> None:
        self.sensor_path.write_text("CLEAR\n", encoding="utf-8")

    def audit_lines(self) -> list[str]:
        if not self.audit_log.exists():
            return []
        return [l for l in self.audit_log.read_text("utf-8").splitlines() if l.strip()]


def _paths_from(config_path: Path) -> dict:
    cfg = load_config(config_path)
    return {
        "sensor_path": Path(cfg.sensor.path),
        "audit_log": Path(cfg.audit_log),
        "snapshot_dir": Path(cfg.snapshot_dir),
    }


@pytest.fixture
def running_daemon(tmp_path):
    """An in-process daemon on an ephemeral port, torn down after the test."""
    started: list[Daemon] = []

    def boot(**overrides) -> RunningDaemon:
        config_path = write_config(tmp_path, **overrides)
        daemon = Daemon(load_config(config_path), port=0)
        daemon.start()
        started.append(daemon)
        handle = RunningDaemon(
            url=f"http://127.0.0.1:{daemon.port}",
            config_path=config_path,
            daemon=daemon,
            **_paths_from(config_path),
        )
        return handle

    yield boot
    for daemon in started:
        daemon.stop()


def wait_for_server(url: str, timeout: float = 15.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            requests.get(f"{url}/state", timeout=1)
            return
        except requests.RequestException:
            time.sleep(0.05)
    raise AssertionError(f"daemon at {url} did not come up within {timeout}s")


@pytest.fixture
def daemon_process(tmp_path):
    """A real `gvss serve` subprocess — the shape the acceptance scenarios use."""
    procs: list[subprocess.Popen] = []

    def boot(**overrides) -> RunningDaemon:
        config_path = write_config(tmp_path, **overrides)
        port = free_port()
        proc = subprocess.Popen(
            [sys.executable, "-m", "gvss.cli", "serve", "--config", str(config_path),
             "--port", str(port)],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
        )
        procs.append(proc)
        url = f"http://127.0.0.1:{port}"
        try:
            wait_for_server(url)
        except AssertionError:
            proc.terminate()
            out = proc.communicate(timeout=5)[0]
            raise AssertionError(f"daemon failed to start; output:\n{out}") from None
        return RunningDaemon(
            url=url,
            config_path=config_path,
            process=proc,
            **_paths_from(config_path),
        )

    yield boot
    for proc in procs:
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait(timeout=5)


@dataclass
class CliResult:
    code: int
    out: str
    err: str

    def json(self):
        return json.loads(self.out)


@pytest.fixture
def cli(tmp_path, monkeypatch):
    """Run the CLI in-process with an isolated session cache."""
    session_file = tmp_path / "session.json"
    monkeypatch.setenv("GVSS_SESSION_FILE", str(session_file))

    def run(*args: str) -> CliResult:
        from gvss.cli import main

        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(args))
        return CliResult(code=code, out=out.getvalue(), err=err.getvalue())

    run.session_file = session_file  # type: ignore[attr-defined]
    return run
