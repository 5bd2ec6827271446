"""INI configuration for the daemon.

Layout: one `[camera:<id>]` section per camera, plus `[users]`, `[notifier]`,
`[sensor]`, `[storage]`, and an optional `[control]` for lock hook commands.
Every validation failure raises ConfigError naming the section and key (or
carrying the parser's line number), because "exit 2 and guess" is hostile.
"""
from __future__ import annotations

import configparser
import shlex
from dataclasses import dataclass, field
from pathlib import Path

from gvss.camera import DEFAULT_CADENCE_MS
from gvss.sensor import BeamSourceConfig, SourceKind as SensorKind
from gvss.session import hash_password

CAMERA_SECTION_PREFIX = "camera:"

DEFAULT_SYNTHETIC_WIDTH = 640
DEFAULT_SYNTHETIC_HEIGHT = 480


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class CameraConfig:
    camera_id: str
    name: str
    kind: str  # "synthetic" | "files"
    cadence_ms: int
    width: int = DEFAULT_SYNTHETIC_WIDTH
    height: int = DEFAULT_SYNTHETIC_HEIGHT
    path: str | None = None


@dataclass(frozen=True)
class NotifierConfig:
    transport: str  # "file" | "webhook" | "stdout"
    recipient: str
    file: str | None = None
    url: str | None = None


@dataclass(frozen=True)
class SensorConfig:
    kind: SensorKind
    path: str | None
    poll: BeamSourceConfig


@dataclass(frozen=True)
class DaemonConfig:
    cameras: list[CameraConfig]
    users: dict[str, str]  # username -> salted hash
    notifier: NotifierConfig
    sensor: SensorConfig
    snapshot_dir: str
    audit_log: str
    lock_command: list[str] = field(default_factory=list)
    unlock_command: list[str] = field(default_factory=list)


def _require(parser: configparser.ConfigParser, section: str, key: str) -> str:
    if not parser.has_section(section):
        raise ConfigError(f"missing section [{section}]")
    value = parser.get(section, key, fallback=None)
    if value is None or not value.strip():
        raise ConfigError(f"missing key '{key}' in section [{section}]")
    return value.strip()


def _get_int(parser, section: str, key: str, default: int, minimum: int = 1) -> int:
    raw = parser.get(section, key, fallback=None)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in section [{section}] must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(f"key '{key}' in section [{section}] must be >= {minimum}, got {value}")
    return value


def _camera_from_section(parser, section: str) -> CameraConfig:
    camera_id = section[len(CAMERA_SECTION_PREFIX):].strip()
    if not camera_id:
        raise ConfigError(f"camera section [{section}] has an empty id")
    kind = parser.get(section, "kind", fallback="synthetic").strip()
    if kind not in ("synthetic", "files"):
        raise ConfigError(
            f"key 'kind' in section [{section}] must be 'synthetic' or 'files', got {kind!r}"
        )
    path = parser.get(section, "path", fallback=None)
    if kind == "files":
        if not path:
            raise ConfigError(f"missing key 'path' in section [{section}] (required for kind=files)")
        if not Path(path).is_dir():
            raise ConfigError(f"key 'path' in section [{section}]: not a directory: {path}")
    return CameraConfig(
        camera_id=camera_id,
        name=parser.get(section, "name", fallback=camera_id).strip(),
        kind=kind,
        cadence_ms=_get_int(parser, section, "cadence_ms", DEFAULT_CADENCE_MS),
        width=_get_int(parser, section, "width", DEFAULT_SYNTHETIC_WIDTH, minimum=8),
        height=_get_int(parser, section, "height", DEFAULT_SYNTHETIC_HEIGHT, minimum=8),
        path=path,
    )


def _users_from(parser) -> dict[str, str]:
    if not parser.has_section("users"):
        raise ConfigError("missing section [users]")
    users: dict[str, str] = {}
    for username, value in parser.items("users"):
        value = value.strip()
        if value.startswith("plain:"):
            users[username] = hash_password(value[len("plain:"):])
        elif "$" in value:
            users[username] = value
        else:
            raise ConfigError(
                f"key '{username}' in section [users] must be 'plain:<password>' "
                "or '<salt>$<sha256-hex>'"
            )
    if not users:
        raise ConfigError("section [users] must define at least one account")
    return users


def _notifier_from(parser) -> NotifierConfig:
    transport = parser.get("notifier", "transport", fallback="stdout").strip()
    if transport not in ("file", "webhook", "stdout"):
        raise ConfigError(
            f"key 'transport' in section [notifier] must be file, webhook or stdout, got {transport!r}"
        )
    cfg = NotifierConfig(
        transport=transport,
        recipient=parser.get("notifier", "recipient", fallback="owner").strip(),
        file=parser.get("notifier", "file", fallback=None),
        url=parser.get("notifier", "url", fallback=None),
    )
    if transport == "file" and not cfg.file:
        raise ConfigError("missing key 'file' in section [notifier] (required for transport=file)")
    if transport == "webhook" and not cfg.url:
        raise ConfigError("missing key 'url' in section [notifier] (required for transport=webhook)")
    return cfg


def _sensor_from(parser) -> SensorConfig:
    kind_raw = parser.get("sensor", "kind", fallback="simulated_file").strip()
    daemon_kinds = (SensorKind.SIMULATED_FILE, SensorKind.STDIN_FEED)
    try:
        kind = SensorKind(kind_raw)
        if kind not in daemon_kinds:
            raise ValueError
    except ValueError:
        valid = ", ".join(k.value for k in daemon_kinds)
        raise ConfigError(
            f"key 'kind' in section [sensor] must be one of {valid}, got {kind_raw!r}"
        ) from None
    path = parser.get("sensor", "path", fallback=None)
    if kind is SensorKind.SIMULATED_FILE and not path:
        raise ConfigError("missing key 'path' in section [sensor] (required for kind=simulated_file)")
    return SensorConfig(
        kind=kind,
        path=path,
        poll=BeamSourceConfig(
            kind=kind,
            poll_interval_ms=_get_int(parser, "sensor", "poll_interval_ms", 100, minimum=10),
            debounce_count=_get_int(parser, "sensor", "debounce_count", 2),
        ),
    )


def _command_from(parser, key: str) -> list[str]:
    raw = parser.get("control", key, fallback=None)
    if not raw:
        return []
    try:
        return shlex.split(raw)
    except ValueError as exc:
        raise ConfigError(f"key '{key}' in section [control] is not a valid argument vector: {exc}") from None


def load_config(path: str | Path) -> DaemonConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    cameras = [
        _camera_from_section(parser, section)
        for section in parser.sections()
        if section.startswith(CAMERA_SECTION_PREFIX)
    ]
    if not cameras:
        raise ConfigError(f"no [{CAMERA_SECTION_PREFIX}<id>] sections in {path}")
    seen: set[str] = set()
    for cam in cameras:
        if cam.camera_id in seen:
            raise ConfigError(f"duplicate camera id {cam.camera_id!r}")
        seen.add(cam.camera_id)

    snapshot_dir = _require(parser, "storage", "snapshot_dir")
    audit_log = parser.get("storage", "audit_log", fallback=None)
    if not audit_log:
        audit_log = str(Path(snapshot_dir) / "audit.log")

    return DaemonConfig(
        cameras=cameras,
        users=_users_from(parser),
        notifier=_notifier_from(parser),
        sensor=_sensor_from(parser),
        snapshot_dir=snapshot_dir,
        audit_log=audit_log,
        lock_command=_command_from(parser, "lock_command"),
        unlock_command=_command_from(parser, "unlock_command"),
    )
