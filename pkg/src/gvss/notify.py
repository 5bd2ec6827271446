"""Breach notification over a pluggable transport.

The real-world medium is an SMS gateway, so message bodies stay within 160
characters; the transports shipped here are a local file, an HTTP webhook in
SMS-gateway style, and stdout. One attempt per message, no retries — a failed
delivery shows up in the receipt and the audit log, never as an exception in
the breach path.
"""
from __future__ import annotations

import itertools
import sys
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import requests

MAX_BODY_LENGTH = 160
WEBHOOK_TIMEOUT_SECONDS = 5.0


class TransportError(Exception):
    pass


class DeliveryStatus(Enum):
    SENT = "Sent"
    FAILED = "Failed"


@dataclass(frozen=True)
class NotificationMessage:
    recipient: str
    body: str
    episode_id: int
    created_at: float

    def __post_init__(self):
        if not self.body:
            raise ValueError("notification body must not be empty")
        if len(self.body) > MAX_BODY_LENGTH:
            raise ValueError(f"notification body exceeds {MAX_BODY_LENGTH} characters")


@dataclass(frozen=True)
class DeliveryReceipt:
    receipt_id: str
    transport: str
    status: DeliveryStatus
    detail: str = ""


def _iso_utc(when: datetime) -> str:
    return when.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def format_breach_message(
    episode_id: int, camera_id: str, when: datetime, *, recipient: str
) -> NotificationMessage:
    """`INTRUSION ep=<id> cam=<camera_id> at=<ISO-8601>`, truncated to fit.

    An oversized camera id is cut with a trailing ellipsis so the body never
    blows the SMS-shaped length cap.
    """
    prefix = f"INTRUSION ep={episode_id} cam="
    suffix = f" at={_iso_utc(when)}"
    budget = MAX_BODY_LENGTH - len(prefix) - len(suffix)
    cam = camera_id
    if len(cam) > budget:
        cam = cam[: max(budget - 1, 0)] + "…"
    return NotificationMessage(
        recipient=recipient,
        body=prefix + cam + suffix,
        episode_id=episode_id,
        created_at=when.timestamp(),
    )


class FileTransport:
    """Appends one message per line to a UTF-8 file."""

    name = "file"

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._mu = threading.Lock()

    def send(self, message: NotificationMessage) -> None:
        stamp = _iso_utc(datetime.fromtimestamp(message.created_at, tz=timezone.utc))
        line = (
            f"{stamp} episode_id={message.episode_id} "
            f"recipient={message.recipient} body={message.body}\n"
        )
        try:
            with self._mu, open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
        except OSError as exc:
            raise TransportError(f"file transport failed: {exc}") from exc


class WebhookTransport:
    """POSTs `recipient=<r>&body=<urlencoded>` form data; 2xx means sent."""

    name = "webhook"

    def __init__(self, url: str, timeout: float = WEBHOOK_TIMEOUT_SECONDS):
        self.url = url
        self.timeout = timeout

    def send(self, message: NotificationMessage) -> None:
        try:
            resp = requests.post(
                self.url,
                data={"recipient": message.recipient, "body": message.body},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"webhook unreachable: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise TransportError(f"webhook returned HTTP {resp.status_code}")


class StdoutTransport:
    name = "stdout"

    def send(self, message: NotificationMessage) -> None:
        print(f"NOTIFY recipient={message.recipient} body={message.body}", file=sys.stdout)


class Notifier:
    """One transport attempt per message; outcome lives in the receipt."""

    def __init__(self, transport):
        self._transport = transport
        self._ids = itertools.count(1)
        self._mu = threading.Lock()

    def _next_receipt_id(self) -> str:
        with self._mu:
            return f"r{next(self._ids):06d}"

    def notify(self, message: NotificationMessage) -> DeliveryReceipt:
        receipt_id = self._next_receipt_id()
        try:
            self._transport.send(message)
        except Exception as exc:  # transport failures must never escape
            return DeliveryReceipt(receipt_id, self._transport.name, DeliveryStatus.FAILED, str(exc))
        return DeliveryReceipt(receipt_id, self._transport.name, DeliveryStatus.SENT, "")
