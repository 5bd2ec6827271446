"""Login sessions: salted credential checks and expiring bearer tokens.

Tokens are 32 hex characters (128 bits from the OS CSPRNG) carried in the
``X-GVSS-Token`` request header. The 30-minute TTL is sliding: every
authenticated request pushes the expiry out again.
"""
from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable

SESSION_TTL_SECONDS = 30 * 60
TOKEN_HEADER = "X-GVSS-Token"


def hash_password(password: str, salt: str | None = None) -> str:
    """Encode a password as `<salt>$<sha256(salt + password)>`."""
    if salt is None:
        salt = secrets.token_hex(8)
    digest = hashlib.sha256((salt + password).encode("utf-8")).hexdigest()
    return f"{salt}${digest}"


def verify_password(password: str, encoded: str) -> bool:
    salt, _, digest = encoded.partition("$")
    candidate = hashlib.sha256((salt + password).encode("utf-8")).hexdigest()
    return hmac.compare_digest(candidate, digest)


# Stand-in hash checked for unknown usernames so the reject path does the
# same work (and takes the same time) whether the user exists or not.
_DECOY_HASH = hash_password("decoy", salt="0" * 16)


class UserTable:
    """username -> salted password hash, as loaded from config."""

    def __init__(self, users: dict[str, str]):
        self._users = dict(users)

    def __len__(self) -> int:
        return len(self._users)

    def check(self, username: str, password: str) -> bool:
        encoded = self._users.get(username)
        if encoded is None:
            verify_password(password, _DECOY_HASH)
            return False
        return verify_password(password, encoded)


@dataclass
class Session:
    token: str
    username: str
    issued_at: float
    expires_at: float


class SessionStore:
    def __init__(self, ttl_seconds: float = SESSION_TTL_SECONDS, now_fn: Callable[[], float] = time.time):
        self._ttl = ttl_seconds
        self._now = now_fn
        self._mu = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def issue(self, username: str) -> Session:
        now = self._now()
        session = Session(
            token=secrets.token_hex(16),
            username=username,
            issued_at=now,
            expires_at=now + self._ttl,
        )
        with self._mu:
            self._sessions[session.token] = session
        return session

    def validate(self, token: str | None) -> Session | None:
        """Return the live session for `token`, sliding its expiry; else None."""
        if not token:
            return None
        now = self._now()
        with self._mu:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= now:
                del self._sessions[token]
                return None
            session.expires_at = now + self._ttl
            return session

    def revoke(self, token: str) -> None:
        with self._mu:
            self._sessions.pop(token, None)

    def purge_expired(self) -> int:
        now = self._now()
        with self._mu:
            dead = [t for t, s in self._sessions.items() if s.expires_at <= now]
            for t in dead:
                del self._sessions[t]
            return len(dead)
