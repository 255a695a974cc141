"""Credential hashing and signed session tokens (HMAC, expiring)."""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import re
import time

_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")
_PBKDF2_ITERS = 60_000


class AuthError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def validate_registration(email: str, credential: str) -> None:
    if not _EMAIL_RE.match(email or ""):
        raise AuthError("ValidationFailed", "email is not syntactically valid")
    if len(credential or "") < 8:
        raise AuthError("ValidationFailed", "credential must be at least 8 characters")


def hash_credential(credential: str, salt: bytes | None = None) -> str:
    salt = salt if salt is not None else os.urandom(16)
    digest = hashlib.pbkdf2_hmac("sha256", credential.encode(), salt, _PBKDF2_ITERS)
    return f"{salt.hex()}${digest.hex()}"


def verify_credential(credential: str, stored: str) -> bool:
    try:
        salt_hex, digest_hex = stored.split("$")
    except ValueError:
        return False
    digest = hashlib.pbkdf2_hmac("sha256", credential.encode(),
                                 bytes.fromhex(salt_hex), _PBKDF2_ITERS)
    return hmac.compare_digest(digest.hex(), digest_hex)


def _b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode()


def _unb64(text: str) -> bytes:
    pad = "=" * (-len(text) % 4)
    return base64.urlsafe_b64decode(text + pad)


def issue_token(secret: str, user_id: str, ttl_seconds: int,
                now: float | None = None) -> str:
    payload = {"user_id": user_id, "exp": (now if now is not None else time.time()) + ttl_seconds}
    body = _b64(json.dumps(payload, sort_keys=True).encode())
    sig = hmac.new(secret.encode(), body.encode(), hashlib.sha256).digest()
    return f"{body}.{_b64(sig)}"


def verify_token(secret: str, token: str, now: float | None = None) -> str:
    """Returns the user_id; raises AuthError with TokenInvalid/TokenExpired."""
    try:
        body, sig = token.split(".")
        expected = hmac.new(secret.encode(), body.encode(), hashlib.sha256).digest()
        if not hmac.compare_digest(_unb64(sig), expected):
            raise AuthError("TokenInvalid", "token signature mismatch")
        payload = json.loads(_unb64(body))
        user_id, exp = payload["user_id"], float(payload["exp"])
    except AuthError:
        raise
    except Exception:
        raise AuthError("TokenInvalid", "token is malformed") from None
    if (now if now is not None else time.time()) >= exp:
        raise AuthError("TokenExpired", "token has expired")
    return user_id
