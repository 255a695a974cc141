"""Embedded relational persistence (sqlite, single file, transactional)."""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid

_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    email TEXT UNIQUE NOT NULL,
    credential_hash TEXT NOT NULL,
    is_admin INTEGER NOT NULL DEFAULT 0,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS predictions (
    prediction_id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    input_json TEXT NOT NULL,
    predicted_cgpa REAL NOT NULL,
    band TEXT NOT NULL,
    attribution_json TEXT NOT NULL,
    recommendations_json TEXT NOT NULL,
    model_version INTEGER NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS feedback (
    feedback_id TEXT PRIMARY KEY,
    prediction_id TEXT NOT NULL REFERENCES predictions(prediction_id),
    user_id TEXT NOT NULL REFERENCES users(user_id),
    rating INTEGER NOT NULL,
    actual_cgpa REAL,
    comment TEXT,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS artifacts (
    version INTEGER PRIMARY KEY,
    path TEXT NOT NULL,
    checksum TEXT NOT NULL,
    active INTEGER NOT NULL DEFAULT 0,
    created_at REAL NOT NULL
);
"""


class Store:
    """All writes serialize through one lock; reads share the connection."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self):
        self._conn.close()

    # -- users ---------------------------------------------------------------

    def create_user(self, email: str, credential_hash: str, is_admin: bool) -> str:
        user_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO users (user_id, email, credential_hash, is_admin, created_at)"
                " VALUES (?,?,?,?,?)",
                (user_id, email, credential_hash, int(is_admin), time.time()))
        return user_id

    def user_by_email(self, email: str):
        cur = self._conn.execute("SELECT * FROM users WHERE email = ?", (email,))
        return cur.fetchone()

    def user_by_id(self, user_id: str):
        cur = self._conn.execute("SELECT * FROM users WHERE user_id = ?", (user_id,))
        return cur.fetchone()

    # -- predictions ----------------------------------------------------------

    def add_prediction(self, user_id: str, input_doc: dict, predicted_cgpa: float,
                       band: str, attribution: dict, recommendations: list,
                       model_version: int) -> str:
        prediction_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO predictions VALUES (?,?,?,?,?,?,?,?,?)",
                (prediction_id, user_id, json.dumps(input_doc), predicted_cgpa, band,
                 json.dumps(attribution), json.dumps(recommendations),
                 model_version, time.time()))
        return prediction_id

    def prediction(self, prediction_id: str):
        cur = self._conn.execute("SELECT * FROM predictions WHERE prediction_id = ?",
                                 (prediction_id,))
        return cur.fetchone()

    def predictions_for_user(self, user_id: str) -> list:
        cur = self._conn.execute(
            "SELECT * FROM predictions WHERE user_id = ? ORDER BY created_at", (user_id,))
        return cur.fetchall()

    # -- feedback ---------------------------------------------------------------

    def add_feedback(self, prediction_id: str, user_id: str, rating: int,
                     actual_cgpa, comment) -> str:
        feedback_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO feedback VALUES (?,?,?,?,?,?,?)",
                (feedback_id, prediction_id, user_id, rating, actual_cgpa, comment,
                 time.time()))
        return feedback_id

    def feedback_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM feedback").fetchone()[0]

    def labeled_feedback(self) -> list:
        """(input record, actual_cgpa) pairs usable as a retraining corpus."""
        cur = self._conn.execute(
            "SELECT p.input_json, f.actual_cgpa FROM feedback f"
            " JOIN predictions p ON p.prediction_id = f.prediction_id"
            " WHERE f.actual_cgpa IS NOT NULL ORDER BY f.created_at")
        return [(json.loads(row["input_json"]), row["actual_cgpa"]) for row in cur]

    # -- artifacts ---------------------------------------------------------------

    def register_artifact(self, version: int, path: str, checksum: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO artifacts (version, path, checksum, active, created_at)"
                " VALUES (?,?,?,0,?)", (version, path, checksum, time.time()))

    def set_active_artifact(self, version: int) -> None:
        with self._lock, self._conn:
            self._conn.execute("UPDATE artifacts SET active = 0")
            self._conn.execute("UPDATE artifacts SET active = 1 WHERE version = ?",
                               (version,))

    def artifact_row(self, version: int):
        cur = self._conn.execute("SELECT * FROM artifacts WHERE version = ?", (version,))
        return cur.fetchone()

    def active_artifact_row(self):
        cur = self._conn.execute("SELECT * FROM artifacts WHERE active = 1")
        return cur.fetchone()

    def latest_version(self) -> int:
        row = self._conn.execute("SELECT MAX(version) FROM artifacts").fetchone()
        return row[0] or 0
