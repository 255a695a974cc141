"""Service configuration: one JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    secret: str = "dev-secret-change-me"
    store_path: str = "cgpakit.db"
    artifact_dir: str = "artifacts"
    base_corpus: str = ""            # CSV the base model was / will be trained on
    token_ttl_seconds: int = 86400
    admin_emails: list = field(default_factory=list)
    min_labeled_rows: int = 50       # smallest corpus retrain will accept
    feedback_weight: float = 1.0     # relative weight of feedback rows (1 = equal)
    model_kind: str = "ridge"
    model_params: dict = field(default_factory=dict)
    train_seed: int = 0
    ui_dir: str = ""                 # optional static frontend to serve

    ENV_PREFIX = "CGPAKIT_"

    @classmethod
    def load(cls, path: str | None = None) -> "ServiceConfig":
        cfg = cls()
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            for key, value in doc.items():
                if not hasattr(cfg, key):
                    raise KeyError(f"unknown config key {key!r}")
                setattr(cfg, key, value)
        for key in ("host", "port", "secret", "store_path", "artifact_dir",
                    "base_corpus", "token_ttl_seconds", "min_labeled_rows",
                    "model_kind", "train_seed", "ui_dir"):
            raw = os.environ.get(cls.ENV_PREFIX + key.upper())
            if raw is not None:
                current = getattr(cfg, key)
                setattr(cfg, key, type(current)(raw) if not isinstance(current, str) else raw)
        return cfg
