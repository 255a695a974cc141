"""Versioned, checksummed model artifacts.

An artifact is a single JSON document carrying the fitted model, the
exact encoding/scaling fitted on its training split, the feature order,
and training metadata, so any stored prediction can be re-verified
bit-for-bit against the artifact that produced it.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json

import numpy as np

from .errors import ArtifactCorrupt, ValueOutOfDomain
from .dataset import _apply_scaling
from .metrics import CGPA_BANDS
from .models import model_from_dict, model_to_dict
from .schema import FactorSchema, StudentRecord

FORMAT_VERSION = 1


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def checksum(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


def schema_hash(schema: FactorSchema) -> str:
    return hashlib.sha256(schema.to_json().encode()).hexdigest()


class ModelArtifact:
    def __init__(self, payload: dict):
        self.payload = payload
        self._model = None

    # -- accessors ---------------------------------------------------------

    @property
    def version(self) -> int:
        return self.payload["version"]

    @property
    def model_kind(self) -> str:
        return self.payload["model_kind"]

    @property
    def feature_columns(self) -> list:
        return list(self.payload["feature_columns"])

    @property
    def metrics(self) -> dict:
        return self.payload["training_metadata"].get("metrics", {})

    @property
    def model(self):
        if self._model is None:
            self._model = model_from_dict(self.payload["model"])
        return self._model

    @property
    def is_linear(self) -> bool:
        return self.payload["model"]["kind"] == "linear"

    @property
    def feature_means(self) -> np.ndarray:
        return np.asarray(self.payload["feature_means"], dtype=float)

    # -- serving -----------------------------------------------------------

    def encode_input(self, record: StudentRecord | dict, schema: FactorSchema) -> np.ndarray:
        """Encode one CGPA-less input with the artifact's stored transform."""
        values = record.values if isinstance(record, StudentRecord) else record
        bad_fields = []
        row = np.zeros(len(self.feature_columns))
        for j, name in enumerate(self.feature_columns):
            spec = schema[name]
            if name not in values:
                bad_fields.append(name)
                continue
            try:
                v = spec.validate_value(values[name])
            except ValueOutOfDomain:
                bad_fields.append(name)
                continue
            if spec.is_continuous:
                enc = float(v)
            else:
                enc = float(self.payload["encoding_map"][name][v])
            row[j] = _apply_scaling(np.array([enc]), self.payload["scaling"][name])[0]
        if bad_fields:
            raise ValueOutOfDomain(-1, ",".join(bad_fields), "invalid or missing")
        return row

    def predict_unit(self, rows: np.ndarray) -> np.ndarray:
        """Model output on the unit CGPA scale, unclamped."""
        return np.asarray(self.model.predict(np.atleast_2d(rows)), dtype=float).ravel()

    def predict_cgpa(self, rows: np.ndarray) -> np.ndarray:
        """Service-facing output: unit output times 4, clamped to [0, 4]."""
        return np.clip(self.predict_unit(rows) * 4.0, 0.0, 4.0)

    def feature_domains(self) -> dict:
        """Admissible scaled values per discrete feature (for level sweeps)."""
        out = {}
        for name in self.feature_columns:
            emap = self.payload["encoding_map"].get(name)
            if not emap:
                continue
            s = self.payload["scaling"][name]
            vals = _apply_scaling(np.asarray(sorted(emap.values()), dtype=float), s)
            out[name] = [float(v) for v in vals]
        return out

    def level_labels(self) -> dict:
        """scaled encoded value -> raw level string, per discrete feature."""
        out = {}
        for name in self.feature_columns:
            emap = self.payload["encoding_map"].get(name)
            if not emap:
                continue
            s = self.payload["scaling"][name]
            labels = {}
            for level, code in emap.items():
                scaled = float(_apply_scaling(np.array([float(code)]), s)[0])
                labels[scaled] = level
            out[name] = labels
        return out

    # -- persistence ---------------------------------------------------------

    def dump(self) -> str:
        return json.dumps({"payload": self.payload, "checksum": checksum(self.payload)},
                          indent=2)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dump())

    @classmethod
    def loads(cls, text: str) -> "ModelArtifact":
        try:
            doc = json.loads(text)
            payload, check = doc["payload"], doc["checksum"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ArtifactCorrupt(f"unreadable artifact: {exc}") from None
        if checksum(payload) != check:
            raise ArtifactCorrupt("checksum mismatch")
        return cls(payload)

    @classmethod
    def load(cls, path) -> "ModelArtifact":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())


def build_artifact(model, model_kind: str, version: int, feature_columns, scaling: dict,
                   encoding_map: dict, schema: FactorSchema, feature_means,
                   metadata: dict) -> ModelArtifact:
    payload = {
        "format_version": FORMAT_VERSION,
        "version": int(version),
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "model_kind": model_kind,
        "model": model_to_dict(model),
        "feature_columns": list(feature_columns),
        "target": "CGPA",
        "scaling": {k: dict(v) for k, v in scaling.items()},
        "encoding_map": {k: dict(v) for k, v in encoding_map.items()},
        "schema_hash": schema_hash(schema),
        "feature_means": [float(v) for v in feature_means],
        "cgpa_bands": [{"label": b.label, "lo": b.lo, "hi": b.hi,
                        "right_closed": b.right_closed} for b in CGPA_BANDS],
        "training_metadata": metadata,
    }
    return ModelArtifact(payload)
