"""HTTP service: accounts, prediction with explanation, feedback, retraining.

One process hosts the model registry; activation swaps an immutable
artifact reference atomically, so every in-flight request sees exactly
one model version end to end.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time

import numpy as np
from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse

from ..artifacts import ModelArtifact
from ..dataset import load_csv
from ..errors import ValueOutOfDomain
from ..explain import recommend, shapley_exact_linear, shapley_sampled
from ..metrics import bin_cgpa
from ..pipeline import train_model_pipeline
from ..schema import StudentRecord, default_schema
from .auth import (AuthError, hash_credential, issue_token, validate_registration,
                   verify_credential, verify_token)
from .config import ServiceConfig
from .store import Store

log = logging.getLogger("cgpakit.service")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, fields=None):
        self.status = status
        self.code = code
        self.message = message
        self.fields = fields
        super().__init__(message)


class ModelRegistry:
    """Holds the active artifact; activation is an atomic reference swap."""

    def __init__(self):
        self._active: ModelArtifact | None = None
        self._lock = threading.Lock()

    def activate(self, artifact: ModelArtifact) -> None:
        with self._lock:
            self._active = artifact

    def active(self) -> ModelArtifact | None:
        return self._active


def _records_from_corpus(config: ServiceConfig, schema):
    if not config.base_corpus or not os.path.exists(config.base_corpus):
        raise ApiError(409, "InsufficientData",
                       f"base corpus not found: {config.base_corpus!r}")
    return load_csv(config.base_corpus, schema)


def _feedback_records(store: Store, schema, weight: float) -> list:
    out = []
    repeats = max(1, int(round(weight)))
    for input_doc, actual in store.labeled_feedback():
        values = dict(input_doc)
        values["CGPA"] = float(actual)
        try:
            rec = StudentRecord.build(values, schema)
        except Exception:
            continue  # skip feedback rows that no longer validate
        out.extend([rec] * repeats)
    return out


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    schema = default_schema()
    store = Store(config.store_path)
    registry = ModelRegistry()
    os.makedirs(config.artifact_dir, exist_ok=True)

    app = FastAPI(title="cgpakit service")
    app.state.config = config
    app.state.store = store
    app.state.registry = registry

    # -- infrastructure ------------------------------------------------------

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        if exc.fields:
            body["fields"] = exc.fields
        return JSONResponse(status_code=exc.status, content=body)

    @app.middleware("http")
    async def _request_log(request: Request, call_next):
        start = time.time()
        response = await call_next(request)
        log.info(json.dumps({
            "method": request.method, "path": request.url.path,
            "status": response.status_code,
            "ms": round((time.time() - start) * 1000, 2)}))
        return response

    def authenticated(request: Request) -> str:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise ApiError(401, "TokenInvalid", "missing bearer token")
        try:
            user_id = verify_token(config.secret, header[len("Bearer "):])
        except AuthError as exc:
            raise ApiError(401, exc.code, str(exc)) from None
        if store.user_by_id(user_id) is None:
            raise ApiError(401, "TokenInvalid", "token subject unknown")
        return user_id

    def admin_only(user_id: str = Depends(authenticated)) -> str:
        row = store.user_by_id(user_id)
        if not row["is_admin"]:
            raise ApiError(403, "Forbidden", "administrator role required")
        return user_id

    def _activate_version(version: int) -> ModelArtifact:
        row = store.artifact_row(version)
        if row is None:
            raise ApiError(404, "NotFound", f"no artifact with version {version}")
        try:
            artifact = ModelArtifact.load(row["path"])
        except FileNotFoundError:
            raise ApiError(500, "ArtifactCorrupt", "artifact file missing") from None
        except Exception as exc:
            raise ApiError(500, "ArtifactCorrupt", str(exc)) from None
        if artifact.version != version:
            raise ApiError(500, "ArtifactCorrupt", "artifact version mismatch")
        registry.activate(artifact)
        store.set_active_artifact(version)
        return artifact

    def _train_new_version(min_rows: int) -> ModelArtifact:
        records = _records_from_corpus(config, schema)
        records = records + _feedback_records(store, schema, config.feedback_weight)
        if len(records) < min_rows:
            raise ApiError(409, "InsufficientData",
                           f"need at least {min_rows} labeled rows, have {len(records)}")
        version = store.latest_version() + 1
        artifact = train_model_pipeline(
            records, schema, model_kind=config.model_kind,
            params=config.model_params, seed=config.train_seed, version=version,
            source=config.base_corpus)
        path = os.path.join(config.artifact_dir, f"model_v{version}.json")
        artifact.save(path)
        store.register_artifact(version, path, artifact.payload["schema_hash"])
        return artifact

    def ensure_model() -> None:
        row = store.active_artifact_row()
        if row is not None:
            _activate_version(row["version"])
            return
        if config.base_corpus and os.path.exists(config.base_corpus):
            artifact = _train_new_version(min_rows=2)
            _activate_version(artifact.version)

    app.state.ensure_model = ensure_model

    # -- open endpoints ---------------------------------------------------------

    @app.post("/api/register")
    def register(body: dict):
        email = str(body.get("email", "")).strip().lower()
        credential = str(body.get("credential", ""))
        try:
            validate_registration(email, credential)
        except AuthError as exc:
            raise ApiError(422, "ValidationFailed", str(exc)) from None
        if store.user_by_email(email) is not None:
            raise ApiError(409, "DuplicateEmail", "email already registered")
        is_admin = email in [e.lower() for e in config.admin_emails]
        user_id = store.create_user(email, hash_credential(credential), is_admin)
        return {"user_id": user_id}

    @app.post("/api/login")
    def login(body: dict):
        email = str(body.get("email", "")).strip().lower()
        credential = str(body.get("credential", ""))
        row = store.user_by_email(email)
        if row is None or not verify_credential(credential, row["credential_hash"]):
            raise ApiError(401, "BadCredentials", "unknown email or wrong credential")
        token = issue_token(config.secret, row["user_id"], config.token_ttl_seconds)
        return {"token": token, "expires_in": config.token_ttl_seconds}

    @app.get("/api/schema")
    def get_schema():
        return {"target": "CGPA", "factors": json.loads(schema.to_json())["factors"]}

    # -- guarded endpoints ---------------------------------------------------------

    @app.post("/api/predict")
    def predict(body: dict, user_id: str = Depends(authenticated)):
        artifact = registry.active()
        if artifact is None:
            raise ApiError(503, "ModelUnavailable", "no active model version")
        input_doc = body.get("input")
        if not isinstance(input_doc, dict):
            raise ApiError(422, "ValidationFailed", "body must carry an input object",
                           fields=["input"])
        try:
            x = artifact.encode_input(input_doc, schema)
        except ValueOutOfDomain as exc:
            raise ApiError(422, "ValidationFailed", "invalid factor values",
                           fields=exc.acronym.split(",")) from None
        unit = float(artifact.predict_unit(x[None, :])[0])
        cgpa = float(np.clip(unit * 4.0, 0.0, 4.0))
        band = bin_cgpa(cgpa).label

        model_fn = artifact.predict_unit
        names = tuple(artifact.feature_columns)
        if artifact.is_linear:
            attr = shapley_exact_linear(artifact.model, x, artifact.feature_means[None, :],
                                        feature_names=names)
        else:
            attr = shapley_sampled(model_fn, x, artifact.feature_means[None, :],
                                   n_samples=150, seed=0, feature_names=names)
        recs = recommend(attr, model_fn, x, artifact.feature_domains(),
                         k=3, level_labels=artifact.level_labels())
        raw_values = [input_doc.get(n) for n in names]
        attribution = attr.to_dict(raw_values=raw_values)

        record_input = {k: v for k, v in input_doc.items() if k in names}
        prediction_id = store.add_prediction(user_id, record_input, cgpa, band,
                                             attribution, recs, artifact.version)
        return {"prediction_id": prediction_id, "predicted_cgpa": cgpa,
                "band": band, "attribution": attribution, "recommendations": recs,
                "model_version": artifact.version}

    @app.post("/api/feedback")
    def feedback(body: dict, user_id: str = Depends(authenticated)):
        prediction_id = str(body.get("prediction_id", ""))
        row = store.prediction(prediction_id)
        if row is None:
            raise ApiError(404, "NotFound", "prediction not found")
        if row["user_id"] != user_id:
            raise ApiError(403, "Forbidden", "prediction belongs to another user")
        rating = body.get("rating")
        if not isinstance(rating, int) or not 1 <= rating <= 5:
            raise ApiError(422, "BadRating", "rating must be an integer in 1..5")
        actual = body.get("actual_cgpa")
        if actual is not None:
            try:
                actual = float(actual)
            except (TypeError, ValueError):
                raise ApiError(422, "ValidationFailed", "actual_cgpa must be numeric",
                               fields=["actual_cgpa"]) from None
            if not 0.0 <= actual <= 4.0:
                raise ApiError(422, "ValidationFailed", "actual_cgpa outside [0,4]",
                               fields=["actual_cgpa"])
        comment = body.get("comment")
        feedback_id = store.add_feedback(prediction_id, user_id, rating, actual, comment)
        return {"feedback_id": feedback_id}

    @app.get("/api/model/info")
    def model_info():
        artifact = registry.active()
        if artifact is None:
            return {"active_version": None, "feedback_count": store.feedback_count()}
        return {"active_version": artifact.version,
                "model_kind": artifact.model_kind,
                "metrics": artifact.metrics,
                "training_metadata": {k: v for k, v in
                                      artifact.payload["training_metadata"].items()
                                      if k != "metrics"},
                "feedback_count": store.feedback_count(),
                "labeled_feedback_count": len(store.labeled_feedback())}

    @app.post("/api/admin/retrain")
    def retrain(user_id: str = Depends(admin_only)):
        artifact = _train_new_version(config.min_labeled_rows)
        return {"version": artifact.version, "metrics": artifact.metrics}

    @app.post("/api/admin/activate")
    def activate(body: dict, user_id: str = Depends(admin_only)):
        version = body.get("version")
        if not isinstance(version, int):
            raise ApiError(422, "ValidationFailed", "version must be an integer",
                           fields=["version"])
        artifact = _activate_version(version)
        return {"active_version": artifact.version}

    if config.ui_dir and os.path.isdir(config.ui_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    ensure_model()
    return app
