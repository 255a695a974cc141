import concurrent.futures
import json
from dataclasses import replace

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cgpakit.artifacts import ModelArtifact
from cgpakit.schema import default_schema
from cgpakit.semgen import default_sem_spec, generate_synthetic, write_csv
from cgpakit.service import ServiceConfig, create_app

SCHEMA = default_schema()


@pytest.fixture(scope="module")
def corpus_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "base.csv"
    records, _ = generate_synthetic(replace(default_sem_spec(), seed=21), 400, SCHEMA)
    write_csv(records, SCHEMA, path)
    return str(path)


@pytest.fixture()
def client(tmp_path, corpus_csv):
    cfg = ServiceConfig(store_path=str(tmp_path / "svc.db"),
                        artifact_dir=str(tmp_path / "artifacts"),
                        base_corpus=corpus_csv,
                        admin_emails=["admin@uni.edu"],
                        min_labeled_rows=10,
                        secret="test-secret-0123456789")
    app = create_app(cfg)
    with TestClient(app) as c:
        c.app_config = cfg
        yield c


def register_and_login(client, email="student@uni.edu", credential="longenough1"):
    r = client.post("/api/register", json={"email": email, "credential": credential})
    assert r.status_code == 200, r.text
    r = client.post("/api/login", json={"email": email, "credential": credential})
    assert r.status_code == 200
    return {"Authorization": f"Bearer {r.json()['token']}"}


def valid_input():
    inp = {}
    for f in SCHEMA.factors:
        if f.acronym == "CGPA":
            continue
        inp[f.acronym] = f.levels[1] if f.levels else (f.range[0] + f.range[1]) / 2
    return inp


def test_register_login_round_trip(client):
    headers = register_and_login(client)
    r = client.get("/api/model/info")
    assert r.status_code == 200
    assert r.json()["active_version"] == 1
    assert r.json()["feedback_count"] == 0
    r = client.post("/api/predict", json={"input": valid_input()}, headers=headers)
    assert r.status_code == 200


def test_duplicate_email_rejected(client):
    register_and_login(client, email="dup@uni.edu")
    r = client.post("/api/register", json={"email": "dup@uni.edu",
                                           "credential": "longenough1"})
    assert r.status_code == 409
    assert r.json()["code"] == "DuplicateEmail"


def test_wrong_credential_rejected(client):
    register_and_login(client, email="who@uni.edu")
    r = client.post("/api/login", json={"email": "who@uni.edu",
                                        "credential": "wrong-credential"})
    assert r.status_code == 401
    assert r.json()["code"] == "BadCredentials"
    assert "token" not in r.json()


def test_short_credential_rejected(client):
    r = client.post("/api/register", json={"email": "x@uni.edu", "credential": "short"})
    assert r.status_code == 422


def test_tampered_token_rejected(client):
    headers = register_and_login(client, email="tamper@uni.edu")
    token = headers["Authorization"].split(" ", 1)[1]
    body, sig = token.split(".")
    flipped = ("A" if sig[0] != "A" else "B") + sig[1:]
    bad = {"Authorization": f"Bearer {body}.{flipped}"}
    r = client.post("/api/predict", json={"input": valid_input()}, headers=bad)
    assert r.status_code == 401
    assert r.json()["code"] == "TokenInvalid"


def test_guarded_endpoints_share_auth_error_shape(client):
    for method, path in (("POST", "/api/predict"), ("POST", "/api/feedback"),
                         ("POST", "/api/admin/retrain"), ("POST", "/api/admin/activate")):
        r = client.request(method, path, json={})
        assert r.status_code == 401
        assert set(r.json()) == {"code", "message"}


def test_predict_contract(client):
    headers = register_and_login(client, email="p@uni.edu")
    r = client.post("/api/predict", json={"input": valid_input()}, headers=headers)
    doc = r.json()
    assert 0.0 <= doc["predicted_cgpa"] <= 4.0
    assert doc["band"] in ("<2.50", "2.50-2.99", "3.00-3.49", "3.50-4.00")
    att = doc["attribution"]
    total = att["base_value"] + sum(c["phi"] for c in att["contributions"])
    assert total == pytest.approx(doc["predicted_cgpa"] / 4.0, abs=1e-9)
    # repeated identical request under the same model version is identical
    r2 = client.post("/api/predict", json={"input": valid_input()}, headers=headers)
    assert r2.json()["predicted_cgpa"] == doc["predicted_cgpa"]
    assert r2.json()["model_version"] == doc["model_version"]


def test_unknown_level_names_field(client):
    headers = register_and_login(client, email="badlvl@uni.edu")
    bad = valid_input()
    bad["FJ"] = "Astronaut"
    r = client.post("/api/predict", json={"input": bad}, headers=headers)
    assert r.status_code == 422
    assert r.json()["code"] == "ValidationFailed"
    assert "FJ" in r.json()["fields"]


def test_stored_prediction_reproducible_from_artifact(client, tmp_path):
    headers = register_and_login(client, email="repro@uni.edu")
    r = client.post("/api/predict", json={"input": valid_input()}, headers=headers)
    doc = r.json()
    store = client.app.state.store
    row = store.prediction(doc["prediction_id"])
    artifact_row = store.artifact_row(row["model_version"])
    artifact = ModelArtifact.load(artifact_row["path"])
    x = artifact.encode_input(json.loads(row["input_json"]), SCHEMA)
    again = float(artifact.predict_cgpa(x[None, :])[0])
    assert again == pytest.approx(row["predicted_cgpa"], abs=1e-9)


def test_feedback_rules(client):
    headers = register_and_login(client, email="fb@uni.edu")
    r = client.post("/api/predict", json={"input": valid_input()}, headers=headers)
    pid = r.json()["prediction_id"]

    r = client.post("/api/feedback", json={"prediction_id": pid, "rating": 6},
                    headers=headers)
    assert r.status_code == 422 and r.json()["code"] == "BadRating"

    r = client.post("/api/feedback", json={"prediction_id": "nope", "rating": 3},
                    headers=headers)
    assert r.status_code == 404

    other = register_and_login(client, email="other@uni.edu")
    r = client.post("/api/feedback", json={"prediction_id": pid, "rating": 3},
                    headers=other)
    assert r.status_code == 403 and r.json()["code"] == "Forbidden"

    before = client.get("/api/model/info").json()["feedback_count"]
    r = client.post("/api/feedback",
                    json={"prediction_id": pid, "rating": 4, "actual_cgpa": 3.1,
                          "comment": "close"},
                    headers=headers)
    assert r.status_code == 200
    after = client.get("/api/model/info").json()
    assert after["feedback_count"] == before + 1
    assert after["labeled_feedback_count"] >= 1


def test_admin_gate_and_retrain_determinism(client):
    user = register_and_login(client, email="user@uni.edu")
    r = client.post("/api/admin/retrain", headers=user)
    assert r.status_code == 403

    admin = register_and_login(client, email="admin@uni.edu")
    r = client.post("/api/admin/retrain", headers=admin)
    assert r.status_code == 200
    v2 = r.json()["version"]
    assert v2 == 2
    # no feedback was labeled: metrics must match version 1 exactly
    store = client.app.state.store
    m1 = ModelArtifact.load(store.artifact_row(1)["path"]).metrics
    m2 = ModelArtifact.load(store.artifact_row(2)["path"]).metrics
    assert abs(m1["test"]["mae"] - m2["test"]["mae"]) < 1e-9
    assert abs(m1["test"]["r2"] - m2["test"]["r2"]) < 1e-9

    r = client.post("/api/admin/activate", json={"version": 99}, headers=admin)
    assert r.status_code == 404
    r = client.post("/api/admin/activate", json={"version": v2}, headers=admin)
    assert r.status_code == 200
    assert client.get("/api/model/info").json()["active_version"] == v2


def test_no_mixed_versions_during_activation(client):
    headers = register_and_login(client, email="soak@uni.edu")
    admin = register_and_login(client, email="admin@uni.edu")
    inp = valid_input()
    # labeled feedback shifts the retrained model so the two versions
    # return distinguishable predictions
    for i in range(15):
        pid = client.post("/api/predict", json={"input": inp},
                          headers=headers).json()["prediction_id"]
        client.post("/api/feedback",
                    json={"prediction_id": pid, "rating": 3,
                          "actual_cgpa": 0.5 + 0.2 * (i % 10)},
                    headers=headers)
    r = client.post("/api/admin/retrain", headers=admin)
    new_version = r.json()["version"]

    def one_prediction(_):
        resp = client.post("/api/predict", json={"input": inp}, headers=headers)
        assert resp.status_code == 200
        doc = resp.json()
        return doc["model_version"], doc["predicted_cgpa"]

    seen = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        futures = [pool.submit(one_prediction, i) for i in range(30)]
        client.post("/api/admin/activate", json={"version": new_version},
                    headers=admin)
        futures += [pool.submit(one_prediction, i) for i in range(30)]
        for f in concurrent.futures.as_completed(futures):
            version, value = f.result()
            seen.setdefault(version, set()).add(value)
    # every response is attributable to exactly one version's model output
    assert set(seen) <= {1, new_version}
    for version, values in seen.items():
        assert len(values) == 1, f"version {version} produced mixed outputs {values}"
    if len(seen) == 2:
        assert seen[1] != seen[new_version]  # the versions are distinguishable


def test_model_info_metrics_match_artifact(client):
    info = client.get("/api/model/info").json()
    store = client.app.state.store
    artifact = ModelArtifact.load(store.artifact_row(info["active_version"])["path"])
    assert info["metrics"] == artifact.metrics
