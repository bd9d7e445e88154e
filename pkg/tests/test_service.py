import json
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore", DeprecationWarning)
    from starlette.testclient import TestClient

from structscore import builtin_schema
from structscore.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def jsonl(docs):
    return "\n".join(json.dumps(d) for d in docs) + "\n"


REL_DOC = {
    "doc_id": "d1",
    "relations": [{"type": "t", "subj": {"left": 0, "right": 1}, "obj": {"left": 2, "right": 3}}],
}


class TestEndpoints:
    def test_metrics_listing(self, client):
        names = {m["name"] for m in client.get("/metrics").json()}
        assert {"rel_f1", "smatch", "muc4", "ceaf_phi4"} <= names
        verbose = client.get("/metrics", params={"verbose": True}).json()
        assert all("payload" in m for m in verbose)

    def test_validate_schema_ok(self, client):
        res = client.post("/schema/validate", json={"schema": builtin_schema("rel_f1")})
        assert res.status_code == 200
        assert res.json()["ok"] and res.json()["root"] == "RelationSet"

    def test_validate_schema_error_payload(self, client):
        bad = {"types": {"R": {"kind": "Record", "fields": {"x": "Missing"}}}}
        res = client.post("/schema/validate", json={"schema": bad})
        assert res.status_code == 400
        assert res.json()["error"]["kind"] == "schema"
        assert "Missing" in res.json()["error"]["message"]

    def test_eval_roundtrip(self, client):
        text = jsonl([REL_DOC])
        res = client.post("/eval", json={"metrics": ["rel_f1"], "pred_jsonl": text, "gold_jsonl": text})
        assert res.status_code == 200
        assert res.json()["report"]["metrics"]["rel_f1"]["F"] == 1.0

    def test_eval_data_error(self, client):
        res = client.post(
            "/eval",
            json={"metrics": ["rel_f1"], "pred_jsonl": "garbage\n", "gold_jsonl": ""},
        )
        assert res.status_code == 400
        assert res.json()["error"]["kind"] == "data"

    def test_eval_resource_error_status(self, client):
        doc = jsonl([
            {"doc_id": "d", "props": [
                {"rel": "instance", "subj": "x", "obj": {"concept": "boy"}},
                {"rel": "ARG0", "subj": "x", "obj": {"var": "y"}},
            ]}
        ])
        res = client.post(
            "/eval",
            json={"metrics": ["smatch"], "pred_jsonl": doc, "gold_jsonl": doc, "node_limit": 1},
        )
        assert res.status_code == 422
        assert res.json()["error"]["kind"] == "resource"

    def test_explain_endpoint(self, client):
        text = jsonl([REL_DOC])
        res = client.post(
            "/explain",
            json={"metrics": ["rel_f1"], "pred_jsonl": text, "gold_jsonl": text, "doc_id": "d1"},
        )
        assert res.status_code == 200
        assert res.json()["explanation"]["doc_id"] == "d1"

    def test_schema_eval_over_http(self, client):
        docs = jsonl([{"doc_id": "d", "value": REL_DOC["relations"]}])
        res = client.post(
            "/eval",
            json={"schema": builtin_schema("rel_f1"), "pred_jsonl": docs, "gold_jsonl": docs},
        )
        assert res.status_code == 200
        assert res.json()["report"]["metrics"]["schema"]["F"] == 1.0
