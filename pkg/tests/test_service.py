"""HTTP layer: auth, gate errors over the wire, persistence, statelessness."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from botender.errors import ConflictError, NotFoundError
from botender.gateway.config import ProviderConfig
from botender.service.app import AppRuntime, create_app
from botender.service.config import ServerSeed, ServiceConfig
from botender.service.store import DocumentStore
from tests.conftest import (
    DETECT_AMBIGUITY,
    DETECT_CONSEQUENCE,
    DETECT_NARROWNESS,
    EVAL_AMBIGUITY,
    GEN_AMBIGUITY,
    NO_TRIGGER,
    ORCHESTRATOR,
    PASS_EVAL,
    TASK_AGENT,
)

ECHO_DRAFT = [{"op": "add", "task": {
    "id": "t-echo", "name": "Echo", "trigger": "When someone says echo.",
    "action": "Repeat it back.",
}}]

SERVICE_SCRIPT = [
    {"match": ["determining whether a task should be triggered", "hi botender"],
     "response": {"taskId": "hello-botender"}},
    {"match": TASK_AGENT, "response": {"response": "Hello! 🙂"}},
    {"match": ORCHESTRATOR, "response": NO_TRIGGER},
    {"match": DETECT_AMBIGUITY,
     "response": [{"underspecified_phrase": "says echo",
                   "description": "when is something said?"}]},
    {"match": DETECT_NARROWNESS, "response": []},
    {"match": DETECT_CONSEQUENCE, "response": []},
    {"match": GEN_AMBIGUITY,
     "response": [{"underspecified_phrase": "says echo",
                   "interpretation": "indirect mentions count",
                   "reasoning": "boundary probe",
                   "case": {"channel": "#general", "user_message": "echo echo"}}]},
    {"match": EVAL_AMBIGUITY, "response": PASS_EVAL},
]

ALICE = {"x-botender-token": "tok-alice"}
BOB = {"x-botender-token": "tok-bob"}
CARA = {"x-botender-token": "tok-cara"}
ZED = {"x-botender-token": "tok-zed"}  # member of another server only


def build_runtime(tmp_path, store_name=None) -> AppRuntime:
    script_path = tmp_path / "script.json"
    if not script_path.exists():
        script_path.write_text(json.dumps(SERVICE_SCRIPT), encoding="utf-8")
    config = ServiceConfig(
        provider=ProviderConfig(kind="scripted", script_path=str(script_path)),
        store_path=str(tmp_path / store_name) if store_name else None,
        servers=(ServerSeed(id="s1", channels=("#general",),
                            members=("alice", "bob", "cara")),),
        sessions=(
            {"token": "tok-alice", "user_id": "alice",
             "servers": [{"id": "s1", "role": "admin"}]},
            {"token": "tok-bob", "user_id": "bob", "servers": [{"id": "s1"}]},
            {"token": "tok-cara", "user_id": "cara", "servers": [{"id": "s1"}]},
            {"token": "tok-zed", "user_id": "zed", "servers": [{"id": "elsewhere"}]},
        ),
    )
    return AppRuntime.build(config)


@pytest.fixture()
def client(tmp_path) -> TestClient:
    return TestClient(create_app(build_runtime(tmp_path)))


def create_proposal(client, headers=ALICE, draft=None):
    body = {"title": "Echo things", "description": "let the bot echo",
            "draft": draft if draft is not None else ECHO_DRAFT}
    response = client.post("/servers/s1/proposals", json=body, headers=headers)
    assert response.status_code == 201, response.text
    return response.json()


def run_test_endpoint(client, proposal_id, headers=ALICE):
    response = client.post(f"/proposals/{proposal_id}/test",
                           json={"draft": ECHO_DRAFT}, headers=headers)
    assert response.status_code == 200, response.text
    return response.json()


class TestAuth:
    def test_missing_token_is_401(self, client):
        assert client.get("/servers/s1/tasks").status_code == 401

    def test_unknown_token_is_401(self, client):
        response = client.get("/servers/s1/tasks",
                              headers={"x-botender-token": "nope"})
        assert response.status_code == 401

    def test_every_id_bearing_route_enforces_membership(self, client):
        """Exhaustive route enumeration: an unauthorized session gets 403
        everywhere a server or proposal id appears in the path."""
        proposal = create_proposal(client)
        pid = proposal["id"]
        report = run_test_endpoint(client, pid)
        case_id = report["generated"][0]["case_id"]
        client.post(f"/cases/{case_id}/votes",
                    json={"direction": "up", "proposal_id": pid,
                          "case": report["generated"][0]},
                    headers=ALICE)

        fill = {"server_id": "s1", "proposal_id": pid, "case_id": case_id}
        exercised = set()
        app = client.app
        for route in app.routes:
            path = getattr(route, "path", "")
            if "{" not in path:
                continue
            concrete = path.format(**fill)
            for method in route.methods - {"HEAD", "OPTIONS"}:
                response = client.request(method, concrete, headers=ZED,
                                          json={} if method == "POST" else None)
                assert response.status_code == 403, (method, concrete, response.text)
                exercised.add((method, path))
        # The endpoint inventory all carries ids; make sure we really hit it.
        assert len(exercised) >= 11


class TestProposalFlow:
    def test_create_returns_document_with_counters(self, client):
        proposal = create_proposal(client)
        assert proposal["status"] == "open"
        assert proposal["counters"] == {"good": 0, "bad": 0, "tbd": 0}
        assert proposal["thread_ref"] == "thread-1"

    def test_full_loop_reaches_deployment(self, client):
        proposal = create_proposal(client)
        pid = proposal["id"]
        report = run_test_endpoint(client, pid)
        assert len(report["generated"]) == 1
        case = report["generated"][0]

        vote = client.post(f"/cases/{case['case_id']}/votes",
                           json={"direction": "up", "proposal_id": pid, "case": case},
                           headers=ALICE)
        assert vote.status_code == 200
        assert vote.json() == {"case_id": case["case_id"], "ups": 1, "downs": 0}

        saved = client.post(f"/proposals/{pid}/edits",
                            json={"draft": ECHO_DRAFT,
                                  "report_hash": report["draft_hash"]},
                            headers=ALICE)
        assert saved.status_code == 200, saved.text
        assert saved.json()["version"] == 1

        for headers in (BOB, CARA):
            assert client.post(f"/cases/{case['case_id']}/votes",
                               json={"direction": "up"},
                               headers=headers).status_code == 200
        for headers in (ALICE, BOB, CARA):
            assert client.post(f"/proposals/{pid}/deploy-votes",
                               json={}, headers=headers).status_code == 200

        deployed = client.post(f"/proposals/{pid}/deploy", headers=ALICE)
        assert deployed.status_code == 200, deployed.text
        assert deployed.json()["version"] == 1

        tasks = client.get("/servers/s1/tasks", headers=BOB).json()
        assert any(task["id"] == "t-echo" for task in tasks["tasks"])
        assert client.get(f"/proposals/{pid}", headers=BOB).json()["status"] == "deployed"

    def test_deploy_below_threshold_names_the_gate(self, client):
        proposal = create_proposal(client)
        pid = proposal["id"]
        report = run_test_endpoint(client, pid)
        case = report["generated"][0]
        client.post(f"/cases/{case['case_id']}/votes",
                    json={"direction": "up", "proposal_id": pid, "case": case},
                    headers=ALICE)
        client.post(f"/proposals/{pid}/deploy-votes", json={}, headers=ALICE)
        response = client.post(f"/proposals/{pid}/deploy", headers=ALICE)
        assert response.status_code == 422
        assert response.json()["code"] == "deployment_threshold"

    def test_save_without_votes_names_the_gate(self, client):
        proposal = create_proposal(client)
        pid = proposal["id"]
        report = run_test_endpoint(client, pid)
        response = client.post(f"/proposals/{pid}/edits",
                               json={"draft": ECHO_DRAFT,
                                     "report_hash": report["draft_hash"]},
                               headers=ALICE)
        assert response.status_code == 422
        assert response.json()["code"] == "save_vote_gate"

    def test_mismatched_report_hash_is_stale(self, client):
        proposal = create_proposal(client)
        response = client.post(f"/proposals/{proposal['id']}/edits",
                               json={"draft": ECHO_DRAFT, "report_hash": "outdated"},
                               headers=ALICE)
        assert response.status_code == 409
        assert response.json()["code"] == "stale_report"

    def test_status_round_trip(self, client):
        proposal = create_proposal(client)
        pid = proposal["id"]
        closed = client.post(f"/proposals/{pid}/status", json={"to": "closed"},
                             headers=ALICE)
        assert closed.json()["status"] == "closed"
        reopened = client.post(f"/proposals/{pid}/status", json={"to": "open"},
                               headers=ALICE)
        assert reopened.json()["status"] == "open"

    def test_manual_case_endpoint(self, client):
        proposal = create_proposal(client)
        response = client.post(f"/proposals/{proposal['id']}/cases",
                               json={"channel": "#general",
                                     "user_message": "typed by hand"},
                               headers=BOB)
        assert response.status_code == 201
        body = response.json()
        assert body["origin"] == "manual"
        assert body["votes"] == {"bob": "up"}

    def test_unknown_proposal_is_404(self, client):
        assert client.get("/proposals/ghost", headers=ALICE).status_code == 404


class TestPlayground:
    def test_round_trip_without_touching_state(self, client):
        before = client.get("/servers/s1/tasks", headers=ALICE).json()
        response = client.post("/servers/s1/playground",
                               json={"channel": "#botender", "message": "hi botender"},
                               headers=ALICE)
        assert response.status_code == 200
        assert response.json() == {"triggered_task": "Hello Botender",
                                   "bot_response": "Hello! 🙂"}
        assert client.get("/servers/s1/tasks", headers=ALICE).json() == before

    def test_no_trigger_is_explicit(self, client):
        response = client.post("/servers/s1/playground",
                               json={"channel": "#general", "message": "nothing"},
                               headers=ALICE)
        assert response.json() == {"triggered_task": None, "bot_response": None}


class TestStore:
    def test_read_your_writes(self):
        store = DocumentStore()
        store.persist("servers", "s1", {"id": "s1"}, None)
        assert store.load("servers", "s1").body == {"id": "s1"}

    def test_two_writers_same_revision_one_wins(self):
        store = DocumentStore()
        record = store.persist("proposals", "p1", {"v": 0}, None)
        store.persist("proposals", "p1", {"v": 1}, record.revision)
        with pytest.raises(ConflictError):
            store.persist("proposals", "p1", {"v": 2}, record.revision)
        assert store.load("proposals", "p1").body == {"v": 1}

    def test_unknown_document_is_not_found(self):
        store = DocumentStore()
        with pytest.raises(NotFoundError):
            store.load("cases", "missing")

    def test_create_over_existing_conflicts(self):
        store = DocumentStore()
        store.persist("cases", "c1", {}, None)
        with pytest.raises(ConflictError):
            store.persist("cases", "c1", {}, None)

    def test_unknown_collection_is_rejected(self):
        with pytest.raises(ValueError):
            DocumentStore().load("sessions", "x")

    def test_file_snapshot_round_trip(self, tmp_path):
        path = tmp_path / "store.json"
        store = DocumentStore(path)
        store.persist("servers", "s1", {"id": "s1"}, None)
        reloaded = DocumentStore(path)
        assert reloaded.load("servers", "s1").body == {"id": "s1"}


class TestStatelessness:
    def test_replicas_over_the_same_store_agree(self, tmp_path):
        runtime_a = build_runtime(tmp_path, store_name="store.json")
        client_a = TestClient(create_app(runtime_a))
        proposal = create_proposal(client_a)
        pid = proposal["id"]
        report = run_test_endpoint(client_a, pid)
        case = report["generated"][0]
        client_a.post(f"/cases/{case['case_id']}/votes",
                      json={"direction": "up", "proposal_id": pid, "case": case},
                      headers=ALICE)

        runtime_b = build_runtime(tmp_path, store_name="store.json")
        client_b = TestClient(create_app(runtime_b))
        for path in (f"/proposals/{pid}", "/servers/s1/tasks", "/servers/s1/proposals"):
            assert (client_a.get(path, headers=ALICE).json()
                    == client_b.get(path, headers=ALICE).json()), path
