import json

import pytest
from fastapi.testclient import TestClient

from helmsight.service import create_app

STATE = {
    "ready_plan": "true",
    "current_objective": "waypoint",
    "progress_type": "transiting",
    "same_objective": "true",
    "obstacle_found": "false",
}


@pytest.fixture(scope="module")
def client(deployment_tree, tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("knowledge")
    app = create_app(model=deployment_tree, data_dir=data_dir)
    with TestClient(app) as test_client:
        test_client.data_dir = data_dir
        yield test_client


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["model"] == "tree"


def test_vocabulary_lists_closed_domains(client):
    payload = client.get("/vocabulary").json()
    names = [feature["name"] for feature in payload["features"]]
    assert names == [
        "ready_plan",
        "current_objective",
        "progress_type",
        "same_objective",
        "obstacle_found",
    ]
    assert payload["behaviours"][0] == "wait"
    assert len(payload["behaviours"]) == 6


def test_predict_returns_distribution(client):
    response = client.post("/predict", json={"state": STATE})
    assert response.status_code == 200
    payload = response.json()
    assert payload["behaviour"] == "transit"
    assert abs(sum(payload["probabilities"].values()) - 1.0) < 1e-9


def test_predict_rejects_bad_category_naming_field(client):
    bad = dict(STATE, obstacle_found="maybe")
    response = client.post("/predict", json={"state": bad})
    assert response.status_code == 400
    assert "obstacle_found" in response.json()["detail"]


def test_malformed_body_is_400_naming_the_field(client):
    incomplete = {k: v for k, v in STATE.items() if k != "progress_type"}
    response = client.post("/predict", json={"state": incomplete})
    assert response.status_code == 400
    assert "progress_type" in response.json()["detail"]


def test_explain_returns_attribution_and_sentence(client):
    response = client.post("/explain", json={"state": STATE, "vessel": "heron"})
    assert response.status_code == 200
    payload = response.json()
    assert payload["prediction"]["behaviour"] == "transit"
    assert set(payload["attribution"]["phi"]) == set(STATE)
    assert payload["sentence"].startswith("Heron is transiting")
    assert payload["causes"]


def test_whatif_noop_edit_reports_unchanged(client):
    response = client.post(
        "/whatif", json={"state": STATE, "edits": {"obstacle_found": "false"}}
    )
    assert response.status_code == 200
    payload = response.json()
    assert payload["changed"] is False
    assert "would continue" in payload["sentence"]


def test_whatif_obstacle_edit_flips_to_avoidance(client):
    response = client.post(
        "/whatif", json={"state": STATE, "edits": {"obstacle_found": "true"}}
    )
    payload = response.json()
    assert payload["changed"] is True
    assert payload["result_prediction"]["behaviour"] == "avoid_obstacle"


def test_whatif_rejects_empty_edits(client):
    response = client.post("/whatif", json={"state": STATE, "edits": {}})
    assert response.status_code == 400


def test_mission_lifecycle_and_stream(client):
    created = client.post("/missions", json={"preset": "fig5"})
    assert created.status_code == 200
    mission_id = created.json()["mission_id"]
    assert created.json()["entries"] >= 4

    knowledge = client.get(f"/missions/{mission_id}/knowledge").json()
    assert [item["entry"]["time"]["tick"] for item in knowledge] == sorted(
        item["entry"]["time"]["tick"] for item in knowledge
    )

    stream = client.get(f"/missions/{mission_id}/stream")
    assert stream.status_code == 200
    events = [
        json.loads(line[len("data: ") :])
        for line in stream.text.splitlines()
        if line.startswith("data: ") and line != "data: {}"
    ]
    assert len(events) == len(knowledge)
    for event, item in zip(events, knowledge):
        assert event["sentence"] == item["sentence"]
        assert event["entry"]["behaviour"] == item["entry"]["behaviour"]

    since = knowledge[2]["entry"]["time"]["tick"]
    tail = client.get(f"/missions/{mission_id}/knowledge", params={"since_tick": since}).json()
    assert all(item["entry"]["time"]["tick"] >= since for item in tail)
    assert tail == knowledge[2:]

    state = client.get(f"/missions/{mission_id}/state").json()
    assert state["prediction"]["behaviour"] in {
        "wait",
        "transit",
        "survey",
        "hold_position",
        "replanned_transit",
        "avoid_obstacle",
    }


def test_mission_knowledge_is_persisted(client):
    created = client.post("/missions", json={"preset": "scenario2"}).json()
    files = list(client.data_dir.glob(f"{created['mission_id']}.jsonl"))
    assert len(files) == 1
    lines = files[0].read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == created["entries"]


def test_unknown_mission_is_404(client):
    assert client.get("/missions/nope/state").status_code == 404
    assert client.get("/missions/nope/knowledge").status_code == 404
    assert client.get("/missions/nope/stream").status_code == 404


def test_mission_requires_preset_or_plan(client):
    response = client.post("/missions", json={"seed": 1})
    assert response.status_code == 400


def test_mission_from_plan(client):
    created = client.post("/missions", json={"plan": ["survey"], "seed": 3})
    assert created.status_code == 200
    assert created.json()["records"] > 0
