"""Re-record test/transcript.json from the real service.

Run from the repository root with the helmsight package installed:

    python3 frontend/test/record_transcript.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from helmsight.pipeline import train_deployment_model
from helmsight.service import create_app


def record() -> dict:
    client = TestClient(create_app(model=train_deployment_model()))
    transcript = {"vocabulary": client.get("/vocabulary").json()}

    created = client.post("/missions", json={"preset": "fig5"}).json()
    mission_id = created["mission_id"]
    transcript["mission_created"] = created
    transcript["knowledge"] = client.get(f"/missions/{mission_id}/knowledge").json()
    transcript["stream_text"] = client.get(f"/missions/{mission_id}/stream").text
    transcript["mission_state"] = client.get(f"/missions/{mission_id}/state").json()

    base_state = {
        "ready_plan": "true",
        "current_objective": "waypoint",
        "progress_type": "transiting",
        "same_objective": "true",
        "obstacle_found": "false",
    }
    explain_request = {"state": base_state, "vessel": "heron"}
    transcript["explain"] = {
        "request": explain_request,
        "response": client.post("/explain", json=explain_request).json(),
    }

    whatif_request = {"state": base_state, "edits": {"obstacle_found": "true"}, "vessel": "heron"}
    whatif_response = client.post("/whatif", json=whatif_request).json()
    transcript["whatif"] = {"request": whatif_request, "response": whatif_response}

    followup_request = {
        "state": whatif_response["result_state"],
        "edits": {"progress_type": "replanning"},
        "vessel": "heron",
    }
    transcript["whatif_followup"] = {
        "request": followup_request,
        "response": client.post("/whatif", json=followup_request).json(),
    }
    return transcript


if __name__ == "__main__":
    target = Path(__file__).with_name("transcript.json")
    target.write_text(json.dumps(record(), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {target}")
