from __future__ import annotations

import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from genflow.backends.sim import sim_params_from_dict
from genflow.canon import canonical_dumps
from genflow.config import AppConfig, BackendProfile
from genflow.service import create_app

from conftest import FIXTURE_ROOT


def make_config(tmp_path: Path, **profile_overrides) -> AppConfig:
    profiles = {
        "sim": BackendProfile(name="sim"),
        "paced": BackendProfile(name="paced", pacing_s=0.25),
        "flaky": BackendProfile(
            name="flaky", sim=sim_params_from_dict({"malformed_rate": 1.0})
        ),
    }
    for name, profile in profile_overrides.items():
        profiles[name] = profile
    return AppConfig(
        master_seed=11,
        fixture_root=str(FIXTURE_ROOT),
        data_dir=str(tmp_path / "data"),
        max_concurrent=4,
        profiles=profiles,
    )


@pytest.fixture
def client(tmp_path: Path) -> TestClient:
    app = create_app(make_config(tmp_path))
    with TestClient(app) as test_client:
        yield test_client


def submit(client: TestClient, **overrides) -> str:
    body = {
        "url": "fixture:acme/index.html",
        "objective": "spring launch spot",
        "n_scenes": 2,
        "seed": 11,
    }
    body.update(overrides)
    response = client.post("/v1/campaigns", json=body)
    assert response.status_code == 202, response.text
    payload = response.json()
    assert payload["state"] == "pending"
    return payload["campaign_id"]


def wait_terminal(client: TestClient, campaign_id: str, timeout: float = 30.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/v1/campaigns/{campaign_id}").json()
        if status["state"] in ("completed", "failed"):
            return status
        time.sleep(0.02)
    raise AssertionError(f"campaign {campaign_id} never finished")


def sse_events(text: str) -> list[dict]:
    events = []
    for block in text.split("\n\n"):
        for line in block.splitlines():
            if line.startswith("data: "):
                events.append(json.loads(line[len("data: ") :]))
    return events


def test_healthz(client: TestClient) -> None:
    assert client.get("/v1/healthz").json() == {"status": "ok"}


def test_submit_and_complete(client: TestClient) -> None:
    campaign_id = submit(client)
    status = wait_terminal(client, campaign_id)
    assert status["state"] == "completed"
    assert status["dna"]["palette"][0] == "#FF3D00"
    result = client.get(f"/v1/campaigns/{campaign_id}/result")
    assert result.status_code == 200
    transcript = result.json()
    assert len(transcript["scenes"]) == 2
    assert transcript["run_id"] == campaign_id


def test_missing_url_is_422_listing_field(client: TestClient) -> None:
    response = client.post("/v1/campaigns", json={"objective": "x"})
    assert response.status_code == 422
    assert any("url" in err["loc"] for err in response.json()["detail"])


def test_empty_objective_and_zero_scenes_rejected(client: TestClient) -> None:
    response = client.post(
        "/v1/campaigns", json={"url": "fixture:acme/index.html", "objective": "", "n_scenes": 0}
    )
    assert response.status_code == 422
    locs = {tuple(err["loc"]) for err in response.json()["detail"]}
    assert ("objective",) in locs
    assert ("n_scenes",) in locs


def test_unknown_profile_is_422(client: TestClient) -> None:
    response = client.post(
        "/v1/campaigns",
        json={"url": "fixture:acme/index.html", "objective": "x", "backend_profile": "nope"},
    )
    assert response.status_code == 422


def test_capacity_503(tmp_path: Path) -> None:
    config = make_config(tmp_path)
    config.max_concurrent = 1
    with TestClient(create_app(config)) as client:
        first = submit(client, backend_profile="paced")
        response = client.post(
            "/v1/campaigns", json={"url": "fixture:acme/index.html", "objective": "x"}
        )
        assert response.status_code == 503
        wait_terminal(client, first)


def test_unknown_campaign_404(client: TestClient) -> None:
    assert client.get("/v1/campaigns/cmp-missing").status_code == 404
    assert client.get("/v1/campaigns/cmp-missing/events").status_code == 404
    assert client.get("/v1/campaigns/cmp-missing/result").status_code == 404


def test_result_409_while_running(client: TestClient) -> None:
    campaign_id = submit(client, backend_profile="paced")
    response = client.get(f"/v1/campaigns/{campaign_id}/result")
    assert response.status_code == 409
    wait_terminal(client, campaign_id)


def test_mid_run_status_reports_progress(client: TestClient) -> None:
    campaign_id = submit(client, backend_profile="paced", n_scenes=3)
    saw_generating = False
    for _ in range(300):
        status = client.get(f"/v1/campaigns/{campaign_id}").json()
        if status["state"] == "generating" and status["progress"]["scene"] is not None:
            saw_generating = True
            assert status["progress"]["of"] == 3
            break
        if status["state"] in ("completed", "failed"):
            break
        time.sleep(0.01)
    wait_terminal(client, campaign_id)
    assert saw_generating


def test_stream_equals_stored_transcript(client: TestClient) -> None:
    campaign_id = submit(client)
    wait_terminal(client, campaign_id)
    with client.stream("GET", f"/v1/campaigns/{campaign_id}/events") as response:
        streamed = sse_events(response.read().decode())
    transcript = client.get(f"/v1/campaigns/{campaign_id}/result").json()
    assert canonical_dumps(streamed) == canonical_dumps(transcript["events"])
    assert [e["seq"] for e in streamed] == list(range(len(streamed)))


def test_resume_with_last_event_id_no_gaps_or_duplicates(client: TestClient) -> None:
    campaign_id = submit(client, backend_profile="paced", n_scenes=2)
    collected: list[dict] = []
    # force a disconnect after a few live events
    with client.stream("GET", f"/v1/campaigns/{campaign_id}/events") as response:
        buffer = ""
        for chunk in response.iter_text():
            buffer += chunk
            if buffer.count("\n\n") >= 4:
                break
    collected.extend(sse_events(buffer.rsplit("\n\n", 1)[0] + "\n\n"))
    assert collected, "expected some events before the disconnect"
    last_seq = collected[-1]["seq"]

    wait_terminal(client, campaign_id)
    with client.stream(
        "GET",
        f"/v1/campaigns/{campaign_id}/events",
        headers={"Last-Event-ID": str(last_seq)},
    ) as response:
        collected.extend(sse_events(response.read().decode()))

    transcript = client.get(f"/v1/campaigns/{campaign_id}/result").json()
    assert [e["seq"] for e in collected] == list(range(len(transcript["events"])))
    assert canonical_dumps(collected) == canonical_dumps(transcript["events"])


def test_from_seq_query_parameter(client: TestClient) -> None:
    campaign_id = submit(client)
    wait_terminal(client, campaign_id)
    with client.stream("GET", f"/v1/campaigns/{campaign_id}/events?from_seq=5") as response:
        streamed = sse_events(response.read().decode())
    assert streamed[0]["seq"] == 5


def test_failed_extraction_transcript_has_fault_event(client: TestClient) -> None:
    campaign_id = submit(client, backend_profile="flaky")
    status = wait_terminal(client, campaign_id)
    assert status["state"] == "failed"
    transcript = client.get(f"/v1/campaigns/{campaign_id}/result").json()
    faults = [e for e in transcript["events"] if e["kind"] == "fault"]
    assert any(e["payload"]["reason"] == "parse-exhausted" for e in faults)
    assert transcript["scenes"] == []


def test_abort_mid_run(client: TestClient) -> None:
    campaign_id = submit(client, backend_profile="paced", n_scenes=4)
    response = client.post(f"/v1/campaigns/{campaign_id}/abort")
    assert response.status_code == 200
    status = wait_terminal(client, campaign_id)
    assert status["state"] == "failed"
    assert status["error"] == "aborted"
    transcript = client.get(f"/v1/campaigns/{campaign_id}/result").json()
    assert any(
        e["kind"] == "fault" and e["payload"].get("reason") == "aborted" for e in transcript["events"]
    )


def test_abort_after_completion_409(client: TestClient) -> None:
    campaign_id = submit(client)
    wait_terminal(client, campaign_id)
    assert client.post(f"/v1/campaigns/{campaign_id}/abort").status_code == 409


def test_multipart_upload_sim_profile_rejected(client: TestClient) -> None:
    response = client.post(
        "/v1/campaigns",
        data={"campaign": json.dumps({"url": "fixture:acme/index.html", "objective": "x"})},
        files={"asset_file": ("photo.png", b"\x89PNG fake bytes", "image/png")},
    )
    assert response.status_code == 422
    assert any("asset_file" in err["loc"] for err in response.json()["detail"])


def test_completed_campaigns_survive_restart(tmp_path: Path) -> None:
    config = make_config(tmp_path)
    with TestClient(create_app(config)) as client:
        campaign_id = submit(client)
        wait_terminal(client, campaign_id)
        original = client.get(f"/v1/campaigns/{campaign_id}/result").json()

    with TestClient(create_app(make_config(tmp_path))) as client:
        status = client.get(f"/v1/campaigns/{campaign_id}")
        assert status.status_code == 200
        assert status.json()["state"] == "completed"
        assert client.get(f"/v1/campaigns/{campaign_id}/result").json() == original


def test_in_flight_campaigns_fail_with_restart_marker(tmp_path: Path) -> None:
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    index = {
        "cmp-crashed00001": {
            "state": "generating",
            "url": "fixture:acme/index.html",
            "objective": "x",
            "n_scenes": 2,
            "seed": 1,
            "error": None,
            "file": "cmp-crashed00001.transcript.json",
        }
    }
    (data_dir / "index.json").write_text(json.dumps(index), encoding="utf-8")

    with TestClient(create_app(make_config(tmp_path))) as client:
        status = client.get("/v1/campaigns/cmp-crashed00001").json()
        assert status["state"] == "failed"
        assert status["error"] == "service-restart"
        transcript = client.get("/v1/campaigns/cmp-crashed00001/result").json()
        assert transcript["events"][0]["payload"]["reason"] == "service-restart"
        # the marker stream is also replayable over SSE
        with client.stream("GET", "/v1/campaigns/cmp-crashed00001/events") as response:
            events = sse_events(response.read().decode())
        assert events == transcript["events"]
