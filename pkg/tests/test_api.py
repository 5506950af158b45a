import pytest
from fastapi.testclient import TestClient

from scopic.api import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_smax_endpoint(client):
    resp = client.post(
        "/smax", json={"state": {"variant": "squeezed", "params": {"r": 1.0}}}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["s_max"] == pytest.approx(1.3844, abs=1e-3)
    assert body["at_smax"]["violated"] is True


def test_analyze_endpoint(client):
    resp = client.post(
        "/analyze",
        json={
            "config": {
                "mode": "single",
                "criteria": ["theorem4"],
                "bootstrap_replicas": 0,
            },
            "x": [0.1, -0.2, 0.3, 0.5],
            "p": [0.1, -0.1, 0.2, -0.2],
        },
    )
    assert resp.status_code == 200
    assert "theorem4" in resp.json()["s_max"]


def test_curve_endpoint(client):
    resp = client.post("/curve", json={"task": "fig8", "points": 11})
    assert resp.status_code == 200
    assert resp.json()["header"] == ["alpha", "var_p"]
    assert len(resp.json()["rows"]) == 11


def test_simulate_endpoint(client):
    resp = client.post(
        "/simulate",
        json={
            "state": {"variant": "squeezed", "params": {"r": 1.0}},
            "n": 4000,
            "config": {
                "mode": "single",
                "criteria": ["theorem4"],
                "bootstrap_replicas": 5,
                "seed": 1,
            },
        },
    )
    assert resp.status_code == 200
    assert resp.json()["provenance"]["n"] == 4000


def test_verify_endpoint(client):
    resp = client.post(
        "/verify",
        json={"s_caps": [2.0], "trials": 15, "appendix_a_trials": 3, "appendix_b_trials": 2},
    )
    assert resp.status_code == 200
    assert resp.json()["sound"] is True


def test_validation_error_is_422(client):
    resp = client.post(
        "/analyze",
        json={"config": {"mode": "single", "criteria": ["theorem2"]}, "x": [1.0], "p": [2.0]},
    )
    assert resp.status_code == 422


def test_domain_error_is_400_with_category(client):
    resp = client.post(
        "/analyze",
        json={"config": {"mode": "single", "criteria": ["theorem4"]}, "x": [0.1, 0.2]},
    )
    assert resp.status_code == 400
    assert resp.json()["error"] == "ModeMismatchError"
