import pytest
from fastapi.testclient import TestClient

from src.config import settings
from src.main import app


@pytest.fixture
def client():
    return TestClient(app)


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body == {"status": "ok", "version": settings.VERSION}


def test_mcp_polynomial_of_identity(client):
    response = client.post("/mcp/polynomial", json={"matrices": [{"dim": 2, "re": [1, 0, 0, 1]}], "oracle": True})
    assert response.status_code == 200
    body = response.json()
    assert body["mcp"]["coeffs"] == pytest.approx([0.0, -2.0, 1.0])
    assert body["oracle"]["coeffs"] == pytest.approx([0.0, -2.0, 1.0])
    assert body["maxroot"]["value"] == pytest.approx(2.0)


def test_mcp_dimension_mismatch_is_400(client):
    response = client.post("/mcp/polynomial", json={"matrices": [{"dim": 2, "re": [1, 0, 0, 1]}], "dim": 3})
    assert response.status_code == 400
    assert response.json()["reason"] == "dimension_mismatch"


def test_hypothesis_violation_is_422(client):
    response = client.post("/exponentials/syndetic", json={"intervals": [[0.0, 0.5]], "epsilon": 0.5, "window": 40, "constant": 6.0})
    assert response.status_code == 422
    assert response.json()["reason"] == "window_too_small"


def test_exponential_gram(client):
    body = client.post("/exponentials/gram", json={"intervals": [[0.0, 1.0]], "frequencies": [-1, 0, 1]}).json()
    assert body["lambda_min"] == pytest.approx(1.0)
    assert body["lambda_max"] == pytest.approx(1.0)


def test_experiment_run_and_reverify(client):
    config = {"command": "mcp-maxroot", "params": {"identity": True}, "seed": 1}
    response = client.post("/experiments/run", json=config)
    assert response.status_code == 200
    certificate = response.json()["certificate"]
    assert certificate["summary"]["achieved"] == pytest.approx(2.0)
    report = client.post("/certificates/reverify", json={"certificate": certificate}).json()
    assert report["status"] == "ok"
    certificate["result"]["maxroot"]["value"] = 3.0
    drift = client.post("/certificates/reverify", json={"certificate": certificate})
    assert drift.status_code == 400
    assert drift.json()["reason"] == "certificate_drift"


def test_unknown_command_is_rejected(client):
    assert client.post("/experiments/run", json={"command": "nope"}).status_code == 422
