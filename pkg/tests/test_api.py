"""HTTP endpoints"""
import pytest
from fastapi.testclient import TestClient

from toposforge.main import app

SHEAF = """
sheaf T on sierpinski
sections X: a b
sections U: a
restrict X->U: a->a b->a
"""


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_root_lists_endpoints(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "eval" in response.json()["endpoints"]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_eval(client):
    response = client.post("/eval", json={"space": "sierpinski", "formula": "~~U"})
    assert response.status_code == 200
    body = response.json()
    assert body["forced"] is True
    assert body["open"] == "X"
    assert body["truth_value"] == "X"


def test_eval_on_a_named_open(client):
    response = client.post("/eval", json={"space": "sierpinski", "formula": "U \\/ ~U", "open": "U"})
    assert response.status_code == 200
    body = response.json()
    assert body["forced"] is True
    assert body["open"] == "U"


def test_truth(client):
    response = client.post("/truth", json={"space": "sierpinski", "formula": "U \\/ ~U"})
    assert response.status_code == 200
    assert response.json()["points"] == ["eta"]


def test_translate(client):
    response = client.post("/translate", json={"formula": "box[k] U"})
    assert response.status_code == 200
    assert response.json()["translated"] == "box[j] box[k] box[j] U"


def test_sheafify(client):
    response = client.post("/sheafify", json={"space": "sierpinski", "sheaf": SHEAF})
    assert response.status_code == 200
    body = response.json()
    assert body["is_sheaf"] is True
    assert len(body["sections"]["X"]) == 1


def test_spec(client):
    response = client.get("/spec", params={"ring": "zmod 12"})
    assert response.status_code == 200
    body = response.json()
    assert len(body["frame"]) == 4
    assert sorted(p.split(":")[0] for p in body["points"]) == ["p2", "p3"]


def test_verify(client):
    response = client.post("/verify/dimension", json={"ring": "zmod 4"})
    assert response.status_code == 200
    checks = response.json()["checks"]
    assert checks and all(c["passed"] for c in checks)


def test_syntax_error_reports_position(client):
    response = client.post("/eval", json={"space": "sierpinski", "formula": "forall x:F. ("})
    assert response.status_code == 400
    assert response.json()["detail"]["position"] == 13


def test_unknown_names(client):
    assert client.post("/eval", json={"space": "moebius", "formula": "true"}).status_code == 404
    assert client.get("/spec", params={"ring": "banana"}).status_code == 400
    assert client.post("/verify/nothing", json={}).status_code == 404
