import csv
import math
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from app.main import create_app
from app.services.analysis.experiments import TABLE_COLUMNS
from tests.conftest import OCTAHEDRON, TETRAHEDRON, design_text


@pytest.fixture
def client(isolated_env):
    with TestClient(create_app()) as test_client:
        yield test_client


def upload(client, points, t):
    files = {"file": ("design.txt", design_text(points).encode("utf-8"), "text/plain")}
    return client.post("/designs", files=files, data={"t": str(t)})


def test_root_and_health(client):
    root = client.get("/")
    assert root.status_code == 200
    body = root.json()
    assert body["service"] == "hyperapprox"
    assert "osc" in body["supported_kernels"]
    assert body["jobs"] == 2

    health = client.get("/health")
    assert health.status_code == 200
    assert health.json()["status"] == "healthy"


def test_oscillatory_moments(client):
    response = client.get("/moments", params={"kernel": "osc", "kappa": 10, "max_degree": 5})
    assert response.status_code == 200
    body = response.json()
    assert body["max_degree"] == 5
    assert body["kernel"]["kappa"] == 10.0
    assert [row["r"] for row in body["rows"]] == list(range(6))
    assert body["rows"][0]["re"] == pytest.approx(2.0 * math.sin(10.0) / 10.0)


def test_sphere_moments_with_a_singular_point(client):
    params = {"kernel": "sph-alg", "region": "sphere", "xi": "0,0,1", "max_degree": 2}
    response = client.get("/moments", params=params)
    assert response.status_code == 200
    assert len(response.json()["rows"]) == 9


def test_moment_errors(client):
    assert client.get("/moments", params={"kernel": "osc", "max_degree": 5}).status_code == 422
    assert client.get("/moments", params={"kernel": "nope", "max_degree": 5}).status_code == 422
    assert client.get("/moments", params={"kernel": "unit", "max_degree": -1}).status_code == 422
    out_of_range = {"kernel": "harmonic", "region": "sphere", "lbar": 3, "kbar": 0, "max_degree": 2}
    response = client.get("/moments", params=out_of_range)
    assert response.status_code == 400
    assert response.json()["operation"] == "moments_sphere_harmonic"


def test_schedule_table_writes_csv(client, isolated_env):
    payload = {
        "kernel": {"kind": "interval_oscillatory", "kappa": 20.0},
        "n_list": [10],
        "m_list": [8, 12],
        "name": "osc_small",
    }
    response = client.post("/experiments/table", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "accepted"
    assert body["rows"] == 2
    out = Path(body["output_path"])
    assert out.parent == isolated_env / "results" / "reports"
    with out.open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [row["m"] for row in rows] == ["8", "12"]
    assert list(rows[0]) == TABLE_COLUMNS


@pytest.mark.parametrize(
    "payload",
    [
        {"kernel": {"kind": "interval_oscillatory", "kappa": 20.0}, "n_list": [], "m_list": [8]},
        {"kernel": {"kind": "interval_oscillatory", "kappa": 0.0}, "n_list": [10], "m_list": [8]},
        {"kernel": {"kind": "unit"}, "n_list": [10], "m_list": [8], "name": "../escape"},
        {"kernel": {"kind": "unit"}, "n_list": [10], "m_list": [8], "norm": "Linf"},
    ],
)
def test_schedule_table_rejects_bad_requests(client, payload):
    assert client.post("/experiments/table", json=payload).status_code == 422


def test_design_upload_needs_a_directory(client):
    assert upload(client, TETRAHEDRON, 1).status_code == 400


def test_design_upload(client, isolated_env, monkeypatch):
    designs = isolated_env / "designs"
    monkeypatch.setenv("HYPERAPPROX_DESIGNS", str(designs))

    stored = upload(client, TETRAHEDRON, 1)
    assert stored.status_code == 200
    assert stored.json()["m"] == 4
    assert (designs / "sd_t1_m4.txt").exists()

    not_a_design = upload(client, TETRAHEDRON, 3)
    assert not_a_design.status_code == 422
    assert not_a_design.json()["detail"]["defect"] > 1e-6

    wrong_size = upload(client, OCTAHEDRON, 3)
    assert wrong_size.status_code == 422
    assert not (designs / "sd_t3_m16.txt").exists()

    malformed = client.post(
        "/designs", files={"file": ("bad.txt", b"1.0 2.0\n", "text/plain")}, data={"t": "1"}
    )
    assert malformed.status_code == 422
    assert sorted(p.name for p in designs.iterdir()) == ["sd_t1_m4.txt"]
    assert client.get("/").json()["designs"] == ["sd_t1_m4.txt"]


@pytest.mark.parametrize(
    "content",
    [b"\xff\xfe 1 0 0\n", b"nan nan nan\n" * 4],
    ids=["not-utf8", "nan-points"],
)
def test_unreadable_design_uploads_are_rejected_and_discarded(client, isolated_env, monkeypatch, content):
    designs = isolated_env / "designs"
    monkeypatch.setenv("HYPERAPPROX_DESIGNS", str(designs))

    response = client.post("/designs", files={"file": ("bad.txt", content, "text/plain")}, data={"t": "1"})
    assert response.status_code == 422
    assert list(designs.iterdir()) == []
