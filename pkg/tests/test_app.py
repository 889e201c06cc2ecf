import json

import pytest

from app import create_app
from tests.factories import fixture_paths


@pytest.fixture()
def app(monkeypatch):
    monkeypatch.setenv("MAX_REQUEST_MB", "1")
    monkeypatch.setenv("ORACLE_UNIT_CAP", "12")
    app = create_app()
    app.config.update(TESTING=True)
    return app


@pytest.fixture()
def client(app):
    return app.test_client()


def mini_rover_body(**extra):
    paths = fixture_paths("mini_rover")
    return {
        "domain": paths["domain"].read_text(encoding="utf-8"),
        "problem": paths["problem"].read_text(encoding="utf-8"),
        "foils": json.loads(paths["foils"].read_text(encoding="utf-8")),
        "lattice": json.loads(paths["lattice"].read_text(encoding="utf-8")),
        **extra,
    }


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.get_json() == {"ok": True, "service": "explicador-abstracoes"}


def test_methods_lists_settings(client):
    data = client.get("/api/methods").get_json()["data"]
    assert data["methods"] == ["blind", "astar", "greedy", "oracle"]
    assert data["aliases"]["heuristic"] == "astar"
    assert data["settings"]["oracle_unit_cap"] == 12


@pytest.mark.parametrize("method", ["blind", "greedy", "a*"])
def test_explain_mini_rover(client, method):
    resp = client.post("/api/explain", json=mini_rover_body(method=method))
    assert resp.status_code == 200
    body = resp.get_json()
    assert body["ok"] is True
    assert body["data"]["explanation"]["units"] == ["battery_75"]
    assert body["data"]["explanation"]["messages"][0] == "reset_at-has-add-effect-battery_level_above_75_perc"
    assert body["meta"]["service"] == "explicador-abstracoes"


def test_explain_accepts_plan_next_to_foil_list(client):
    body = mini_rover_body()
    foils = body.pop("foils")
    resp = client.post("/api/explain", json={**body, "plan": foils["plan"], "foils": foils["foils"]})
    assert resp.status_code == 200
    assert resp.get_json()["data"]["plan"][0] == "navigate_w0_lander"


@pytest.mark.parametrize(
    "patch, code",
    [
        ({"domain": ""}, "InputError"),
        ({"method": "dijkstra"}, "InputError"),
        ({"lattice": ["battery_75"]}, "InputError"),
        ({"seed": "x"}, "InputError"),
        ({"domain": "(define (domain mini_rover) (:requirements :adl))"}, "UnsupportedRequirementError"),
        ({"foils": {"foils": [["fly w0 w1"]]}}, "UnknownActionError"),
    ],
)
def test_explain_rejects_bad_input(client, patch, code):
    resp = client.post("/api/explain", json=mini_rover_body(**patch))
    assert resp.status_code == 400
    body = resp.get_json()
    assert body["ok"] is False
    assert body["error"]["code"] == code
    assert body["error"]["category"] == "input"


def test_unsupported_requirement_reports_flag(client):
    resp = client.post(
        "/api/explain", json=mini_rover_body(domain="(define (domain mini_rover)\n (:requirements :fluents))")
    )
    error = resp.get_json()["error"]
    assert error["flag"] == ":fluents"
    assert error["line"] == 2


def test_foil_valid_in_base_is_unprocessable(client):
    plan = mini_rover_body()["foils"]["plan"]
    resp = client.post("/api/explain", json=mini_rover_body(foils={"foils": [plan]}))
    assert resp.status_code == 422
    assert resp.get_json()["error"]["category"] == "infeasible"


def test_resource_limit_is_413(monkeypatch):
    monkeypatch.setenv("GROUNDING_ACTION_CAP", "3")
    client = create_app().test_client()
    resp = client.post("/api/explain", json=mini_rover_body())
    assert resp.status_code == 413
    assert resp.get_json()["error"] == {
        "code": "GroundingSizeError",
        "category": "resource",
        "message": "Aterramento excedeu 3 instanciações candidatas.",
        "limit": 3,
    }


def test_non_json_body(client):
    resp = client.post("/api/explain", data="nada", content_type="text/plain")
    assert resp.status_code == 400
    assert resp.get_json()["error"]["code"] == "InputError"


def test_unexpected_error_returns_500(client, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("falhou")

    monkeypatch.setattr("app.explain_report", boom)
    resp = client.post("/api/explain", json=mini_rover_body())
    assert resp.status_code == 500
    body = resp.get_json()
    assert body["ok"] is False
    assert body["error_type"] == "RuntimeError"
    assert body["phase"] == "request"
