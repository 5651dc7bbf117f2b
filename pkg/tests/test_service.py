"""The service layer must hold no business logic: every response body is
checked against the corresponding core operation called directly."""

import json
from decimal import Decimal

import pytest
from fastapi.testclient import TestClient

from conftest import EXPOSURE_A1, EXPOSURE_NAMED
from nmd import audit, engine, walker
from nmd.fixtures import secdi_model, secdi_model_extended, secdi_full_span
from nmd.model import CellId, LiteralCell, load_workbook, save_workbook, with_cell
from nmd.service import ServiceConfig, SessionStore, create_app
from nmd.values import render_value


@pytest.fixture
def client():
    return TestClient(create_app(secdi_model_extended()))


def test_workbook_summary(client, fix_a_extended):
    got = client.get("/api/workbook").json()
    assert got["name"] == fix_a_extended.name
    assert got["version"] == 1 and got["revision"] == 1
    assert [s["name"] for s in got["sheets"]] == ["SecDI", "SEC_GteeADJ", "OUTPUTS", "INPUTS"]
    assert [s["role"] for s in got["sheets"]] == ["calculation", "calculation", "output", "input"]
    assert got["inputs"] == [{"label": "In.Key", "cell": "INPUTS!B5", "value": "1"}]


def test_cell_view_matches_inspect(client, fix_a_extended):
    got = client.get("/api/cells/SEC_GteeADJ/M5").json()
    ev = engine.recalculate(fix_a_extended)
    view = walker.inspect(fix_a_extended, ev, CellId.parse("SEC_GTEEADJ!M5"))
    assert got["current"]["name"] == view.current.name
    assert got["current"]["value"] == render_value(view.current.value)
    assert [r["name"] for r in got["precedents"]] == [r.name for r in view.precedents]
    assert [r["formula"] for r in got["dependents"]] == [r.formula for r in view.dependents]


def test_unknown_cell_is_404(client):
    assert client.get("/api/cells/SEC_GteeADJ/Z99").status_code == 404
    assert client.get("/api/cells/NOSHEET/B5").status_code == 404


def test_session_walk_and_trail_parity(client, fix_a_extended):
    created = client.post("/api/sessions", json={"cell": "SEC_GTEEADJ!M5"}).json()
    sid = created["id"]
    assert created["view"]["current"]["name"] == "SEC_GteeADJ.MaxVal"

    stepped = client.post(f"/api/sessions/{sid}/step",
                          json={"direction": "into-dependent", "index": 0}).json()
    assert stepped["cell"] == "OUTPUTS!B5"
    backed = client.post(f"/api/sessions/{sid}/back").json()
    assert backed["cell"] == "SEC_GTEEADJ!M5"

    trail = client.get(f"/api/sessions/{sid}/trail")
    assert trail.status_code == 200

    # the same walk done directly through the core
    ev = engine.recalculate(fix_a_extended)
    s = walker.new_session(fix_a_extended, "SEC_GTEEADJ!M5")
    s = walker.step(s, walker.INTO_DEPENDENT, 0)
    s = walker.back(s)
    assert trail.text == walker.export_trail(s, ev)


def test_step_bad_index_is_422(client):
    sid = client.post("/api/sessions", json={"cell": "SEC_GTEEADJ!M5"}).json()["id"]
    got = client.post(f"/api/sessions/{sid}/step",
                      json={"direction": "into-dependent", "index": 9})
    assert got.status_code == 422
    assert "out of range" in got.json()["detail"]


def test_unknown_session_is_404(client):
    assert client.post("/api/sessions/nope/back").status_code == 404
    assert client.get("/api/sessions/nope/trail").status_code == 404


def test_whatif_parity(client, fix_a_extended):
    got = client.post("/api/whatif", json={"overrides": {"In.Key": 2}}).json()
    delta = engine.what_if(fix_a_extended, {"In.Key": Decimal(2)})
    assert got["changes"] == [
        {"cell": str(d.cell), "label": d.label,
         "before": render_value(d.before), "after": render_value(d.after)}
        for d in delta
    ]


def test_whatif_empty_overrides(client):
    got = client.post("/api/whatif", json={"overrides": {}})
    assert got.status_code == 200
    assert got.json() == {"changes": []}


def test_whatif_non_input_is_422(client):
    got = client.post("/api/whatif", json={"overrides": {"SECDI!L5": 1}})
    assert got.status_code == 422


def test_compile_decompile_endpoints(fix_b):
    client = TestClient(create_app(secdi_full_span()))
    got = client.post("/api/compile", json={"text": EXPOSURE_NAMED, "host": "SEC_GTEEADJ!M5"}).json()
    assert got == {"a1": EXPOSURE_A1, "array": True}
    got = client.post("/api/decompile", json={"text": EXPOSURE_A1}).json()
    assert got == {"named": EXPOSURE_NAMED}
    assert client.post("/api/compile", json={"text": "MAX(", "host": "SEC_GTEEADJ!M5"}).status_code == 422
    assert client.post("/api/decompile", json={"text": "=1+1"}).status_code == 422


def test_history_endpoint(tmp_path, fix_a):
    from datetime import datetime

    log = audit.AuditLog(tmp_path / "model.log")
    w2 = with_cell(fix_a, "SecDI", "L5", LiteralCell(Decimal(42)))
    updated, _ = audit.commit(log, fix_a, w2, "429660", datetime(2009, 4, 9, 14, 34), "tweak")
    client = TestClient(create_app(updated, log))
    got = client.get("/api/history").json()
    assert got["records"] == [{
        "version": 1, "revision": 2, "description": "tweak",
        "modified_by": "429660", "modified_on": "09/04/2009 14:34", "comments": [],
    }]
    assert client.get("/api/history", params={"version": 9}).json() == {"records": []}


def test_commit_disabled_by_default(client):
    got = client.post("/api/commit", json={"user": "u", "message": "m", "document": "{}"})
    assert got.status_code == 404


def test_commit_flow(tmp_path):
    w = secdi_model()
    model_path = tmp_path / "model.nmd.json"
    model_path.write_bytes(save_workbook(w))
    log = audit.AuditLog(tmp_path / "model.log")
    config = ServiceConfig(workbook_path=str(model_path), allow_commit=True)
    client = TestClient(create_app(w, log, config))

    edited = with_cell(w, "SecDI", "L5", LiteralCell(Decimal(42)))
    got = client.post("/api/commit", json={
        "user": "429660", "message": "tweak",
        "document": save_workbook(edited).decode(),
    })
    assert got.status_code == 200
    assert got.json()["version"] == 1 and got.json()["revision"] == 2
    assert load_workbook(model_path.read_bytes()).revision == 2
    assert client.get("/api/workbook").json()["revision"] == 2

    # a stale base (still claiming 1/1) now conflicts
    stale = client.post("/api/commit", json={
        "user": "u", "message": "again", "document": save_workbook(edited).decode(),
    })
    assert stale.status_code == 409

    # committing the identical document is a precondition violation
    current = client.get("/api/export", params={"user": "u"}).content
    unchanged = client.post("/api/commit", json={
        "user": "u", "message": "noop", "document": current.decode(),
    })
    assert unchanged.status_code == 422


def test_export_returns_document_and_stamps_log(tmp_path, fix_a):
    log = audit.AuditLog(tmp_path / "model.log")
    from datetime import datetime

    w2 = with_cell(fix_a, "SecDI", "L5", LiteralCell(Decimal(42)))
    updated, _ = audit.commit(log, fix_a, w2, "u", datetime(2009, 4, 9), "x")
    client = TestClient(create_app(updated, log))
    got = client.get("/api/export", params={"user": "427240"})
    assert got.status_code == 200
    assert got.content == save_workbook(updated)
    assert log.head.comments[-1].text.startswith("Exported by: 427240 on ")
    assert client.get("/api/export").status_code == 422


def test_session_eviction():
    clock = [0.0]
    store = SessionStore(idle_timeout=10, clock=lambda: clock[0])
    session = walker.new_session(secdi_model(), "SEC_GTEEADJ!M5")
    sid = store.create(session)
    clock[0] = 5
    assert store.get(sid) is not None
    clock[0] = 20
    with pytest.raises(KeyError):
        store.get(sid)


def test_session_ids_are_long_random(client):
    a = client.post("/api/sessions", json={"cell": "SEC_GTEEADJ!M5"}).json()["id"]
    b = client.post("/api/sessions", json={"cell": "SEC_GTEEADJ!M5"}).json()["id"]
    assert a != b
    assert len(a) >= 22  # 128 bits base64url
