from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request

import pytest

from aicat.fixtures import catalogue_text, self_contained
from aicat.registry.http import make_server, parse_bind
from aicat.rdfio import parse_turtle

TOKEN = "s3cret"


@pytest.fixture
def service(tmp_path):
    server = make_server(str(tmp_path / "db"), "127.0.0.1:0", TOKEN)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()


def call(url, method="GET", body=None, token=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method, headers={"Content-Type": "application/json"})
    if token:
        req.add_header("Authorization", f"Bearer {token}")
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, resp.headers.get("Content-Type"), resp.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        return exc.code, exc.headers.get("Content-Type"), exc.read().decode("utf-8")


def registration(point=3, text=None, **extra):
    body = {
        "turtle": text or self_contained(catalogue_text()),
        "systemIri": "ex:proctify",
        "point": point,
        "risk": "high",
        "role": "provider",
        "includesModelMetadata": False,
    }
    body.update(extra)
    return body


def test_healthz(service):
    assert call(service + "/healthz")[::2] == (200, "ok")


def test_submit_and_read(service):
    status, _, body = call(service + "/registrations", "POST", registration(), TOKEN)
    assert status == 201
    created = json.loads(body)
    assert created["visibility"] == "PublicEU"
    rid = created["recordId"]
    status, _, body = call(f"{service}/registrations/{rid}")
    assert status == 200 and json.loads(body)["systemIri"] == "http://example.com/proctify#proctify"
    status, ctype, body = call(f"{service}/records/{rid}/graph?format=ntriples")
    assert status == 200 and ctype.startswith("application/n-triples")
    assert parse_turtle(body).isomorphic(parse_turtle(self_contained(catalogue_text())))
    status, _, body = call(f"{service}/records/{rid}/graph?format=json")
    assert any(n["@id"] == "ex:proctify" for n in json.loads(body))
    assert call(f"{service}/records/{rid}/graph?format=xml")[0] == 400


def test_visibility_and_token(service):
    _, _, body = call(service + "/registrations", "POST", registration(point=1), TOKEN)
    rid = json.loads(body)["recordId"]
    assert call(f"{service}/registrations/{rid}")[0] == 403
    assert call(f"{service}/registrations/{rid}", token=TOKEN)[0] == 200
    assert call(f"{service}/registrations/{rid}", token="wrong")[0] == 401
    assert call(f"{service}/registrations/NOPE", token=TOKEN)[0] == 404
    assert json.loads(call(service + "/search?country=Italy")[2])["hits"] == []
    hits = json.loads(call(service + "/search?country=Italy", token=TOKEN)[2])["hits"]
    assert [h["resourceIri"] for h in hits] == ["http://example.com/proctify#proctify"]


def test_submission_requires_token(service):
    assert call(service + "/registrations", "POST", registration())[0] == 401


def test_rejections(service):
    broken = self_contained(catalogue_text()).replace("    airo:isProvidedBy ex:aiedux ;\n", "")
    status, _, body = call(service + "/registrations", "POST", registration(text=broken), TOKEN)
    assert status == 422
    violations = [r for r in json.loads(body)["report"]["results"] if r["severity"] == "Violation"]
    assert [r["path"] for r in violations] == ["https://w3id.org/airo#isProvidedBy"]
    status, _, body = call(service + "/registrations", "POST", registration(point=2), TOKEN)
    assert status == 422 and json.loads(body)["scenario"]["visibility"] == "NationalLevel"
    assert call(service + "/registrations", "POST", registration(role="deployer", risk="assessed-non-high"), TOKEN)[0] == 422


def test_bad_requests(service):
    status, _, body = call(service + "/registrations", "POST", registration(text="ex:a ex:b"), TOKEN)
    assert status == 400 and json.loads(body)["line"] == 1
    assert call(service + "/registrations", "POST", registration(point=9), TOKEN)[0] == 400
    assert call(service + "/registrations", "POST", {"turtle": ""}, TOKEN)[0] == 400
    assert call(service + "/nowhere")[0] == 404


def test_listing_paged(service):
    for point in (3, 4, 5):
        call(service + "/registrations", "POST", registration(point=point), TOKEN)
    page = json.loads(call(service + "/registrations?pageSize=2")[2])
    assert page["total"] == 3 and len(page["items"]) == 2
    page2 = json.loads(call(service + "/registrations?pageSize=2&page=2")[2])
    assert len(page2["items"]) == 1
    assert call(service + "/registrations?page=0")[0] == 400


def test_search_params(service):
    call(service + "/registrations", "POST", registration(), TOKEN)
    hits = json.loads(call(service + "/search?kind=model")[2])["hits"]
    assert [h["resourceIri"] for h in hits] == ["http://example.com/proctify#susbehaved_model"]
    hits = json.loads(call(service + "/search?status=tech:MarketAvailable")[2])["hits"]
    assert len(hits) == 1
    assert json.loads(call(service + "/search?text=zzz-no-match")[2])["hits"] == []
    assert call(service + "/search?kind=planet")[0] == 400


def test_parse_bind():
    assert parse_bind("0.0.0.0:8080") == ("0.0.0.0", 8080)
    with pytest.raises(ValueError):
        parse_bind("8080")


def test_env_configuration(tmp_path, monkeypatch):
    monkeypatch.setenv("AICAT_STORE_DIR", str(tmp_path / "envdb"))
    monkeypatch.setenv("AICAT_BIND", "127.0.0.1:0")
    monkeypatch.setenv("AICAT_TOKEN", "t")
    server = make_server()
    try:
        assert server.token == "t" and server.store.root_dir == tmp_path / "envdb"
    finally:
        server.server_close()
    monkeypatch.delenv("AICAT_STORE_DIR")
    with pytest.raises(ValueError):
        make_server()
