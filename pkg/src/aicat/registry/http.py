"""JSON-over-HTTP front end for a CatalogStore.

Built on the standard library's threading server: requests are served
concurrently, and every mutation goes through the store's locked
single-writer path.
"""

from __future__ import annotations

import hmac
import json
import logging
import os
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlsplit

from ..catalog import ResourceKind
from ..graph import GraphError, Iri
from ..profile import (
    RISK_TOKENS,
    ROLE_TOKENS,
    RegistrantRole,
    RiskStatus,
    ScenarioError,
    UnmappedScenario,
    View,
    annex_point,
    parse_token,
)
from ..rdfio import FORMATS, ParseError, parse_turtle
from ..vocab import DEFAULT_PREFIXES, UnknownPrefixError, expand_curie
from .store import CatalogStore, Forbidden, InputError, NotFound, Rejected, SearchQuery, country_iri

log = logging.getLogger(__name__)

DEFAULT_BIND = "127.0.0.1:8080"
DEFAULT_PAGE_SIZE = 50
MAX_BODY = 16 * 1024 * 1024

_MEDIA_TYPES = {
    "turtle": "text/turtle; charset=utf-8",
    "ntriples": "application/n-triples; charset=utf-8",
    "json": "application/json; charset=utf-8",
}


class _HttpError(Exception):
    def __init__(self, status: HTTPStatus, body: dict) -> None:
        super().__init__(body.get("error", ""))
        self.status = status
        self.body = body


def parse_bind(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {text!r}")
    return host, int(port)


def _resolve_iri(text: str, prefixes) -> Iri:
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    label = text.split(":", 1)[0]
    if ":" in text and label in prefixes:
        return expand_curie(prefixes, text)
    return Iri(text)


class RegistryServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], store: CatalogStore, token: Optional[str]) -> None:
        super().__init__(address, RegistryHandler)
        self.store = store
        self.token = token or None


class RegistryHandler(BaseHTTPRequestHandler):
    server: RegistryServer
    server_version = "aicat-registry/0.1"

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        log.info("%s %s", self.address_string(), format % args)

    # -- plumbing --------------------------------------------------------

    def _send(self, status: HTTPStatus, body: str, content_type: str) -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _json(self, status: HTTPStatus, payload) -> None:
        self._send(status, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False), _MEDIA_TYPES["json"])

    def _view(self) -> View:
        token = self.server.token
        header = self.headers.get("Authorization", "")
        if token and header.startswith("Bearer "):
            if hmac.compare_digest(header[len("Bearer "):].strip().encode(), token.encode()):
                return View.Full
            raise _HttpError(HTTPStatus.UNAUTHORIZED, {"error": "invalid bearer token"})
        return View.Public

    def _dispatch(self, handler) -> None:
        try:
            handler()
        except _HttpError as exc:
            self._json(exc.status, exc.body)
        except Exception:  # pragma: no cover - last-resort guard
            log.exception("unhandled error")
            self._json(HTTPStatus.INTERNAL_SERVER_ERROR, {"error": "internal error"})

    def do_GET(self) -> None:  # noqa: N802
        self._dispatch(self._get)

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch(self._post)

    # -- routes ------------------------------------------------------------

    def _get(self) -> None:
        url = urlsplit(self.path)
        params = {k: v[-1] for k, v in parse_qs(url.query).items()}
        parts = [p for p in url.path.split("/") if p]
        store = self.server.store
        if parts == ["healthz"]:
            self._send(HTTPStatus.OK, "ok", "text/plain; charset=utf-8")
            return
        view = self._view()
        if parts == ["registrations"]:
            self._list(params, view)
        elif len(parts) == 2 and parts[0] == "registrations":
            record, _ = self._fetch(parts[1], view)
            self._json(HTTPStatus.OK, record.to_dict())
        elif len(parts) == 3 and parts[0] == "records" and parts[2] == "graph":
            fmt = params.get("format", "turtle")
            if fmt not in FORMATS:
                raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": f"format must be one of {', '.join(FORMATS)}"})
            self._fetch(parts[1], view)
            self._send(HTTPStatus.OK, store.export(parts[1], fmt, view), _MEDIA_TYPES[fmt])
        elif parts == ["search"]:
            self._search(params, view)
        else:
            raise _HttpError(HTTPStatus.NOT_FOUND, {"error": "no such route"})

    def _fetch(self, record_id: str, view: View):
        try:
            return self.server.store.get_record(record_id, view)
        except NotFound:
            raise _HttpError(HTTPStatus.NOT_FOUND, {"error": f"unknown record {record_id}"}) from None
        except Forbidden:
            raise _HttpError(HTTPStatus.FORBIDDEN, {"error": f"record {record_id} is not public"}) from None

    def _list(self, params: dict, view: View) -> None:
        try:
            page = int(params.get("page", "1"))
            size = int(params.get("pageSize", str(DEFAULT_PAGE_SIZE)))
        except ValueError:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": "page and pageSize must be integers"}) from None
        if page < 1 or not 1 <= size <= 500:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": "page >= 1 and 1 <= pageSize <= 500"})
        records = self.server.store.list_records(view)
        chunk = records[(page - 1) * size: page * size]
        self._json(
            HTTPStatus.OK,
            {
                "page": page,
                "pageSize": size,
                "total": len(records),
                "items": [
                    {"recordId": r.record_id, "systemIri": r.system_iri.value, "visibility": r.visibility.value}
                    for r in chunk
                ],
            },
        )

    def _search(self, params: dict, view: View) -> None:
        query = SearchQuery(view=view)
        try:
            if params.get("kind"):
                query.kind = ResourceKind(params["kind"].capitalize())
            if params.get("country"):
                query.country = country_iri(params["country"])
            if params.get("status"):
                query.market_status = _resolve_iri(params["status"], DEFAULT_PREFIXES)
        except (ValueError, GraphError) as exc:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": str(exc)}) from None
        query.text = params.get("text") or None
        hits = self.server.store.search(query)
        self._json(HTTPStatus.OK, {"hits": [h.to_dict() for h in hits]})

    def _post(self) -> None:
        if urlsplit(self.path).path.rstrip("/") != "/registrations":
            raise _HttpError(HTTPStatus.NOT_FOUND, {"error": "no such route"})
        if self.server.token and self._view() is not View.Full:
            raise _HttpError(HTTPStatus.UNAUTHORIZED, {"error": "submission requires the bearer token"})
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            raise _HttpError(HTTPStatus.REQUEST_ENTITY_TOO_LARGE, {"error": "body too large"})
        try:
            body = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(body, dict):
                raise ValueError("body must be a JSON object")
            graph = parse_turtle(body["turtle"])
            system = _resolve_iri(body["systemIri"], graph.prefixes)
            point = annex_point(int(body["point"]))
            risk = parse_token(RiskStatus, str(body["risk"]), RISK_TOKENS)
            role = parse_token(RegistrantRole, str(body["role"]), ROLE_TOKENS)
            with_models = bool(body.get("includesModelMetadata", False))
        except ParseError as exc:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": str(exc), "line": exc.line, "column": exc.column}) from None
        except KeyError as exc:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": f"missing field {exc}"}) from None
        except (ValueError, TypeError, GraphError, UnknownPrefixError) as exc:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": str(exc)}) from None
        try:
            record = self.server.store.submit_registration(graph, system, point, risk, role, with_models)
        except Rejected as exc:
            payload: dict = {"error": str(exc)}
            if exc.report is not None:
                payload["report"] = exc.report.to_dict()
            if exc.scenario is not None:
                payload["scenario"] = exc.scenario.to_dict()
            raise _HttpError(HTTPStatus.UNPROCESSABLE_ENTITY, payload) from None
        except UnmappedScenario as exc:
            raise _HttpError(HTTPStatus.UNPROCESSABLE_ENTITY, {"error": str(exc)}) from None
        except (InputError, ScenarioError) as exc:
            raise _HttpError(HTTPStatus.BAD_REQUEST, {"error": str(exc)}) from None
        self._json(HTTPStatus.CREATED, {"recordId": record.record_id, "visibility": record.visibility.value})


def make_server(
    store_dir: Optional[str] = None, bind: Optional[str] = None, token: Optional[str] = None
) -> RegistryServer:
    """Server configured from arguments, falling back to AICAT_* env vars."""
    store_dir = store_dir or os.environ.get("AICAT_STORE_DIR")
    if not store_dir:
        raise ValueError("no store directory: pass one or set AICAT_STORE_DIR")
    host, port = parse_bind(bind or os.environ.get("AICAT_BIND") or DEFAULT_BIND)
    token = token if token is not None else os.environ.get("AICAT_TOKEN")
    return RegistryServer((host, port), CatalogStore(store_dir), token)
