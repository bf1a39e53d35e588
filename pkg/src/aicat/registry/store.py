"""File-backed registration store.

Layout under the store root::

    index.json               recordId -> record metadata, resource IRI -> recordId
    records/<id>/record.json metadata, scenario, validation report, graph digest
    records/<id>/graph.nt    canonical N-Triples
    records/<id>/graph.ttl   Turtle for people
    quarantine/<id>/         records that failed an index rebuild
    .lock                    single-writer lock

Writers take the lock; every file is written to a temporary name and
renamed into place, so a crash leaves the previous index readable.
Readers work from an immutable snapshot that writers swap in whole.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import secrets
import shutil
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

from filelock import FileLock

from ..catalog import CATALOG_TYPES, ResourceKind, typed_resources
from ..graph import Graph, Iri, Literal
from ..profile import (
    NationalRegistration,
    RegistrantRole,
    RegistrationScenario,
    RiskStatus,
    View,
    Visibility,
    classify_scenario,
    required_fields,
    validate_registration,
    visibility_filter,
)
from ..rdfio import ParseError, parse_turtle, serialize, serialize_ntriples_canonical, serialize_turtle
from ..shacl import ValidationReport
from ..vocab import AICAT, AIRO, DCT, DPV, RDF, TECH

log = logging.getLogger(__name__)

INDEX_FILE = "index.json"
RECORDS_DIR = "records"
QUARANTINE_DIR = "quarantine"


class RegistryError(Exception):
    pass


class InputError(RegistryError):
    """The submission itself is malformed (bad graph, unknown system)."""


class Rejected(RegistryError):
    """The submission was refused; nothing was stored."""

    def __init__(self, message: str, report: Optional[ValidationReport] = None,
                 scenario: Optional[RegistrationScenario] = None) -> None:
        super().__init__(message)
        self.report = report
        self.scenario = scenario


class NotFound(RegistryError):
    pass


class Forbidden(RegistryError):
    pass


_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_ulid_lock = threading.Lock()
_ulid_last = (0, 0)


def new_record_id(now_ms: Optional[int] = None) -> str:
    """26-character ULID: 48-bit millisecond time plus 80 random bits.

    Ids from one process are strictly increasing, even within a millisecond.
    """
    global _ulid_last
    with _ulid_lock:
        ms = int(time.time() * 1000) if now_ms is None else now_ms
        last_ms, last_rand = _ulid_last
        if ms <= last_ms:
            ms, rand = last_ms, last_rand + 1
        else:
            rand = secrets.randbits(80)
        _ulid_last = (ms, rand)
    value = (ms << 80) | (rand & ((1 << 80) - 1))
    return "".join(_CROCKFORD[(value >> (5 * i)) & 31] for i in reversed(range(26)))


@dataclass(frozen=True)
class RegistryRecord:
    record_id: str
    catalog_iri: Optional[Iri]
    system_iri: Iri
    scenario: RegistrationScenario
    submitted_at: str
    graph_file: str
    report: ValidationReport
    prefixes: Mapping[str, str] = field(default_factory=dict)
    digest: str = ""
    resources: tuple[tuple[str, str], ...] = ()  # (kind, iri)

    @property
    def visibility(self) -> Visibility:
        return self.scenario.visibility

    def to_dict(self) -> dict:
        return {
            "recordId": self.record_id,
            "catalogIri": self.catalog_iri.value if self.catalog_iri else None,
            "systemIri": self.system_iri.value,
            "scenario": self.scenario.to_dict(),
            "submittedAt": self.submitted_at,
            "graphFile": self.graph_file,
            "graphDigest": self.digest,
            "prefixes": dict(sorted(self.prefixes.items())),
            "resources": [list(r) for r in self.resources],
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegistryRecord":
        return cls(
            record_id=data["recordId"],
            catalog_iri=Iri(data["catalogIri"]) if data.get("catalogIri") else None,
            system_iri=Iri(data["systemIri"]),
            scenario=RegistrationScenario.from_dict(data["scenario"]),
            submitted_at=data["submittedAt"],
            graph_file=data["graphFile"],
            report=_report_from_dict(data.get("report", {})),
            prefixes=dict(data.get("prefixes", {})),
            digest=data.get("graphDigest", ""),
            resources=tuple((k, i) for k, i in data.get("resources", [])),
        )


def _report_from_dict(data: dict) -> ValidationReport:
    """Stored reports are kept as JSON; only the summary is needed back."""
    from ..shacl import ConstraintKind, Severity, ValidationResult

    results = []
    for r in data.get("results", []):
        results.append(
            ValidationResult(
                focus=_node(r["focus"]),
                path=Iri(r["path"]),
                constraint=ConstraintKind(r["constraint"]),
                severity=Severity(r["severity"]),
                message=r["message"],
                shape=_node(r["shape"]),
                value=_term(r["value"]) if "value" in r else None,
            )
        )
    return ValidationReport(tuple(results), tuple(data.get("notices", [])))


def _node(text: str):
    from ..graph import BlankNode

    if text.startswith("_:"):
        return BlankNode(text[2:])
    return Iri(text[1:-1] if text.startswith("<") else text)


def _term(text: str):
    if text.startswith(("_:", "<")):
        return _node(text)
    graph = parse_turtle(f"<urn:x:s> <urn:x:p> {text} .")
    return next(iter(graph.triples)).object


COUNTRY_NS = "http://dbpedia.org/resource/"


def country_iri(text: str) -> Iri:
    """``Italy`` -> the DBpedia resource IRI; absolute IRIs pass through."""
    if ":" in text:
        return Iri(text)
    return Iri(COUNTRY_NS + text.strip().replace(" ", "_"))


@dataclass
class SearchQuery:
    kind: Optional[ResourceKind] = None
    country: Optional[Iri] = None
    market_status: Optional[Iri] = None
    text: Optional[str] = None
    view: View = View.Public


@dataclass(frozen=True)
class SearchHit:
    record_id: str
    resource_iri: Iri
    title: Optional[str]
    kind: ResourceKind

    def to_dict(self) -> dict:
        return {
            "recordId": self.record_id,
            "resourceIri": self.resource_iri.value,
            "title": self.title,
            "kind": self.kind.value,
        }


@dataclass(frozen=True)
class RebuildReport:
    rebuilt: tuple[str, ...] = ()
    quarantined: tuple[tuple[str, str], ...] = ()  # (recordId, reason)


@dataclass(frozen=True)
class _Snapshot:
    index: Mapping[str, RegistryRecord]
    resource_index: Mapping[str, str]


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _resources(graph: Graph) -> tuple[tuple[str, str], ...]:
    out = []
    for kind in ResourceKind:
        out.extend((kind.value, iri.value) for iri in typed_resources(graph, kind))
    return tuple(sorted(out))


def _resource_index(records: Mapping[str, RegistryRecord]) -> dict[str, str]:
    index: dict[str, str] = {}
    for rid in sorted(records):
        for _, iri in records[rid].resources:
            index[iri] = rid  # later registrations of the same resource win
    return index


class CatalogStore:
    """Registrations persisted under ``root_dir``.

    ``fault_hook`` is called with a stage name between writing a
    temporary file and renaming it; tests raise from it to simulate a crash.
    """

    def __init__(self, root_dir: os.PathLike | str, *, fault_hook: Optional[Callable[[str], None]] = None) -> None:
        self.root_dir = Path(root_dir)
        self.fault_hook = fault_hook
        self._lock = FileLock(str(self.root_dir / ".lock"))
        self._mutex = threading.Lock()
        self.root_dir.mkdir(parents=True, exist_ok=True)
        self._snapshot = self._load_index()

    # -- snapshot ------------------------------------------------------------

    @property
    def index(self) -> Mapping[str, RegistryRecord]:
        return self._snapshot.index

    @property
    def resource_index(self) -> Mapping[str, str]:
        return self._snapshot.resource_index

    def records(self) -> list[RegistryRecord]:
        snap = self._snapshot
        return [snap.index[rid] for rid in sorted(snap.index)]

    def _load_index(self) -> _Snapshot:
        path = self.root_dir / INDEX_FILE
        if not path.exists():
            return _Snapshot(MappingProxyType({}), MappingProxyType({}))
        data = json.loads(path.read_text(encoding="utf-8"))
        records = {rid: RegistryRecord.from_dict(r) for rid, r in data.get("records", {}).items()}
        return _Snapshot(MappingProxyType(records), MappingProxyType(dict(data.get("resources", {}))))

    def reload(self) -> None:
        self._snapshot = self._load_index()

    # -- files ---------------------------------------------------------------

    def _atomic_write(self, path: Path, text: str, stage: str) -> None:
        tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        if self.fault_hook is not None:
            self.fault_hook(stage)
        os.replace(tmp, path)

    def _write_index(self, records: Mapping[str, RegistryRecord], resources: Mapping[str, str]) -> None:
        doc = {
            "records": {rid: records[rid].to_dict() for rid in sorted(records)},
            "resources": dict(sorted(resources.items())),
        }
        self._atomic_write(self.root_dir / INDEX_FILE, json.dumps(doc, indent=2, sort_keys=True), "index")

    def record_dir(self, record_id: str) -> Path:
        return self.root_dir / RECORDS_DIR / record_id

    # -- operations ------------------------------------------------------------

    def submit_registration(
        self,
        graph: Graph,
        system_iri: Iri,
        point: int,
        risk: RiskStatus,
        role: RegistrantRole,
        includes_model_metadata: bool = False,
    ) -> RegistryRecord:
        """Classify, validate and store one registration.

        Raises Rejected (with the report) when validation fails or the
        route has no EU database entry, and InputError when the system is
        not in the graph. Nothing is written on rejection.
        """
        if AIRO.AISystem not in graph.types(system_iri):
            raise InputError(f"{system_iri.value} is not typed airo:AISystem in the submitted graph")
        # classify_scenario raises UnmappedScenario itself
        scenario = classify_scenario(point, risk, role)
        try:
            req_set = required_fields(scenario, includes_model_metadata)
        except NationalRegistration as exc:
            raise Rejected(str(exc), scenario=scenario) from None
        report = validate_registration(graph, req_set)
        if not report.conforms:
            raise Rejected(f"registration does not conform: {report.summary()}", report, scenario)

        nt = serialize_ntriples_canonical(graph)
        ttl = serialize_turtle(graph)
        catalogs = [c for c in graph.subjects(AICAT.system, system_iri) if isinstance(c, Iri)]
        if not catalogs:
            catalogs = [c for t in CATALOG_TYPES for c in graph.subjects(RDF.type, t) if isinstance(c, Iri)]
        with self._mutex, self._lock:
            current = self._load_index()
            record = RegistryRecord(
                record_id=new_record_id(),
                catalog_iri=sorted(catalogs, key=lambda i: i.value)[0] if catalogs else None,
                system_iri=system_iri,
                scenario=scenario,
                submitted_at=datetime.now(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z"),
                graph_file="graph.nt",
                report=report,
                prefixes=dict(graph.prefixes),
                digest=_digest(nt),
                resources=_resources(graph),
            )
            final = self.record_dir(record.record_id)
            staging = self.root_dir / RECORDS_DIR / f".{record.record_id}.staging"
            staging.mkdir(parents=True)
            try:
                self._atomic_write(staging / "graph.nt", nt, "graph.nt")
                self._atomic_write(staging / "graph.ttl", ttl, "graph.ttl")
                self._atomic_write(
                    staging / "record.json", json.dumps(record.to_dict(), indent=2, sort_keys=True), "record.json"
                )
                os.replace(staging, final)
            except BaseException:
                shutil.rmtree(staging, ignore_errors=True)
                raise
            records = dict(current.index)
            records[record.record_id] = record
            resources = _resource_index(records)
            self._write_index(records, resources)
            self._snapshot = _Snapshot(MappingProxyType(records), MappingProxyType(resources))
        log.info("stored registration %s for %s (%s)", record.record_id, system_iri.value, scenario.clause.value)
        return record

    def load_graph(self, record: RegistryRecord) -> Graph:
        text = (self.record_dir(record.record_id) / record.graph_file).read_text(encoding="utf-8")
        return parse_turtle(text).with_prefixes(record.prefixes)

    def get_record(self, record_id: str, view: View = View.Public) -> tuple[RegistryRecord, Graph]:
        record = self._snapshot.index.get(record_id)
        if record is None:
            raise NotFound(record_id)
        if not visibility_filter([record], view):
            raise Forbidden(record_id)
        return record, self.load_graph(record)

    def list_records(self, view: View = View.Public) -> list[RegistryRecord]:
        return visibility_filter(self.records(), view)

    def search(self, query: SearchQuery) -> list[SearchHit]:
        """Conjunctive filter over every visible record's graph."""
        hits = []
        needle = query.text.casefold() if query.text else None
        for record in self.list_records(query.view):
            graph = self.load_graph(record)
            kinds = [query.kind] if query.kind else list(ResourceKind)
            for kind in kinds:
                for iri in typed_resources(graph, kind):
                    if query.country is not None and query.country not in graph.objects(iri, DPV.hasCountry):
                        continue
                    if query.market_status is not None and query.market_status not in graph.objects(
                        iri, TECH.hasMarketAvailabilityStatus
                    ):
                        continue
                    texts = [
                        o.lexical
                        for p in (DCT.title, DCT.description)
                        for o in graph.objects(iri, p)
                        if isinstance(o, Literal)
                    ]
                    if needle is not None and not any(needle in t.casefold() for t in texts):
                        continue
                    titles = sorted(o.lexical for o in graph.objects(iri, DCT.title) if isinstance(o, Literal))
                    hits.append(SearchHit(record.record_id, iri, titles[0] if titles else None, kind))
        hits.sort(key=lambda h: (h.record_id, h.resource_iri.value, h.kind.value))
        return hits

    def export(self, record_id: str, fmt: str, view: View = View.Public) -> str:
        _, graph = self.get_record(record_id, view)
        return serialize(graph, fmt)


def rebuild_index(store: CatalogStore) -> tuple[CatalogStore, RebuildReport]:
    """Reconstruct the index from record directories alone.

    Records whose metadata or graph cannot be read, or whose graph no
    longer matches its stored digest, are moved to the quarantine directory.
    """
    root = store.root_dir
    records: dict[str, RegistryRecord] = {}
    rebuilt: list[str] = []
    quarantined: list[tuple[str, str]] = []
    with store._mutex, store._lock:
        base = root / RECORDS_DIR
        entries = sorted(p for p in base.iterdir() if p.is_dir() and not p.name.startswith(".")) if base.exists() else []
        for rdir in entries:
            try:
                record = RegistryRecord.from_dict(json.loads((rdir / "record.json").read_text(encoding="utf-8")))
                text = (rdir / record.graph_file).read_text(encoding="utf-8")
                if record.digest and _digest(text) != record.digest:
                    raise ValueError("graph digest mismatch")
                graph = parse_turtle(text)
                if record.resources != _resources(graph):
                    raise ValueError("resource list does not match the stored graph")
            except (OSError, ValueError, KeyError, ParseError) as exc:
                reason = f"{type(exc).__name__}: {exc}"
                log.warning("quarantining record %s: %s", rdir.name, reason)
                target = root / QUARANTINE_DIR / rdir.name
                target.parent.mkdir(parents=True, exist_ok=True)
                if target.exists():
                    shutil.rmtree(target)
                os.replace(rdir, target)
                quarantined.append((rdir.name, reason))
                continue
            records[record.record_id] = record
            rebuilt.append(record.record_id)
        resources = _resource_index(records)
        store._write_index(records, resources)
        store._snapshot = _Snapshot(MappingProxyType(records), MappingProxyType(resources))
    return store, RebuildReport(tuple(rebuilt), tuple(quarantined))
