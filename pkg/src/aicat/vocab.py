"""Namespaces and terms of the AICat profile, and CURIE handling.

Namespace IRIs for dcat and rdfs follow the example catalogue document
verbatim (they point at specification pages rather than the canonical W3C
namespaces) so that fixtures parse to exactly the IRIs they were written with.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass

from .graph import Iri


class UnknownPrefixError(KeyError):
    """A CURIE uses a prefix the prefix map does not bind."""


@dataclass(frozen=True)
class Namespace:
    label: str
    iri: str

    def __post_init__(self) -> None:
        if not self.iri.endswith(("#", "/")):
            raise ValueError(f"namespace IRI must end with '#' or '/': {self.iri}")

    def term(self, local: str) -> Iri:
        return Iri(self.iri + local)

    def __getattr__(self, name: str) -> Iri:
        if name.startswith("__"):
            raise AttributeError(name)
        return self.term(name)

    def __getitem__(self, local: str) -> Iri:
        return self.term(local)


RDF = Namespace("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("rdfs", "https://www.w3.org/TR/rdf12-schema/")
XSD = Namespace("xsd", "http://www.w3.org/2001/XMLSchema#")
DCT = Namespace("dct", "http://purl.org/dc/terms/")
DCAT = Namespace("dcat", "https://www.w3.org/TR/vocab-dcat-3/")
DPV = Namespace("dpv", "https://w3id.org/dpv#")
TECH = Namespace("tech", "https://w3id.org/dpv/tech#")
AIRO = Namespace("airo", "https://w3id.org/airo#")
AIUP = Namespace("aiup", "https://w3id.org/aiup#")
AICAT = Namespace("aicat", "https://w3id.org/aicat#")
ODRL = Namespace("odrl", "http://www.w3.org/ns/odrl/2/")
SH = Namespace("sh", "http://www.w3.org/ns/shacl#")

NAMESPACES: tuple[Namespace, ...] = (RDF, RDFS, XSD, DCT, DCAT, DPV, TECH, AIRO, AIUP, AICAT, ODRL, SH)

# label -> namespace IRI, for documents and exports that want the profile's bindings
DEFAULT_PREFIXES: dict[str, str] = {ns.label: ns.iri for ns in NAMESPACES}

_CLASSES = (
    "aicat:Catalog",
    "dcat:Catalog",
    "dcat:Resource",
    "dcat:Dataset",
    "airo:AISystem",
    "airo:AIModel",
    "airo:Data",
    "airo:AIProvider",
    "airo:AIDeployer",
    "airo:License",
    "aiup:UsePolicy",
    "aiup:UseOffer",
    "tech:MarketAvailabilityStatus",
    "dpv:Country",
    "sh:NodeShape",
    "sh:PropertyShape",
    "xsd:string",
    "xsd:date",
    "xsd:integer",
    "rdf:langString",
)

_PROPERTIES = (
    "aicat:system",
    "aicat:model",
    "dcat:dataset",
    "dcat:contactPoint",
    "airo:isProvidedBy",
    "airo:isDeployedBy",
    "airo:hasModel",
    "airo:hasTrainingData",
    "airo:hasValidationData",
    "airo:hasTestingData",
    "airo:hasInput",
    "airo:hasOutput",
    "airo:hasLicense",
    "odrl:hasPolicy",
    "tech:hasMarketAvailabilityStatus",
    "dpv:hasCountry",
    "dct:title",
    "dct:identifier",
    "dct:description",
    "dct:created",
    "dct:issued",
    "dct:isReferencedBy",
    "sh:targetClass",
    "sh:path",
    "sh:property",
    "sh:minCount",
    "sh:maxCount",
    "sh:class",
    "sh:datatype",
    "sh:nodeKind",
    "rdf:type",
)

# Other market statuses are accepted as opaque IRIs.
_INSTANCES = {"tech:MarketAvailable": "tech:MarketAvailabilityStatus"}


def expand_curie(prefixes: Mapping[str, str], curie: str) -> Iri:
    """Expand ``label:local`` using ``prefixes``.

    >>> expand_curie(DEFAULT_PREFIXES, "airo:AISystem").value
    'https://w3id.org/airo#AISystem'
    """
    if curie.count(":") < 1:
        raise ValueError(f"not a CURIE: {curie!r}")
    label, local = curie.split(":", 1)
    if label not in prefixes:
        raise UnknownPrefixError(label)
    return Iri(prefixes[label] + local)


_LOCAL_RE = re.compile(r"^(?:[A-Za-z0-9_]|[^\x00-\x7f])(?:(?:[A-Za-z0-9_.\-]|[^\x00-\x7f])*(?:[A-Za-z0-9_\-]|[^\x00-\x7f]))?$")
_LABEL_RE = re.compile(r"^(?:[A-Za-z](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?$")


def compact_iri(prefixes: Mapping[str, str], iri: Iri | str) -> str | None:
    """Best-matching ``label:local`` form for ``iri``, or None.

    The longest namespace wins; ties prefer a named prefix over the empty
    one, then the alphabetically first label.
    Only local parts that are valid without escaping are produced.
    """
    value = iri.value if isinstance(iri, Iri) else iri
    best: tuple[int, bool, str, str] | None = None
    for label, ns in prefixes.items():
        if not ns or not value.startswith(ns) or not _LABEL_RE.match(label):
            continue
        local = value[len(ns):]
        if local and not _LOCAL_RE.match(local):
            continue
        key = (-len(ns), label == "", label, local)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return f"{best[2]}:{best[3]}"


class TermRegistry:
    """Lookup table for exactly the terms the profile models."""

    def __init__(self) -> None:
        self.classes: frozenset[Iri] = frozenset(expand_curie(DEFAULT_PREFIXES, c) for c in _CLASSES)
        self.properties: frozenset[Iri] = frozenset(
            expand_curie(DEFAULT_PREFIXES, p) for p in _PROPERTIES
        )
        self.instances: dict[Iri, Iri] = {
            expand_curie(DEFAULT_PREFIXES, i): expand_curie(DEFAULT_PREFIXES, c)
            for i, c in _INSTANCES.items()
        }
        self._by_name = {n: expand_curie(DEFAULT_PREFIXES, n) for n in (*_CLASSES, *_PROPERTIES, *_INSTANCES)}

    def __contains__(self, iri: object) -> bool:
        return iri in self.classes or iri in self.properties or iri in self.instances

    def __getitem__(self, short_name: str) -> Iri:
        return self._by_name[short_name]

    def names(self) -> list[str]:
        return sorted(self._by_name)

    def is_property(self, iri: Iri) -> bool:
        return iri in self.properties

    def is_class(self, iri: Iri) -> bool:
        return iri in self.classes


REGISTRY = TermRegistry()

RDF_TYPE = RDF.type
