"""Flattened JSON export.

The document is a JSON array of node objects::

    [{"@id": "ex:proctify",
      "@type": ["airo:AISystem", "dcat:Resource"],
      "dct:title": [{"@value": "Proctify", "@language": "en"}],
      "airo:isProvidedBy": [{"@id": "ex:aiedux"}]}]

IRIs are compacted with the graph's prefix map where possible and written
in full otherwise. Plain string literals carry no ``@datatype``. Nodes are
sorted by ``@id``, keys and value arrays are sorted, blank nodes use
canonical labels. The format is self-contained; it is not run through any
JSON-LD processing algorithm.
"""

from __future__ import annotations

import json
from typing import Any

from ..graph import RDF_TYPE_IRI, XSD_STRING_IRI, BlankNode, Graph, Iri, Literal
from ..vocab import compact_iri
from .canonical import canonical_labels


def _iri_text(graph: Graph, iri: Iri) -> str:
    return compact_iri(graph.prefixes, iri) or iri.value


def to_json_nodes(graph: Graph) -> list[dict[str, Any]]:
    labels = canonical_labels(graph, strict=False)

    def ref(term) -> str:
        if isinstance(term, BlankNode):
            return "_:" + labels.get(term, term.label)
        return _iri_text(graph, term)

    def value(term) -> dict[str, str]:
        if isinstance(term, Literal):
            out = {"@value": term.lexical}
            if term.language is not None:
                out["@language"] = term.language
            elif term.datatype.value != XSD_STRING_IRI:
                out["@datatype"] = _iri_text(graph, term.datatype)
            return out
        return {"@id": ref(term)}

    nodes: dict[str, dict[str, Any]] = {}
    for t in graph.triples:
        node = nodes.setdefault(ref(t.subject), {"@id": ref(t.subject)})
        if t.predicate.value == RDF_TYPE_IRI and isinstance(t.object, Iri):
            node.setdefault("@type", []).append(_iri_text(graph, t.object))
        else:
            node.setdefault(_iri_text(graph, t.predicate), []).append(value(t.object))

    def value_key(v: dict[str, str]) -> str:
        return json.dumps(v, sort_keys=True, ensure_ascii=False)

    result = []
    for node_id in sorted(nodes):
        node = nodes[node_id]
        ordered: dict[str, Any] = {"@id": node["@id"]}
        if "@type" in node:
            ordered["@type"] = sorted(node["@type"])
        for key in sorted(k for k in node if not k.startswith("@")):
            ordered[key] = sorted(node[key], key=value_key)
        result.append(ordered)
    return result


def serialize_json_flat(graph: Graph) -> str:
    nodes = to_json_nodes(graph)
    if not nodes:
        return "[]"
    return json.dumps(nodes, indent=2, ensure_ascii=False)
