"""The two example documents of the AICat profile, shipped verbatim.

As printed, both documents use prefixes they never declare: the example
catalogue uses ``odrl:`` and the empty prefix (``:proctify``), the example
shape uses the empty prefix. The bindings below fill those gaps; the empty
prefix is bound to the catalogue's example namespace so ``:proctify`` and
``ex:proctify`` denote the same resource.
"""

from __future__ import annotations

from importlib import resources

from .graph import Graph
from .rdfio import SourceDocument, parse_turtle
from .vocab import ODRL

EXAMPLE_NS = "http://example.com/proctify#"

LISTING_PREFIXES: dict[str, str] = {"odrl": ODRL.iri, "": EXAMPLE_NS}


def listing_text(name: str) -> str:
    return resources.files("aicat").joinpath("data", f"{name}.ttl").read_text(encoding="utf-8")


def catalogue_text() -> str:
    return listing_text("listing2")


def shape_text() -> str:
    return listing_text("listing1")


def catalogue_graph() -> Graph:
    return parse_turtle(SourceDocument(catalogue_text(), prefixes=LISTING_PREFIXES))


def shape_graph() -> Graph:
    return parse_turtle(SourceDocument(shape_text(), prefixes={"": EXAMPLE_NS}))


def self_contained(text: str, prefixes: dict[str, str] = LISTING_PREFIXES) -> str:
    """``text`` with declarations for ``prefixes`` prepended."""
    head = "".join(f"@prefix {label}: <{ns}> .\n" for label, ns in prefixes.items())
    return head + text
