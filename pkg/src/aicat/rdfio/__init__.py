"""Reading and writing the three wire formats: Turtle, canonical N-Triples, flat JSON."""

from .canonical import canonical_graph, canonical_labels, serialize_ntriples_canonical
from .jsonflat import serialize_json_flat, to_json_nodes
from .turtle import (
    ParseError,
    ParseErrorKind,
    SourceDocument,
    parse_turtle,
    serialize_turtle,
)

FORMATS = ("turtle", "ntriples", "json")


def serialize(graph, fmt: str) -> str:
    if fmt == "turtle":
        return serialize_turtle(graph)
    if fmt == "ntriples":
        return serialize_ntriples_canonical(graph)
    if fmt == "json":
        return serialize_json_flat(graph)
    raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


__all__ = [
    "FORMATS",
    "ParseError",
    "ParseErrorKind",
    "SourceDocument",
    "canonical_graph",
    "canonical_labels",
    "parse_turtle",
    "serialize",
    "serialize_json_flat",
    "serialize_ntriples_canonical",
    "serialize_turtle",
    "to_json_nodes",
]
