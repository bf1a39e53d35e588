"""Immutable RDF-style terms, triples and graphs.

Graph values never change after construction: ``insert``, ``remove`` and
``merge`` return new graphs, so a graph can be handed to any number of
reader threads without locking.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType
from typing import Optional, Union

RDF_TYPE_IRI = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDF_LANGSTRING_IRI = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"
XSD_STRING_IRI = "http://www.w3.org/2001/XMLSchema#string"
XSD_DATE_IRI = "http://www.w3.org/2001/XMLSchema#date"

MAX_BLANK_NODES = 32

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_BNODE_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")
_DATE_RE = re.compile(r"^-?\d{4,}-\d{2}-\d{2}$")
_LANG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")


class GraphError(ValueError):
    """A term or triple violates the data model."""


class CapacityError(GraphError):
    """A graph has more blank nodes than a bounded algorithm accepts."""


def _escape_iri(value: str) -> str:
    out = []
    for ch in value:
        if ch in '<>"{}|^`\\' or ord(ch) <= 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


_LITERAL_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def escape_string(value: str) -> str:
    out = []
    for ch in value:
        if ch in _LITERAL_ESCAPES:
            out.append(_LITERAL_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.value, str):
            raise GraphError(f"IRI value must be a string, got {type(self.value).__name__}")
        value = unicodedata.normalize("NFC", self.value)
        if not value or any(ch.isspace() for ch in value):
            raise GraphError(f"invalid IRI {self.value!r}: empty or contains whitespace")
        if not _SCHEME_RE.match(value):
            raise GraphError(f"invalid IRI {self.value!r}: no scheme")
        object.__setattr__(self, "value", value)

    def n3(self) -> str:
        return f"<{_escape_iri(self.value)}>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self) -> None:
        if not isinstance(self.label, str) or not _BNODE_LABEL_RE.match(self.label):
            raise GraphError(f"invalid blank node label {self.label!r}")

    def n3(self) -> str:
        return f"_:{self.label}"

    def __str__(self) -> str:
        return self.n3()


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal value.

    Plain literals carry ``xsd:string``; language-tagged literals always carry
    ``rdf:langString`` and a lower-cased tag.
    """

    lexical: str
    datatype: Iri = Iri(XSD_STRING_IRI)
    language: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.lexical, str):
            raise GraphError("literal lexical form must be a string")
        if self.language is not None:
            if not _LANG_RE.match(self.language):
                raise GraphError(f"invalid language tag {self.language!r}")
            object.__setattr__(self, "language", self.language.lower())
            if self.datatype.value == XSD_STRING_IRI:
                object.__setattr__(self, "datatype", Iri(RDF_LANGSTRING_IRI))
            elif self.datatype.value != RDF_LANGSTRING_IRI:
                raise GraphError("a language tag requires datatype rdf:langString")
        elif self.datatype.value == RDF_LANGSTRING_IRI:
            raise GraphError("rdf:langString literal without a language tag")
        if self.datatype.value == XSD_DATE_IRI and not _DATE_RE.match(self.lexical):
            raise GraphError(f"xsd:date literal {self.lexical!r} is not YYYY-MM-DD")

    def n3(self) -> str:
        text = f'"{escape_string(self.lexical)}"'
        if self.language is not None:
            return f"{text}@{self.language}"
        if self.datatype.value == XSD_STRING_IRI:
            return text
        return f"{text}^^{self.datatype.n3()}"

    def __str__(self) -> str:
        return self.lexical


Subject = Union[Iri, BlankNode]
Term = Union[Iri, BlankNode, Literal]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Subject
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise GraphError(f"triple subject must be an IRI or blank node: {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise GraphError(f"triple predicate must be an IRI: {self.predicate!r}")
        if not isinstance(self.object, (Iri, BlankNode, Literal)):
            raise GraphError(f"triple object must be a term: {self.object!r}")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."

    def sort_key(self) -> tuple[str, str, str]:
        return (self.subject.n3(), self.predicate.n3(), self.object.n3())

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))


def triple(s: Subject, p: Iri, o: Term) -> Triple:
    return Triple(s, p, o)


class Graph:
    """A persistent set of triples plus a prefix map."""

    __slots__ = ("_triples", "_prefixes", "_by_subject", "_by_predicate", "_by_object")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Optional[Mapping[str, str]] = None,
    ) -> None:
        ts = frozenset(triples)
        for t in ts:
            if not isinstance(t, Triple):
                raise GraphError(f"not a triple: {t!r}")
        self._triples = ts
        self._prefixes = MappingProxyType(dict(prefixes or {}))
        self._by_subject: Optional[dict] = None
        self._by_predicate: Optional[dict] = None
        self._by_object: Optional[dict] = None

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> Mapping[str, str]:
        return self._prefixes

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.sort_key))

    def __contains__(self, t: object) -> bool:
        return t in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"<Graph {len(self)} triples>"

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "Graph":
        return Graph(self._triples, prefixes)

    def insert(self, t: Triple) -> "Graph":
        if not isinstance(t, Triple):
            raise GraphError(f"not a triple: {t!r}")
        if t in self._triples:
            return self
        return Graph(self._triples | {t}, self._prefixes)

    def remove(self, t: Triple) -> "Graph":
        if t not in self._triples:
            return self
        return Graph(self._triples - {t}, self._prefixes)

    def _index(self) -> None:
        by_s: dict = {}
        by_p: dict = {}
        by_o: dict = {}
        for t in self._triples:
            by_s.setdefault(t.subject, []).append(t)
            by_p.setdefault(t.predicate, []).append(t)
            by_o.setdefault(t.object, []).append(t)
        self._by_subject, self._by_predicate, self._by_object = by_s, by_p, by_o

    def match(
        self,
        s: Optional[Subject] = None,
        p: Optional[Iri] = None,
        o: Optional[Term] = None,
    ) -> list[Triple]:
        """Triples agreeing with every bound position, in canonical order."""
        if self._by_subject is None:
            self._index()
        candidates: Iterable[Triple]
        if s is not None:
            candidates = self._by_subject.get(s, ())
        elif o is not None:
            candidates = self._by_object.get(o, ())
        elif p is not None:
            candidates = self._by_predicate.get(p, ())
        else:
            candidates = self._triples
        found = [
            t
            for t in candidates
            if (s is None or t.subject == s)
            and (p is None or t.predicate == p)
            and (o is None or t.object == o)
        ]
        found.sort(key=Triple.sort_key)
        return found

    def objects(self, s: Subject, p: Iri) -> list[Term]:
        return [t.object for t in self.match(s, p, None)]

    def subjects(self, p: Optional[Iri] = None, o: Optional[Term] = None) -> list[Subject]:
        seen = {t.subject for t in self.match(None, p, o)}
        return sorted(seen, key=lambda term: term.n3())

    def types(self, s: Subject) -> set[Iri]:
        return {o for o in self.objects(s, Iri(RDF_TYPE_IRI)) if isinstance(o, Iri)}

    def blank_nodes(self) -> set[BlankNode]:
        found = set()
        for t in self._triples:
            if isinstance(t.subject, BlankNode):
                found.add(t.subject)
            if isinstance(t.object, BlankNode):
                found.add(t.object)
        return found

    def merge(self, other: "Graph") -> "Graph":
        return merge(self, other)

    def isomorphic(self, other: "Graph") -> bool:
        return isomorphic(self, other)


def insert(graph: Graph, t: Triple) -> Graph:
    return graph.insert(t)


def match(
    graph: Graph,
    s: Optional[Subject] = None,
    p: Optional[Iri] = None,
    o: Optional[Term] = None,
) -> list[Triple]:
    return graph.match(s, p, o)


def _fresh_label(base: str, taken: set[str]) -> str:
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


def merge(a: Graph, b: Graph) -> Graph:
    """Union of two graphs.

    Blank nodes of ``b`` whose labels also occur in ``a`` are renamed, so
    the two graphs never share a blank node by accident. On conflicting
    prefix bindings ``a`` wins.
    """
    a_labels = {n.label for n in a.blank_nodes()}
    b_labels = {n.label for n in b.blank_nodes()}
    taken = a_labels | b_labels
    renames: dict[BlankNode, BlankNode] = {}
    for label in sorted(b_labels & a_labels):
        new = _fresh_label(label, taken)
        taken.add(new)
        renames[BlankNode(label)] = BlankNode(new)

    def rn(term):
        return renames.get(term, term) if isinstance(term, BlankNode) else term

    moved = (Triple(rn(t.subject), t.predicate, rn(t.object)) for t in b.triples)
    prefixes = dict(b.prefixes)
    for label, ns in a.prefixes.items():
        prefixes[label] = ns
    return Graph(a.triples | frozenset(moved), prefixes)


def _is_ground(t: Triple) -> bool:
    return not isinstance(t.subject, BlankNode) and not isinstance(t.object, BlankNode)


def _signature(node: BlankNode, blank_triples: list[Triple]) -> tuple:
    sig = []
    for t in blank_triples:
        if t.subject == node:
            o = t.object
            if o == node:
                other = "self"
            elif isinstance(o, BlankNode):
                other = "_"
            else:
                other = o.n3()
            sig.append(("s", t.predicate.value, other))
        elif t.object == node:
            other = "_" if isinstance(t.subject, BlankNode) else t.subject.n3()
            sig.append(("o", t.predicate.value, other))
    return tuple(sorted(sig))


def isomorphic(a: Graph, b: Graph) -> bool:
    """True iff some bijection of blank nodes makes the triple sets equal.

    Backtracking search; candidates are pruned to nodes sharing the same
    degree signature (predicates, directions and ground neighbours).
    """
    if len(a) != len(b):
        return False
    a_ground = {t for t in a.triples if _is_ground(t)}
    b_ground = {t for t in b.triples if _is_ground(t)}
    if a_ground != b_ground:
        return False
    a_blank = [t for t in a.triples if not _is_ground(t)]
    b_blank = [t for t in b.triples if not _is_ground(t)]
    if len(a_blank) != len(b_blank):
        return False
    a_nodes = sorted(a.blank_nodes(), key=lambda n: n.label)
    b_nodes = sorted(b.blank_nodes(), key=lambda n: n.label)
    if len(a_nodes) != len(b_nodes):
        return False
    if not a_nodes:
        return True
    if len(a_nodes) > MAX_BLANK_NODES:
        raise CapacityError(f"isomorphism check supports at most {MAX_BLANK_NODES} blank nodes")

    a_sig = {n: _signature(n, a_blank) for n in a_nodes}
    b_sig = {n: _signature(n, b_blank) for n in b_nodes}
    by_sig: dict[tuple, list[BlankNode]] = {}
    for n in b_nodes:
        by_sig.setdefault(b_sig[n], []).append(n)
    candidates = {n: by_sig.get(a_sig[n], []) for n in a_nodes}
    if any(not c for c in candidates.values()):
        return False
    if Counter(a_sig.values()) != Counter(b_sig.values()):
        return False

    b_set = set(b_blank)
    touching: dict[BlankNode, list[Triple]] = {n: [] for n in a_nodes}
    for t in a_blank:
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode) and t not in touching[term]:
                touching[term].append(t)
    order = sorted(a_nodes, key=lambda n: (len(candidates[n]), n.label))
    mapping: dict[BlankNode, BlankNode] = {}
    used: set[BlankNode] = set()

    def image(term):
        return mapping.get(term) if isinstance(term, BlankNode) else term

    def consistent(node: BlankNode) -> bool:
        for t in touching[node]:
            s, o = image(t.subject), image(t.object)
            if s is None or o is None:
                continue
            if Triple(s, t.predicate, o) not in b_set:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        node = order[i]
        for cand in candidates[node]:
            if cand in used:
                continue
            mapping[node] = cand
            used.add(cand)
            if consistent(node) and search(i + 1):
                return True
            del mapping[node]
            used.discard(cand)
        return False

    return search(0)
