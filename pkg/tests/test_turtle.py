from __future__ import annotations

import json

import pytest

from aicat.graph import BlankNode, Graph, Iri, Literal, Triple
from aicat.rdfio import ParseError, ParseErrorKind, SourceDocument, parse_turtle, serialize_turtle
from aicat.vocab import RDF, SH, XSD

from conftest import FIXTURES, PROCTIFY

CORPUS = FIXTURES / "turtle"
MANIFEST = json.loads((CORPUS / "manifest.json").read_text(encoding="utf-8"))


def read(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.mark.parametrize("entry", MANIFEST["valid"], ids=lambda e: e["name"])
def test_valid_fixture_matches_expected(entry):
    graph = parse_turtle(read(entry["name"] + ".ttl"))
    expected = parse_turtle(read(entry["expect"]))
    assert graph.isomorphic(expected)


@pytest.mark.parametrize("entry", MANIFEST["valid"], ids=lambda e: e["name"])
def test_valid_fixture_round_trips(entry):
    graph = parse_turtle(read(entry["name"] + ".ttl"))
    assert parse_turtle(serialize_turtle(graph)).isomorphic(graph)


@pytest.mark.parametrize("entry", MANIFEST["malformed"], ids=lambda e: e["name"])
def test_malformed_fixture_position(entry):
    with pytest.raises(ParseError) as info:
        parse_turtle(read(entry["name"] + ".ttl"))
    err = info.value
    assert (err.kind.value, err.line, err.column) == (entry["kind"], entry["line"], entry["column"])


def test_corpus_size():
    assert len(MANIFEST["valid"]) + len(MANIFEST["malformed"]) >= 25
    assert len(MANIFEST["malformed"]) >= 7
    assert {e["kind"] for e in MANIFEST["malformed"]} == {k.value for k in ParseErrorKind}


def _rdflib_normalised(graph):
    import rdflib

    out = rdflib.Graph()
    for s, p, o in graph:
        if isinstance(o, rdflib.Literal):
            if o.language:
                o = rdflib.Literal(str(o), lang=o.language.lower())
            elif o.datatype == rdflib.XSD.string:
                o = rdflib.Literal(str(o))
        out.add((s, p, o))
    return out


@pytest.mark.parametrize("entry", MANIFEST["valid"], ids=lambda e: e["name"])
def test_expected_files_agree_with_rdflib(entry):
    rdflib = pytest.importorskip("rdflib")
    from rdflib.compare import isomorphic

    # language tags are case-folded and xsd:string is implicit in this model
    ours = _rdflib_normalised(rdflib.Graph().parse(str(CORPUS / (entry["name"] + ".ttl")), format="turtle"))
    want = _rdflib_normalised(rdflib.Graph().parse(str(CORPUS / entry["expect"]), format="nt"))
    assert isomorphic(ours, want)


class TestParser:
    def test_single_triple(self):
        assert len(parse_turtle("@prefix ex: <http://example.com/> . ex:a ex:b ex:c .")) == 1

    def test_undeclared_prefix(self):
        with pytest.raises(ParseError) as info:
            parse_turtle("ex:a ex:b ex:c .")
        assert info.value.kind is ParseErrorKind.UnknownPrefix
        assert (info.value.line, info.value.column) == (1, 1)

    def test_prefix_map_preserved(self):
        g = parse_turtle("@prefix ex: <http://example.com/> . ex:a ex:b ex:c .")
        assert g.prefixes == {"ex": "http://example.com/"}

    def test_implicit_prefixes_overridable(self):
        doc = SourceDocument("@prefix ex: <http://two/> . ex:a ex:b ex:c .", prefixes={"ex": "http://one/"})
        assert Triple(Iri("http://two/a"), Iri("http://two/b"), Iri("http://two/c")) in parse_turtle(doc).triples

    def test_integer_shorthand_equals_typed(self):
        a = parse_turtle('<http://e/s> <http://e/p> 1 .')
        b = parse_turtle('<http://e/s> <http://e/p> "1"^^<http://www.w3.org/2001/XMLSchema#integer> .')
        assert a == b

    def test_relative_iri_needs_base(self):
        with pytest.raises(ParseError):
            parse_turtle("<s> <http://e/p> <http://e/o> .")
        g = parse_turtle("<s> <http://e/p> <http://e/o> .", base="http://e/")
        assert g.subjects() == [Iri("http://e/s")]

    def test_base_directive_unsupported(self):
        with pytest.raises(ParseError) as info:
            parse_turtle("@base <http://e/> .")
        assert info.value.kind is ParseErrorKind.UnexpectedToken

    def test_collections_unsupported(self):
        with pytest.raises(ParseError) as info:
            parse_turtle("<http://e/s> <http://e/p> ( 1 2 ) .")
        assert info.value.kind is ParseErrorKind.UnexpectedToken

    def test_a_ignores_document_rdf_prefix(self):
        g = parse_turtle("@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns> . <http://e/s> a <http://e/T> .")
        assert g.types(Iri("http://e/s")) == {Iri("http://e/T")}
        assert next(iter(g)).predicate == RDF.type

    def test_blank_nodes_relabelled_in_order(self):
        g = parse_turtle("_:zz <http://e/p> _:aa .")
        t = next(iter(g))
        assert (t.subject, t.object) == (BlankNode("b0"), BlankNode("b1"))

    def test_error_at_or_before_offending_token(self):
        text = '@prefix ex: <http://e/> .\nex:s ex:p "ok" ;\n    ex:q ex:o !\n'
        with pytest.raises(ParseError) as info:
            parse_turtle(text)
        err = info.value
        lines = text.split("\n")
        offset = lines[err.line - 1][: err.column - 1]
        assert "!" not in offset
        assert (err.line, err.column) <= (3, lines[2].index("!") + 1)


class TestListings:
    def test_listing1_property_shape(self, listing1):
        bnodes = [t.subject for t in listing1.match(None, RDF.type, SH.PropertyShape)]
        assert len(bnodes) == 1 and isinstance(bnodes[0], BlankNode)
        assert listing1.objects(bnodes[0], SH.minCount) == [Literal("1", XSD.integer)]

    def test_listing2_values(self, listing2):
        assert Literal("Proctify", language="en") in listing2.objects(PROCTIFY, Iri("http://purl.org/dc/terms/title"))
        assert listing2.objects(PROCTIFY, Iri("https://w3id.org/dpv#hasCountry")) == [
            Iri("http://dbpedia.org/resource/Italy")
        ]

    def test_listing2_statement_count(self, listing2):
        # counted by hand from the document: 9 + 6 + 8 + 11 + 3
        assert len(listing2) == 37

    def test_verbatim_listing_needs_declarations(self):
        from aicat.fixtures import catalogue_text

        with pytest.raises(ParseError) as info:
            parse_turtle(catalogue_text())
        assert info.value.kind is ParseErrorKind.UnknownPrefix


class TestSerializer:
    def test_empty_graph(self):
        assert parse_turtle(serialize_turtle(Graph(prefixes={"ex": "http://e/"}))) == Graph()

    def test_listing2_round_trip(self, listing2):
        text = serialize_turtle(listing2)
        assert parse_turtle(text).isomorphic(listing2)
        assert serialize_turtle(listing2) == text

    def test_single_blank_node(self):
        g = Graph([Triple(BlankNode("q"), Iri("http://e/p"), Literal("v"))])
        assert parse_turtle(serialize_turtle(g)).isomorphic(g)

    def test_blank_cycle_round_trips(self):
        g = Graph([
            Triple(BlankNode("a"), Iri("http://e/p"), BlankNode("b")),
            Triple(BlankNode("b"), Iri("http://e/p"), BlankNode("a")),
        ])
        assert parse_turtle(serialize_turtle(g)).isomorphic(g)

    def test_lang_tagged_before_plain(self):
        g = Graph([
            Triple(Iri("http://e/s"), Iri("http://e/t"), Literal("a")),
            Triple(Iri("http://e/s"), Iri("http://e/t"), Literal("z", language="en")),
        ])
        text = serialize_turtle(g)
        assert text.index('"z"@en') < text.index('"a"')

    def test_type_written_as_a(self, listing2):
        assert "rdf:type" not in serialize_turtle(listing2)
