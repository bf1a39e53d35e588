from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aicat.graph import BlankNode, CapacityError, Graph, Iri, Literal, Triple
from aicat.rdfio import (
    canonical_graph,
    parse_turtle,
    serialize_json_flat,
    serialize_ntriples_canonical,
    serialize_turtle,
    to_json_nodes,
)
from aicat.vocab import AICAT, RDF

PROVIDED_BY_LINE = (
    "<http://example.com/proctify#proctify> <https://w3id.org/airo#isProvidedBy> "
    "<http://example.com/proctify#aiedux> ."
)

E = "http://e/"
preds = st.sampled_from([Iri(E + "p"), Iri(E + "q")])
iris = st.sampled_from([Iri(E + x) for x in "abc"])
literals = st.one_of(
    st.text(max_size=4).map(Literal),
    st.sampled_from(["en", "it"]).map(lambda lang: Literal("t", language=lang)),
    st.integers(-5, 5).map(lambda i: Literal(str(i), Iri("http://www.w3.org/2001/XMLSchema#integer"))),
)


@st.composite
def graphs(draw):
    n = draw(st.integers(0, 5))
    bnodes = [BlankNode(f"n{i}") for i in range(n)]
    subjects = st.sampled_from(bnodes) | iris if bnodes else iris
    objects = st.one_of(subjects, literals)
    triples = draw(st.lists(st.builds(Triple, subjects, preds, objects), max_size=12))
    return Graph(triples, {"ex": E})


def relabel(graph: Graph, seed: int) -> Graph:
    nodes = sorted(graph.blank_nodes(), key=lambda b: b.label)
    names = [f"z{i}" for i in range(len(nodes))]
    random.Random(seed).shuffle(names)
    mapping = dict(zip(nodes, names))

    def rn(term):
        return BlankNode(mapping[term]) if isinstance(term, BlankNode) else term

    return Graph((Triple(rn(t.subject), t.predicate, rn(t.object)) for t in graph), graph.prefixes)


class TestNTriples:
    def test_listing2_line_once(self, listing2):
        lines = serialize_ntriples_canonical(listing2).splitlines()
        assert lines.count(PROVIDED_BY_LINE) == 1
        assert len(lines) == 37

    def test_empty(self):
        assert serialize_ntriples_canonical(Graph()) == ""

    def test_sorted_and_newline_terminated(self, listing2):
        text = serialize_ntriples_canonical(listing2)
        lines = text.split("\n")
        assert lines[-1] == "" and lines[:-1] == sorted(lines[:-1])

    def test_labels_by_first_appearance(self):
        g = parse_turtle("[ <http://e/p> [ <http://e/q> <http://e/o> ] ] <http://e/r> [] .")
        firsts = []
        for line in serialize_ntriples_canonical(g).splitlines():
            for tok in line.split():
                if tok.startswith("_:") and tok not in firsts:
                    firsts.append(tok)
        assert firsts == ["_:b0", "_:b1", "_:b2"]

    def test_capacity(self):
        g = Graph(Triple(BlankNode(f"x{i}"), Iri(E + "p"), Literal(str(i))) for i in range(33))
        with pytest.raises(CapacityError):
            serialize_ntriples_canonical(g)

    @settings(max_examples=150, deadline=None)
    @given(graphs(), st.integers(0, 1000))
    def test_relabel_invariant(self, g, seed):
        assert serialize_ntriples_canonical(relabel(g, seed)) == serialize_ntriples_canonical(g)

    @settings(max_examples=150, deadline=None)
    @given(graphs())
    def test_idempotent(self, g):
        text = serialize_ntriples_canonical(g)
        assert serialize_ntriples_canonical(parse_turtle(text)) == text

    @settings(max_examples=150, deadline=None)
    @given(graphs())
    def test_canonical_graph_isomorphic(self, g):
        assert canonical_graph(g).isomorphic(g)

    @settings(max_examples=100, deadline=None)
    @given(graphs(), graphs())
    def test_equal_output_iff_isomorphic(self, a, b):
        # two independent procedures must agree
        same_text = serialize_ntriples_canonical(a) == serialize_ntriples_canonical(b)
        assert same_text == a.isomorphic(b)

    @settings(max_examples=100, deadline=None)
    @given(graphs())
    def test_turtle_round_trip(self, g):
        assert parse_turtle(serialize_turtle(g)).isomorphic(g)


class TestJson:
    def test_empty(self):
        assert serialize_json_flat(Graph()) == "[]"

    def test_single_type(self):
        g = Graph([Triple(Iri(E + "a"), RDF.type, AICAT.Catalog)], {"ex": E, "aicat": AICAT.iri})
        assert to_json_nodes(g) == [{"@id": "ex:a", "@type": ["aicat:Catalog"]}]

    def test_listing2_has_model(self, listing2):
        nodes = {n["@id"]: n for n in json.loads(serialize_json_flat(listing2))}
        assert {"@id": "ex:susbehaved_model"} in nodes["ex:proctify"]["airo:hasModel"]
        assert nodes["ex:proctify"]["dct:title"] == [{"@value": "Proctify", "@language": "en"}]
        assert nodes["ex:susbehaved_model"]["dct:issued"] == [{"@value": "2024-02-15", "@datatype": "xsd:date"}]

    def test_nodes_sorted(self, listing2):
        ids = [n["@id"] for n in to_json_nodes(listing2)]
        assert ids == sorted(ids)

    @settings(max_examples=100, deadline=None)
    @given(graphs(), st.randoms())
    def test_permutation_stable(self, g, rnd):
        triples = list(g.triples)
        rnd.shuffle(triples)
        assert serialize_json_flat(Graph(triples, g.prefixes)) == serialize_json_flat(g)
