"""Hand-transcribed registration matrix and synthetic records."""

from __future__ import annotations

from aicat.graph import Graph, Iri, Literal, Triple
from aicat.profile import FieldRequirementSet, Necessity, RegistrantRole as Role, RiskStatus as Risk, Target, target_class
from aicat.vocab import AIRO, RDF, XSD

E = "http://example.com/reg#"

PUB_A = ("A49_1", "A", frozenset(range(1, 13)), "PublicEU")
NP_A = ("A49_1_4", "A", frozenset({1, 2, 3, 4, 5, 7, 10}), "NonPublicEU")
PUB_B = ("A49_2", "B", frozenset(range(1, 10)), "PublicEU")
NP_B = ("A49_2_4", "B", frozenset({1, 2, 3, 4, 5, 8, 9}), "NonPublicEU")
PUB_C = ("A49_3", "C", frozenset(range(1, 6)), "PublicEU")
NP_C = ("A49_3_4", "C", frozenset({1, 2, 3}), "NonPublicEU")
NAT = ("A49_5", None, frozenset(), "NationalLevel")
NONE = None  # no route: UnmappedScenario

# columns are Annex III points 1..8
MATRIX = {
    (Risk.HighRisk, Role.Provider): [NP_A, NAT, PUB_A, PUB_A, PUB_A, NP_A, NP_A, PUB_A],
    (Risk.HighRisk, Role.AuthorisedRepresentative): [NP_A, NAT, PUB_A, PUB_A, PUB_A, NP_A, NP_A, PUB_A],
    (Risk.HighRisk, Role.PublicAuthorityDeployer): [NP_C, NAT, PUB_C, PUB_C, PUB_C, NP_C, NP_C, PUB_C],
    (Risk.AssessedNonHighRisk, Role.Provider): [NP_B, PUB_B, PUB_B, PUB_B, PUB_B, NP_B, NP_B, PUB_B],
    (Risk.AssessedNonHighRisk, Role.AuthorisedRepresentative): [NP_B, PUB_B, PUB_B, PUB_B, PUB_B, NP_B, NP_B, PUB_B],
    (Risk.AssessedNonHighRisk, Role.PublicAuthorityDeployer): [NONE] * 8,
}

CASES = [(point, risk, role, row[point - 1]) for (risk, role), row in MATRIX.items() for point in range(1, 9)]

# one (point, risk, role) input per EU database route
EU_ROUTES = {
    "A49_1": (3, Risk.HighRisk, Role.Provider),
    "A49_1_4": (1, Risk.HighRisk, Role.Provider),
    "A49_2": (2, Risk.AssessedNonHighRisk, Role.Provider),
    "A49_2_4": (7, Risk.AssessedNonHighRisk, Role.AuthorisedRepresentative),
    "A49_3": (4, Risk.HighRisk, Role.PublicAuthorityDeployer),
    "A49_3_4": (6, Risk.HighRisk, Role.PublicAuthorityDeployer),
}

_TITLE = Iri("http://purl.org/dc/terms/title")
_POLICY = Iri("http://www.w3.org/ns/odrl/2/hasPolicy")

# Required (target, predicate) pairs per route, read off the necessity assignment
REQUIRED = {
    "A49_1": {("System", AIRO.isProvidedBy), ("System", _TITLE), ("System", _POLICY), ("Operator", _TITLE)},
    "A49_1_4": {("System", AIRO.isProvidedBy), ("System", _TITLE), ("System", _POLICY), ("Operator", _TITLE)},
    "A49_2": {("System", AIRO.isProvidedBy), ("System", _TITLE), ("System", _POLICY), ("Operator", _TITLE)},
    "A49_2_4": {("System", AIRO.isProvidedBy), ("System", _TITLE), ("System", _POLICY), ("Operator", _TITLE)},
    "A49_3": {("System", AIRO.isDeployedBy), ("Operator", _TITLE)},
    "A49_3_4": {("System", AIRO.isDeployedBy), ("Operator", _TITLE)},
}

NODES = {
    Target.System: Iri(E + "system"),
    Target.Model: Iri(E + "model"),
    Target.Dataset: Iri(E + "dataset"),
    Target.Operator: Iri(E + "operator"),
}


def synthesize(req_set: FieldRequirementSet) -> Graph:
    """A record carrying a well-formed value for every non-optional field."""
    triples = []
    for target, node in NODES.items():
        triples.append(Triple(node, RDF.type, target_class(target, req_set.scenario)))
    own = {target_class(t, req_set.scenario): node for t, node in NODES.items()}
    counter = 0
    for req in req_set.requirements:
        if req.necessity is Necessity.Optional:
            continue
        focus = NODES[req.applies_to]
        counter += 1
        if req.range_kind == "literal":
            value = Literal(f"value {counter}", language="en")
        elif req.range_kind == "datatype" and req.range == XSD.date:
            value = Literal("2024-01-01", XSD.date)
        elif req.range in own:
            value = own[req.range]
        else:
            value = Iri(f"{E}v{counter}")
            if req.range_kind == "class" and req.range is not None:
                triples.append(Triple(value, RDF.type, req.range))
        triples.append(Triple(focus, req.predicate, value))
    return Graph(triples)


def drop(graph: Graph, focus: Iri, predicate: Iri) -> Graph:
    return Graph(t for t in graph if not (t.subject == focus and t.predicate == predicate))
