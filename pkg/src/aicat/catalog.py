"""Typed AICat catalogues: build graphs from descriptors, read descriptors
back, and answer the profile's competency questions.

Operator nodes (providers and deployers) carry their name as ``dct:title``,
their postal address as ``dct:description`` and their contact details as
``dcat:contactPoint``; only ``OperatorDescriptor`` knows about that choice.
Use policies are opaque: a resource points at one with ``odrl:hasPolicy``
and the policy node is at most typed.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Union

from .graph import BlankNode, Graph, Iri, Literal, Term, Triple
from .vocab import AICAT, AIRO, AIUP, DCAT, DCT, DEFAULT_PREFIXES, DPV, ODRL, RDF, TECH, XSD


class CatalogError(ValueError):
    """Descriptors cannot be turned into a catalogue graph."""


class ExtractionError(ValueError):
    """A graph node cannot be read as a profile descriptor."""


class ResourceKind(enum.Enum):
    System = "System"
    Model = "Model"
    Dataset = "Dataset"


class OperatorRole(enum.Enum):
    Provider = "Provider"
    Deployer = "Deployer"


class CompetencyQuestionId(enum.Enum):
    CQ1_1 = "CQ1-1"  # name of the system
    CQ1_2 = "CQ1-2"  # provider
    CQ1_3 = "CQ1-3"  # deployer
    CQ1_4 = "CQ1-4"  # intended purpose
    CQ1_5 = "CQ1-5"  # market availability status
    CQ1_6 = "CQ1-6"  # countries where available
    CQ1_7 = "CQ1-7"  # additional references
    CQ2_1 = "CQ2-1"  # datasets used by the system
    CQ2_2 = "CQ2-2"  # system input data
    CQ2_3 = "CQ2-3"  # dataset use policy
    CQ3_1 = "CQ3-1"  # models used by the system
    CQ3_2 = "CQ3-2"  # model release date
    CQ3_3 = "CQ3-3"  # model input data
    CQ3_4 = "CQ3-4"  # model output data
    CQ3_5 = "CQ3-5"  # model license
    CQ3_6 = "CQ3-6"  # model use policy

    @classmethod
    def parse(cls, text: str) -> "CompetencyQuestionId":
        try:
            return cls(text.upper())
        except ValueError:
            raise ValueError(f"unknown competency question {text!r}") from None


LangString = Literal
IriLike = Union[Iri, str]

DATA_PREDICATES = (AIRO.hasTrainingData, AIRO.hasValidationData, AIRO.hasTestingData)

CQ_PREDICATES: dict[CompetencyQuestionId, tuple[Iri, ...]] = {
    CompetencyQuestionId.CQ1_1: (DCT.title,),
    CompetencyQuestionId.CQ1_2: (AIRO.isProvidedBy,),
    CompetencyQuestionId.CQ1_3: (AIRO.isDeployedBy,),
    CompetencyQuestionId.CQ1_4: (ODRL.hasPolicy,),
    CompetencyQuestionId.CQ1_5: (TECH.hasMarketAvailabilityStatus,),
    CompetencyQuestionId.CQ1_6: (DPV.hasCountry,),
    CompetencyQuestionId.CQ1_7: (DCT.isReferencedBy,),
    CompetencyQuestionId.CQ2_1: DATA_PREDICATES,
    CompetencyQuestionId.CQ2_2: (AIRO.hasInput,),
    CompetencyQuestionId.CQ2_3: (ODRL.hasPolicy,),
    CompetencyQuestionId.CQ3_1: (AIRO.hasModel,),
    CompetencyQuestionId.CQ3_2: (DCT.issued,),
    CompetencyQuestionId.CQ3_3: (AIRO.hasInput,),
    CompetencyQuestionId.CQ3_4: (AIRO.hasOutput,),
    CompetencyQuestionId.CQ3_5: (AIRO.hasLicense,),
    CompetencyQuestionId.CQ3_6: (ODRL.hasPolicy,),
}

LINK_PREDICATES: dict[ResourceKind, Iri] = {
    ResourceKind.System: AICAT.system,
    ResourceKind.Model: AICAT.model,
    ResourceKind.Dataset: DCAT.dataset,
}

CATALOG_TYPES = (AICAT.Catalog, DCAT.Catalog)
SYSTEM_TYPES = (AIRO.AISystem, DCAT.Resource)
MODEL_TYPES = (AIRO.AIModel, DCAT.Resource)
DATASET_TYPES = (AIRO.Data, DCAT.Dataset)
OPERATOR_TYPES = {OperatorRole.Provider: AIRO.AIProvider, OperatorRole.Deployer: AIRO.AIDeployer}


def _iri(value: IriLike) -> Iri:
    return value if isinstance(value, Iri) else Iri(value)


def _text(value: Union[Literal, str, None]) -> Optional[Literal]:
    if value is None or isinstance(value, Literal):
        return value
    return Literal(value)


def en(text: str) -> Literal:
    return Literal(text, language="en")


@dataclass
class CatalogDescriptor:
    iri: Iri
    identifier: Optional[str] = None
    title: Optional[LangString] = None
    description: Optional[LangString] = None
    created: Optional[date] = None
    systems: list[Iri] = field(default_factory=list)
    models: list[Iri] = field(default_factory=list)
    datasets: list[Iri] = field(default_factory=list)


@dataclass
class AISystemDescriptor:
    iri: Iri
    title: Optional[LangString] = None
    provider: Optional[Iri] = None
    deployer: Optional[Iri] = None
    use_policy: Optional[Iri] = None
    market_status: Optional[Iri] = None
    countries: list[Iri] = field(default_factory=list)
    references: list[Iri] = field(default_factory=list)
    identifier: Optional[str] = None
    description: Optional[LangString] = None
    contact_point: Optional[Iri] = None
    models: list[Iri] = field(default_factory=list)
    input_data: list[Iri] = field(default_factory=list)
    training_data: list[Iri] = field(default_factory=list)
    validation_data: list[Iri] = field(default_factory=list)
    testing_data: list[Iri] = field(default_factory=list)


@dataclass
class AIModelDescriptor:
    iri: Iri
    title: Optional[LangString] = None
    identifier: Optional[str] = None
    description: Optional[LangString] = None
    issued: Optional[date] = None
    training_data: list[Iri] = field(default_factory=list)
    validation_data: list[Iri] = field(default_factory=list)
    testing_data: list[Iri] = field(default_factory=list)
    input_data: list[Iri] = field(default_factory=list)
    output_data: list[Iri] = field(default_factory=list)
    license: Optional[Iri] = None
    use_policy: Optional[Iri] = None


@dataclass
class DatasetDescriptor:
    iri: Iri
    title: Optional[LangString] = None
    identifier: Optional[str] = None
    description: Optional[LangString] = None
    use_policy: Optional[Iri] = None


@dataclass
class OperatorDescriptor:
    iri: Iri
    role: OperatorRole = OperatorRole.Provider
    name: Optional[LangString] = None
    address: Optional[LangString] = None
    contact: Optional[Iri] = None


Descriptor = Union[CatalogDescriptor, AISystemDescriptor, AIModelDescriptor, DatasetDescriptor, OperatorDescriptor]

# (descriptor attribute, predicate, value kind) for each descriptor type
_FIELDS: dict[type, tuple[tuple[str, Iri, str], ...]] = {
    CatalogDescriptor: (
        ("identifier", DCT.identifier, "string"),
        ("title", DCT.title, "text"),
        ("description", DCT.description, "text"),
        ("created", DCT.created, "date"),
        ("systems", AICAT.system, "iris"),
        ("models", AICAT.model, "iris"),
        ("datasets", DCAT.dataset, "iris"),
    ),
    AISystemDescriptor: (
        ("title", DCT.title, "text"),
        ("provider", AIRO.isProvidedBy, "iri"),
        ("deployer", AIRO.isDeployedBy, "iri"),
        ("use_policy", ODRL.hasPolicy, "iri"),
        ("market_status", TECH.hasMarketAvailabilityStatus, "iri"),
        ("countries", DPV.hasCountry, "iris"),
        ("references", DCT.isReferencedBy, "iris"),
        ("identifier", DCT.identifier, "string"),
        ("description", DCT.description, "text"),
        ("contact_point", DCAT.contactPoint, "iri"),
        ("models", AIRO.hasModel, "iris"),
        ("input_data", AIRO.hasInput, "iris"),
        ("training_data", AIRO.hasTrainingData, "iris"),
        ("validation_data", AIRO.hasValidationData, "iris"),
        ("testing_data", AIRO.hasTestingData, "iris"),
    ),
    AIModelDescriptor: (
        ("title", DCT.title, "text"),
        ("identifier", DCT.identifier, "string"),
        ("description", DCT.description, "text"),
        ("issued", DCT.issued, "date"),
        ("training_data", AIRO.hasTrainingData, "iris"),
        ("validation_data", AIRO.hasValidationData, "iris"),
        ("testing_data", AIRO.hasTestingData, "iris"),
        ("input_data", AIRO.hasInput, "iris"),
        ("output_data", AIRO.hasOutput, "iris"),
        ("license", AIRO.hasLicense, "iri"),
        ("use_policy", ODRL.hasPolicy, "iri"),
    ),
    DatasetDescriptor: (
        ("title", DCT.title, "text"),
        ("identifier", DCT.identifier, "string"),
        ("description", DCT.description, "text"),
        ("use_policy", ODRL.hasPolicy, "iri"),
    ),
    OperatorDescriptor: (
        ("name", DCT.title, "text"),
        ("address", DCT.description, "text"),
        ("contact", DCAT.contactPoint, "iri"),
    ),
}

# Every predicate the descriptors read or write.
MODEL_PREDICATES: frozenset[Iri] = frozenset(
    pred for fields in _FIELDS.values() for _, pred, _ in fields
) | frozenset(p for preds in CQ_PREDICATES.values() for p in preds) | {RDF.type}


def _types_for(desc: Descriptor) -> tuple[Iri, ...]:
    if isinstance(desc, CatalogDescriptor):
        return CATALOG_TYPES
    if isinstance(desc, AISystemDescriptor):
        return SYSTEM_TYPES
    if isinstance(desc, AIModelDescriptor):
        return MODEL_TYPES
    if isinstance(desc, DatasetDescriptor):
        return DATASET_TYPES
    return (OPERATOR_TYPES[desc.role],)


def _value_terms(value, kind: str) -> list[Term]:
    if value is None:
        return []
    if kind == "iris":
        return [_iri(v) for v in value]
    if kind == "iri":
        return [_iri(value)]
    if kind == "date":
        return [Literal(value.isoformat(), XSD.date)]
    if kind == "string":
        return [Literal(str(value))]
    return [_text(value)]


def descriptor_triples(desc: Descriptor, policy_type: Optional[Iri] = AIUP.UseOffer) -> list[Triple]:
    """Triples implied by one descriptor's populated fields."""
    subject = _iri(desc.iri)
    out = [Triple(subject, RDF.type, t) for t in _types_for(desc)]
    for attr, pred, kind in _FIELDS[type(desc)]:
        for term in _value_terms(getattr(desc, attr), kind):
            out.append(Triple(subject, pred, term))
            if pred == ODRL.hasPolicy and policy_type is not None:
                out.append(Triple(term, RDF.type, policy_type))
    return out


def build_catalog(
    desc: CatalogDescriptor,
    systems: Sequence[AISystemDescriptor] = (),
    models: Sequence[AIModelDescriptor] = (),
    datasets: Sequence[DatasetDescriptor] = (),
    operators: Sequence[OperatorDescriptor] = (),
    *,
    policy_type: Optional[Iri] = AIUP.UseOffer,
    prefixes: Optional[Mapping[str, str]] = None,
) -> Graph:
    """Catalogue graph for the given descriptors.

    Every policy IRI is typed with ``policy_type`` unless it is None.
    Raises CatalogError when two descriptors share an IRI.
    """
    seen: dict[Iri, str] = {}
    all_desc: list[Descriptor] = [desc, *systems, *models, *datasets, *operators]
    for d in all_desc:
        iri = _iri(d.iri)
        if iri in seen:
            raise CatalogError(f"{iri.value} is described twice ({seen[iri]} and {type(d).__name__})")
        seen[iri] = type(d).__name__
    triples: list[Triple] = []
    for d in all_desc:
        triples.extend(descriptor_triples(d, policy_type))
    return Graph(triples, DEFAULT_PREFIXES if prefixes is None else prefixes)


def _kind_of(types: set[Iri]) -> list[type]:
    kinds = []
    if types & set(CATALOG_TYPES):
        kinds.append(CatalogDescriptor)
    if AIRO.AISystem in types:
        kinds.append(AISystemDescriptor)
    if AIRO.AIModel in types:
        kinds.append(AIModelDescriptor)
    if types & set(DATASET_TYPES):
        kinds.append(DatasetDescriptor)
    if types & set(OPERATOR_TYPES.values()):
        kinds.append(OperatorDescriptor)
    return kinds


def _sorted_terms(terms: Iterable[Term]) -> list[Term]:
    return sorted(set(terms), key=lambda t: t.n3())


def extract_view(graph: Graph, iri: IriLike) -> Descriptor:
    """Read the node ``iri`` back into the descriptor matching its type."""
    subject = _iri(iri)
    types = graph.types(subject)
    kinds = _kind_of(types)
    if not kinds:
        raise ExtractionError(f"{subject.value} is not typed as a catalogue, system, model, dataset or operator")
    if len(kinds) > 1:
        names = ", ".join(k.__name__ for k in kinds)
        raise ExtractionError(f"{subject.value} is ambiguously typed: {names}")
    cls = kinds[0]
    values: dict[str, object] = {}
    for attr, pred, kind in _FIELDS[cls]:
        objs = _sorted_terms(graph.objects(subject, pred))
        if kind == "iris":
            bad = [o for o in objs if not isinstance(o, Iri)]
            if bad:
                raise ExtractionError(f"{attr} of {subject.value} must be IRIs, found {bad[0].n3()}")
            values[attr] = objs
            continue
        if not objs:
            continue
        if len(objs) > 1:
            raise ExtractionError(f"{attr} of {subject.value} has {len(objs)} values; expected one")
        obj = objs[0]
        if kind == "iri":
            if not isinstance(obj, Iri):
                raise ExtractionError(f"{attr} of {subject.value} must be an IRI, found {obj.n3()}")
            values[attr] = obj
        elif not isinstance(obj, Literal):
            raise ExtractionError(f"{attr} of {subject.value} must be a literal, found {obj.n3()}")
        elif kind == "date":
            try:
                values[attr] = date.fromisoformat(obj.lexical)
            except ValueError:
                raise ExtractionError(f"{attr} of {subject.value} is not a date: {obj.n3()}") from None
        elif kind == "string":
            values[attr] = obj.lexical
        else:
            values[attr] = obj
    if cls is OperatorDescriptor:
        values["role"] = (
            OperatorRole.Provider if AIRO.AIProvider in types else OperatorRole.Deployer
        )
        if AIRO.AIProvider in types and AIRO.AIDeployer in types:
            raise ExtractionError(f"{subject.value} is typed both airo:AIProvider and airo:AIDeployer")
    return cls(iri=subject, **values)


def answer_cq(graph: Graph, cq: CompetencyQuestionId, subject: IriLike) -> list[Term]:
    """Answers to one competency question about ``subject``, sorted.

    CQ2-1 also follows ``airo:hasModel`` one hop, since training data is
    usually attached to the model rather than to the system. Missing data
    gives an empty list.
    """
    try:
        node = _iri(subject) if not isinstance(subject, BlankNode) else subject
    except ValueError:
        return []
    predicates = CQ_PREDICATES[cq]
    found: list[Term] = []
    for p in predicates:
        found.extend(graph.objects(node, p))
    if cq is CompetencyQuestionId.CQ2_1:
        for model in graph.objects(node, AIRO.hasModel):
            if isinstance(model, Literal):
                continue
            for p in predicates:
                found.extend(graph.objects(model, p))
    return _sorted_terms(found)


def list_resources(graph: Graph, kind: ResourceKind) -> list[Iri]:
    """Resources of ``kind`` linked from any catalogue node."""
    link = LINK_PREDICATES[kind]
    catalogues = {s for t in CATALOG_TYPES for s in graph.subjects(RDF.type, t)}
    found = {
        t.object
        for t in graph.match(None, link, None)
        if t.subject in catalogues and isinstance(t.object, Iri)
    }
    return sorted(found, key=lambda i: i.value)


def typed_resources(graph: Graph, kind: ResourceKind) -> list[Iri]:
    """Resources of ``kind`` identified by their rdf:type alone."""
    types = {
        ResourceKind.System: (AIRO.AISystem,),
        ResourceKind.Model: (AIRO.AIModel,),
        ResourceKind.Dataset: DATASET_TYPES,
    }[kind]
    found = {s for t in types for s in graph.subjects(RDF.type, t) if isinstance(s, Iri)}
    return sorted(found, key=lambda i: i.value)
