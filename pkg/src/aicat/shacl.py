"""A small SHACL subset: class-targeted node shapes with single-predicate
property shapes.

Supported terms are ``sh:targetClass``, ``sh:property``, ``sh:path``,
``sh:minCount``, ``sh:maxCount``, ``sh:class``, ``sh:datatype``,
``sh:nodeKind`` (``sh:IRI``, ``sh:Literal``, ``sh:BlankNodeOrIRI``) and
``sh:severity`` (``sh:Violation``, ``sh:Warning``). Any other ``sh:`` term
found on a shape is reported in ``ShapeSet.ignored`` and has no effect.
``sh:class`` is checked against explicit ``rdf:type`` triples only; there is
no subclass reasoning.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from .graph import BlankNode, Graph, Iri, Literal, Term, Triple
from .vocab import RDF, SH, XSD

Node = Union[Iri, BlankNode]


class ShapeParseError(ValueError):
    """A shapes graph uses the supported subset incorrectly."""


class Severity(enum.Enum):
    Violation = "Violation"
    Warning = "Warning"

    @property
    def iri(self) -> Iri:
        return SH.term(self.value)


class NodeKind(enum.Enum):
    IriNode = "IRI"
    LiteralNode = "Literal"
    BlankOrIri = "BlankNodeOrIRI"

    @property
    def iri(self) -> Iri:
        return SH.term(self.value)

    def accepts(self, term: Term) -> bool:
        if self is NodeKind.IriNode:
            return isinstance(term, Iri)
        if self is NodeKind.LiteralNode:
            return isinstance(term, Literal)
        return isinstance(term, (Iri, BlankNode))


class ConstraintKind(enum.Enum):
    MinCount = "MinCount"
    MaxCount = "MaxCount"
    ValueType = "ValueType"
    Datatype = "Datatype"
    NodeKind = "NodeKind"

    @property
    def component(self) -> Iri:
        local = {"ValueType": "Class"}.get(self.value, self.value)
        return SH.term(f"{local}ConstraintComponent")


@dataclass(frozen=True)
class PropertyConstraint:
    """Facets on the values of one predicate.

    ``severity`` overrides the owning shape's severity when set.
    """

    path: Iri
    min_count: Optional[int] = None
    max_count: Optional[int] = None
    value_type: Optional[Iri] = None
    datatype: Optional[Iri] = None
    node_kind: Optional[NodeKind] = None
    severity: Optional[Severity] = None

    def __post_init__(self) -> None:
        for name in ("min_count", "max_count"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 0):
                raise ValueError(f"{name} must be a non-negative integer")
        if self.min_count is not None and self.max_count is not None and self.min_count > self.max_count:
            raise ValueError(f"min_count {self.min_count} exceeds max_count {self.max_count}")
        if all(
            getattr(self, f) is None
            for f in ("min_count", "max_count", "value_type", "datatype", "node_kind")
        ):
            raise ValueError(f"property constraint on {self.path.value} has no facet")


@dataclass(frozen=True)
class NodeShapeDef:
    iri: Node
    target_type: Iri
    properties: tuple[PropertyConstraint, ...] = ()
    severity: Severity = Severity.Violation


@dataclass(frozen=True)
class ShapeSet:
    shapes: tuple[NodeShapeDef, ...] = ()
    ignored: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        dupes = [iri for iri, n in Counter(s.iri for s in self.shapes).items() if n > 1]
        if dupes:
            raise ValueError(f"duplicate shape {dupes[0].n3()}")

    def __len__(self) -> int:
        return len(self.shapes)

    def __add__(self, other: "ShapeSet") -> "ShapeSet":
        return ShapeSet(self.shapes + other.shapes, self.ignored + other.ignored)


@dataclass(frozen=True)
class ValidationResult:
    focus: Node
    path: Iri
    constraint: ConstraintKind
    severity: Severity
    message: str
    shape: Node
    value: Optional[Term] = None

    def sort_key(self) -> tuple:
        return (
            self.shape.n3(),
            self.focus.n3(),
            self.path.n3(),
            self.constraint.value,
            self.value.n3() if self.value is not None else "",
            self.message,
        )

    def to_dict(self) -> dict:
        out = {
            "focus": self.focus.n3(),
            "path": self.path.value,
            "constraint": self.constraint.value,
            "severity": self.severity.value,
            "message": self.message,
            "shape": self.shape.n3(),
        }
        if self.value is not None:
            out["value"] = self.value.n3()
        return out


@dataclass(frozen=True)
class ValidationReport:
    results: tuple[ValidationResult, ...] = ()
    notices: tuple[str, ...] = field(default=())

    @property
    def conforms(self) -> bool:
        return not any(r.severity is Severity.Violation for r in self.results)

    @property
    def violations(self) -> list[ValidationResult]:
        return [r for r in self.results if r.severity is Severity.Violation]

    @property
    def warnings(self) -> list[ValidationResult]:
        return [r for r in self.results if r.severity is Severity.Warning]

    def summary(self) -> str:
        return (
            f"conforms: {'true' if self.conforms else 'false'}, "
            f"{len(self.violations)} violations, {len(self.warnings)} warnings"
        )

    def to_text(self) -> str:
        lines = [self.summary()]
        lines.extend(self.notices)
        for r in self.results:
            lines.append(f"{r.severity.value}: {r.focus.n3()} {r.path.n3()} {r.constraint.value}: {r.message}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out: dict = {"conforms": self.conforms, "results": [r.to_dict() for r in self.results]}
        if self.notices:
            out["notices"] = list(self.notices)
        return out

    def to_graph(self) -> Graph:
        """The report as an ``sh:ValidationReport`` graph."""
        report = BlankNode("report")
        triples = [
            Triple(report, RDF.type, SH.ValidationReport),
            Triple(report, SH.conforms, Literal("true" if self.conforms else "false", XSD.boolean)),
        ]
        for i, r in enumerate(self.results):
            node = BlankNode(f"r{i}")
            triples += [
                Triple(report, SH.result, node),
                Triple(node, RDF.type, SH.ValidationResult),
                Triple(node, SH.focusNode, r.focus),
                Triple(node, SH.resultPath, r.path),
                Triple(node, SH.resultSeverity, r.severity.iri),
                Triple(node, SH.sourceConstraintComponent, r.constraint.component),
                Triple(node, SH.sourceShape, r.shape),
                Triple(node, SH.resultMessage, Literal(r.message)),
            ]
            if r.value is not None:
                triples.append(Triple(node, SH.value, r.value))
        return Graph(triples, {"sh": SH.iri, "xsd": XSD.iri})

    def to_json(self) -> str:
        from .rdfio import serialize_json_flat

        return serialize_json_flat(self.to_graph())

    def merged(self, extra: list[ValidationResult]) -> "ValidationReport":
        return ValidationReport(tuple(sorted((*self.results, *extra), key=ValidationResult.sort_key)), self.notices)


# -- parsing ---------------------------------------------------------------------

_NODE_SHAPE_TERMS = {SH.targetClass, SH.property, SH.severity}
_PROPERTY_TERMS = {SH.path, SH.minCount, SH.maxCount, SH["class"], SH.datatype, SH.nodeKind, SH.severity}
_NODE_KINDS = {k.iri: k for k in NodeKind}
_SEVERITIES = {s.iri: s for s in Severity}


def _one(graph: Graph, node: Node, pred: Iri, shape: Node) -> Optional[Term]:
    values = graph.objects(node, pred)
    if len(values) > 1:
        raise ShapeParseError(f"shape {shape.n3()} has {len(values)} values for {pred.n3()}")
    return values[0] if values else None


def _count(graph: Graph, node: Node, pred: Iri, shape: Node) -> Optional[int]:
    value = _one(graph, node, pred, shape)
    if value is None:
        return None
    if not isinstance(value, Literal) or not value.lexical.lstrip("+").isdigit():
        raise ShapeParseError(f"shape {shape.n3()}: {pred.n3()} must be a non-negative integer, got {value.n3()}")
    return int(value.lexical)


def _severity(graph: Graph, node: Node, shape: Node, ignored: list[str]) -> Optional[Severity]:
    value = _one(graph, node, SH.severity, shape)
    if value is None:
        return None
    if value not in _SEVERITIES:
        ignored.append(f"{shape.n3()}: unsupported severity {value.n3()}")
        return None
    return _SEVERITIES[value]


def _ignored_terms(graph: Graph, node: Node, supported: set[Iri], shape: Node, ignored: list[str]) -> None:
    for t in graph.match(node, None, None):
        if t.predicate.value.startswith(SH.iri) and t.predicate not in supported:
            ignored.append(f"{shape.n3()}: ignored {t.predicate.n3()}")


def _iri_value(value: Optional[Term], what: str, shape: Node) -> Optional[Iri]:
    if value is None:
        return None
    if not isinstance(value, Iri):
        raise ShapeParseError(f"shape {shape.n3()}: {what} must be an IRI, got {value.n3()}")
    return value


def _property(graph: Graph, node: Node, shape: Node, ignored: list[str]) -> Optional[PropertyConstraint]:
    path = _one(graph, node, SH.path, shape)
    if path is None:
        raise ShapeParseError(f"property shape {node.n3()} of {shape.n3()} has no sh:path")
    if not isinstance(path, Iri):
        ignored.append(f"{shape.n3()}: complex property path {path.n3()} not supported")
        return None
    _ignored_terms(graph, node, _PROPERTY_TERMS, shape, ignored)
    kind_term = _one(graph, node, SH.nodeKind, shape)
    node_kind = None
    if kind_term is not None:
        node_kind = _NODE_KINDS.get(kind_term)
        if node_kind is None:
            ignored.append(f"{shape.n3()}: unsupported sh:nodeKind {kind_term.n3()}")
    try:
        return PropertyConstraint(
            path=path,
            min_count=_count(graph, node, SH.minCount, shape),
            max_count=_count(graph, node, SH.maxCount, shape),
            value_type=_iri_value(_one(graph, node, SH["class"], shape), "sh:class", shape),
            datatype=_iri_value(_one(graph, node, SH.datatype, shape), "sh:datatype", shape),
            node_kind=node_kind,
            severity=_severity(graph, node, shape, ignored),
        )
    except ValueError as exc:
        if "no facet" in str(exc):
            ignored.append(f"{shape.n3()}: property shape on {path.n3()} has no supported constraint")
            return None
        raise ShapeParseError(f"shape {shape.n3()}: {exc}") from None


def parse_shapes(shapes_graph: Graph) -> ShapeSet:
    """Read every class-targeted ``sh:NodeShape`` of ``shapes_graph``."""
    shapes = []
    ignored: list[str] = []
    for shape in shapes_graph.subjects(RDF.type, SH.NodeShape):
        targets = sorted(
            (o for o in shapes_graph.objects(shape, SH.targetClass) if isinstance(o, Iri)),
            key=lambda i: i.value,
        )
        if not targets:
            ignored.append(f"{shape.n3()}: node shape without sh:targetClass is not supported")
            continue
        if len(targets) > 1:
            ignored.append(f"{shape.n3()}: only the first of {len(targets)} target classes is used")
        _ignored_terms(shapes_graph, shape, _NODE_SHAPE_TERMS, shape, ignored)
        props = []
        for node in shapes_graph.objects(shape, SH.property):
            if isinstance(node, Literal):
                raise ShapeParseError(f"shape {shape.n3()}: sh:property value must be a node")
            constraint = _property(shapes_graph, node, shape, ignored)
            if constraint is not None:
                props.append(constraint)
        shapes.append(
            NodeShapeDef(
                iri=shape,
                target_type=targets[0],
                properties=tuple(props),
                severity=_severity(shapes_graph, shape, shape, ignored) or Severity.Violation,
            )
        )
    return ShapeSet(tuple(shapes), tuple(ignored))


def shapes_to_graph(shapes: ShapeSet) -> Graph:
    """Write a ShapeSet back as a SHACL graph."""
    triples: list[Triple] = []
    counter = 0
    for shape in shapes.shapes:
        triples.append(Triple(shape.iri, RDF.type, SH.NodeShape))
        triples.append(Triple(shape.iri, SH.targetClass, shape.target_type))
        if shape.severity is not Severity.Violation:
            triples.append(Triple(shape.iri, SH.severity, shape.severity.iri))
        for prop in shape.properties:
            node = BlankNode(f"p{counter}")
            counter += 1
            triples += [
                Triple(shape.iri, SH.property, node),
                Triple(node, RDF.type, SH.PropertyShape),
                Triple(node, SH.path, prop.path),
            ]
            if prop.min_count is not None:
                triples.append(Triple(node, SH.minCount, Literal(str(prop.min_count), XSD.integer)))
            if prop.max_count is not None:
                triples.append(Triple(node, SH.maxCount, Literal(str(prop.max_count), XSD.integer)))
            if prop.value_type is not None:
                triples.append(Triple(node, SH["class"], prop.value_type))
            if prop.datatype is not None:
                triples.append(Triple(node, SH.datatype, prop.datatype))
            if prop.node_kind is not None:
                triples.append(Triple(node, SH.nodeKind, prop.node_kind.iri))
            if prop.severity is not None:
                triples.append(Triple(node, SH.severity, prop.severity.iri))
    return Graph(triples, {"sh": SH.iri, "xsd": XSD.iri})


# -- validation ------------------------------------------------------------------


def _check(data: Graph, shape: NodeShapeDef, focus: Node, prop: PropertyConstraint) -> list[ValidationResult]:
    severity = prop.severity or shape.severity
    values = data.objects(focus, prop.path)
    path = prop.path.n3()

    def result(kind: ConstraintKind, message: str, value: Optional[Term] = None) -> ValidationResult:
        return ValidationResult(focus, prop.path, kind, severity, message, shape.iri, value)

    out = []
    if prop.min_count is not None and len(values) < prop.min_count:
        out.append(result(ConstraintKind.MinCount, f"expected at least {prop.min_count} value(s) for {path}, found {len(values)}"))
    if prop.max_count is not None and len(values) > prop.max_count:
        out.append(result(ConstraintKind.MaxCount, f"expected at most {prop.max_count} value(s) for {path}, found {len(values)}"))
    for v in values:
        if prop.value_type is not None:
            if isinstance(v, Literal) or prop.value_type not in data.types(v):
                out.append(result(ConstraintKind.ValueType, f"value {v.n3()} of {path} is not typed {prop.value_type.n3()}", v))
        if prop.datatype is not None:
            if not isinstance(v, Literal) or v.datatype != prop.datatype:
                out.append(result(ConstraintKind.Datatype, f"value {v.n3()} of {path} does not have datatype {prop.datatype.n3()}", v))
        if prop.node_kind is not None and not prop.node_kind.accepts(v):
            out.append(result(ConstraintKind.NodeKind, f"value {v.n3()} of {path} is not of node kind sh:{prop.node_kind.value}", v))
    return out


def validate(data: Graph, shapes: ShapeSet) -> ValidationReport:
    """Check every focus node of every shape; results come out sorted."""
    results: list[ValidationResult] = []
    for shape in shapes.shapes:
        for focus in data.subjects(RDF.type, shape.target_type):
            for prop in shape.properties:
                results.extend(_check(data, shape, focus, prop))
    results.sort(key=ValidationResult.sort_key)
    return ValidationReport(tuple(results))


def report_json(report: ValidationReport) -> str:
    """Plain JSON (not the flat graph form) for API responses."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)
