"""EU AI Act registration rules.

Maps an Annex III area, the provider's risk assessment and the registrant's
role to the Article 49 registration route, lists the information the route
requires (from the requirement table in ``data/requirements.json``), turns
those requirements into shapes, and filters records by database section.

Necessity levels are a policy choice kept in the data file, not in code:
operator identity, trade name and intended purpose are Required, the rest
Recommended or Optional.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, TypeVar

from .graph import Graph, Iri
from .shacl import (
    ConstraintKind,
    NodeKind,
    NodeShapeDef,
    PropertyConstraint,
    Severity,
    ShapeSet,
    ValidationReport,
    ValidationResult,
    validate,
)
from .vocab import AIRO, DEFAULT_PREFIXES, REGISTRY, RDF, expand_curie


class ScenarioError(ValueError):
    pass


class UnmappedScenario(ScenarioError):
    """The inputs match no row of the Article 49 registration table."""


class NationalRegistration(ScenarioError):
    """The system registers at national level; no EU database entry exists."""


class RiskStatus(enum.Enum):
    HighRisk = "HighRisk"
    AssessedNonHighRisk = "AssessedNonHighRisk"


class RegistrantRole(enum.Enum):
    Provider = "Provider"
    AuthorisedRepresentative = "AuthorisedRepresentative"
    PublicAuthorityDeployer = "PublicAuthorityDeployer"


class Clause(enum.Enum):
    A49_1 = "49(1)"
    A49_1_4 = "49(1)&(4)"
    A49_2 = "49(2)"
    A49_2_4 = "49(2)&(4)"
    A49_3 = "49(3)"
    A49_3_4 = "49(3)&(4)"
    A49_5 = "49(5)"


class AnnexSection(enum.Enum):
    A = "A"
    B = "B"
    C = "C"


class Visibility(enum.Enum):
    PublicEU = "PublicEU"
    NonPublicEU = "NonPublicEU"
    NationalLevel = "NationalLevel"


class View(enum.Enum):
    Public = "Public"
    Full = "Full"


class Target(enum.Enum):
    System = "System"
    Model = "Model"
    Dataset = "Dataset"
    Operator = "Operator"


class Necessity(enum.Enum):
    Required = "Required"
    Recommended = "Recommended"
    Optional = "Optional"


E = TypeVar("E", bound=enum.Enum)

RISK_TOKENS = {"high": RiskStatus.HighRisk, "assessed-non-high": RiskStatus.AssessedNonHighRisk}
ROLE_TOKENS = {
    "provider": RegistrantRole.Provider,
    "authrep": RegistrantRole.AuthorisedRepresentative,
    "deployer": RegistrantRole.PublicAuthorityDeployer,
}


def parse_token(cls: type[E], text: str, tokens: Optional[dict[str, E]] = None) -> E:
    """Accept a CLI token (``high``, ``deployer``) or an enum name."""
    if isinstance(text, cls):
        return text
    if tokens and text.lower() in tokens:
        return tokens[text.lower()]
    for member in cls:
        if member.name.lower() == str(text).lower() or str(member.value).lower() == str(text).lower():
            return member
    choices = ", ".join([*(tokens or {}), *(m.name for m in cls)])
    raise ValueError(f"unknown {cls.__name__} {text!r}; expected one of {choices}")


def annex_point(point: int) -> int:
    if isinstance(point, bool) or not isinstance(point, int) or not 1 <= point <= 8:
        raise ValueError(f"Annex III point must be an integer in 1..8, got {point!r}")
    return point


@dataclass(frozen=True)
class RegistrationScenario:
    clause: Clause
    annex_section: Optional[AnnexSection]
    included_points: frozenset[int]
    visibility: Visibility

    def __post_init__(self) -> None:
        if self.clause is Clause.A49_5 and (
            self.annex_section is not None or self.visibility is not Visibility.NationalLevel
        ):
            raise ValueError("a 49(5) scenario has no annex section and national visibility")
        if not self.included_points <= frozenset(range(1, 13)):
            raise ValueError("included points must lie in 1..12")

    def to_dict(self) -> dict:
        return {
            "clause": self.clause.name,
            "annexSection": self.annex_section.value if self.annex_section else None,
            "includedPoints": sorted(self.included_points),
            "visibility": self.visibility.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegistrationScenario":
        section = data.get("annexSection")
        return cls(
            clause=Clause[data["clause"]],
            annex_section=AnnexSection(section) if section else None,
            included_points=frozenset(data["includedPoints"]),
            visibility=Visibility(data["visibility"]),
        )


@lru_cache(maxsize=1)
def _table() -> dict:
    text = resources.files("aicat").joinpath("data", "requirements.json").read_text(encoding="utf-8")
    return json.loads(text)


def requirement_table_version() -> str:
    return _table()["version"]


def section_points(section: AnnexSection) -> frozenset[int]:
    return frozenset(_table()["sections"][section.value])


_PUBLIC_AREAS = frozenset({3, 4, 5, 8})
_RESTRICTED_AREAS = frozenset({1, 6, 7})


def classify_scenario(point: int, risk: RiskStatus, role: RegistrantRole) -> RegistrationScenario:
    """The Article 49 route for an Annex III area, risk status and registrant.

    Raises UnmappedScenario when no route exists (a public-authority
    deployer registering a system its provider assessed as not high-risk).
    """
    point = annex_point(point)
    deployer = role is RegistrantRole.PublicAuthorityDeployer
    if risk is RiskStatus.HighRisk:
        if point == 2:
            return RegistrationScenario(Clause.A49_5, None, frozenset(), Visibility.NationalLevel)
        section = AnnexSection.C if deployer else AnnexSection.A
        if point in _PUBLIC_AREAS:
            clause = Clause.A49_3 if deployer else Clause.A49_1
            return RegistrationScenario(clause, section, section_points(section), Visibility.PublicEU)
        if deployer:
            return RegistrationScenario(Clause.A49_3_4, section, frozenset({1, 2, 3}), Visibility.NonPublicEU)
        points = frozenset(range(1, 11)) - {6, 8, 9}
        return RegistrationScenario(Clause.A49_1_4, section, points, Visibility.NonPublicEU)
    if deployer:
        raise UnmappedScenario(
            f"no registration route for a deployer of an Annex III point {point} system assessed as not high-risk"
        )
    section = AnnexSection.B
    if point in _PUBLIC_AREAS | {2}:
        return RegistrationScenario(Clause.A49_2, section, section_points(section), Visibility.PublicEU)
    points = frozenset(range(1, 6)) | {8, 9}
    return RegistrationScenario(Clause.A49_2_4, section, points, Visibility.NonPublicEU)


@dataclass(frozen=True)
class FieldRequirement:
    annex_ref: str
    predicate: Iri
    applies_to: Target
    necessity: Necessity
    range: Optional[Iri] = None
    range_kind: Optional[str] = None  # "class", "datatype" or "literal"
    group: Optional[str] = None
    requirement: str = ""

    @property
    def annex(self) -> str:
        return self.annex_ref.split("-", 1)[0]

    @property
    def section(self) -> Optional[AnnexSection]:
        annex, clause = self.annex_ref.split("-", 1)
        if annex != "VIII" or not clause[:1] in ("A", "B", "C"):
            return None
        return AnnexSection(clause[0])

    @property
    def point(self) -> Optional[int]:
        if self.section is None:
            return None
        return int(self.annex_ref.split("-", 1)[1][1:])

    @property
    def model_metadata(self) -> bool:
        return self.section is None


@lru_cache(maxsize=1)
def requirement_table() -> tuple[FieldRequirement, ...]:
    rows = []
    for row in _table()["requirements"]:
        predicate = expand_curie(DEFAULT_PREFIXES, row["predicate"])
        if predicate not in REGISTRY:
            raise ValueError(f"requirement predicate {row['predicate']} is not a profile term")
        rows.append(
            FieldRequirement(
                annex_ref=row["annexRef"],
                predicate=predicate,
                applies_to=Target(row["appliesTo"]),
                necessity=Necessity(row["necessity"]),
                range=expand_curie(DEFAULT_PREFIXES, row["range"]) if row.get("range") else None,
                range_kind=row.get("rangeKind"),
                group=row.get("group"),
                requirement=row.get("requirement", ""),
            )
        )
    return tuple(rows)


@dataclass(frozen=True)
class FieldRequirementSet:
    scenario: RegistrationScenario
    requirements: tuple[FieldRequirement, ...]

    def required(self) -> list[FieldRequirement]:
        return [r for r in self.requirements if r.necessity is Necessity.Required]

    def predicates(self, target: Optional[Target] = None) -> set[Iri]:
        return {r.predicate for r in self.requirements if target is None or r.applies_to is target}


def required_fields(scenario: RegistrationScenario, includes_model_metadata: bool = False) -> FieldRequirementSet:
    """Requirements for a registration route.

    Annex VIII rows are kept when their section and point are part of the
    route; Annex XII rows (and the system's model links) only when the
    registrant also describes models.
    """
    if scenario.clause is Clause.A49_5:
        raise NationalRegistration("Article 49(5) systems register at national level; no EU requirements apply")
    rows = []
    for req in requirement_table():
        if req.model_metadata:
            if includes_model_metadata:
                rows.append(req)
        elif req.section is scenario.annex_section and req.point in scenario.included_points:
            rows.append(req)
    return FieldRequirementSet(scenario, tuple(rows))


SHAPE_NS = "urn:aicat:shape:"

_TARGET_CLASSES = {
    Target.System: AIRO.AISystem,
    Target.Model: AIRO.AIModel,
    Target.Dataset: AIRO.Data,
}


def target_class(target: Target, scenario: RegistrationScenario) -> Iri:
    if target is Target.Operator:
        return AIRO.AIDeployer if scenario.annex_section is AnnexSection.C else AIRO.AIProvider
    return _TARGET_CLASSES[target]


def _shape_iri(cls: Iri) -> Iri:
    return Iri(SHAPE_NS + cls.value.rsplit("#", 1)[-1].rsplit("/", 1)[-1])


def _constraint_key(c: PropertyConstraint) -> tuple:
    return (
        c.path.value,
        c.min_count is None,
        (c.value_type.value if c.value_type else ""),
        (c.severity.value if c.severity else ""),
        repr(c),
    )


def shapes_for(req_set: FieldRequirementSet) -> ShapeSet:
    """One node shape per target class.

    Required fields become ``minCount 1`` Violations, Recommended fields
    ``minCount 1`` Warnings. Members of an any-of group are Warnings each;
    the group itself is checked by ``check_any_of``. Class ranges become
    Warning-level ``sh:class`` checks, literal ranges node-kind checks and
    ``xsd:date`` ranges datatype checks.
    """
    by_target: dict[Iri, dict[PropertyConstraint, None]] = {}
    for req in req_set.requirements:
        if req.necessity is Necessity.Optional:
            continue
        cls = target_class(req.applies_to, req_set.scenario)
        constraints = by_target.setdefault(cls, {})
        severity = Severity.Violation if req.necessity is Necessity.Required and not req.group else Severity.Warning
        constraints[
            PropertyConstraint(
                path=req.predicate,
                min_count=1,
                node_kind=NodeKind.LiteralNode if req.range_kind == "literal" else None,
                datatype=req.range if req.range_kind == "datatype" else None,
                severity=severity,
            )
        ] = None
        if req.range_kind == "class" and req.range is not None:
            constraints[PropertyConstraint(path=req.predicate, value_type=req.range, severity=Severity.Warning)] = None
    shapes = []
    for cls in sorted(by_target, key=lambda i: i.value):
        props = tuple(sorted(by_target[cls], key=_constraint_key))
        shapes.append(NodeShapeDef(iri=_shape_iri(cls), target_type=cls, properties=props))
    return ShapeSet(tuple(shapes))


def any_of_groups(req_set: FieldRequirementSet) -> dict[str, list[FieldRequirement]]:
    groups: dict[str, list[FieldRequirement]] = {}
    for req in req_set.requirements:
        if req.group and req.necessity is not Necessity.Optional:
            groups.setdefault(req.group, []).append(req)
    return groups


def check_any_of(graph: Graph, req_set: FieldRequirementSet) -> list[ValidationResult]:
    """One result per focus node that has none of a group's predicates.

    A system also satisfies a data group through the models it links with
    ``airo:hasModel``.
    """
    results = []
    for group, members in sorted(any_of_groups(req_set).items()):
        target = members[0].applies_to
        cls = target_class(target, req_set.scenario)
        preds = [m.predicate for m in members]
        required = any(m.necessity is Necessity.Required for m in members)
        severity = Severity.Violation if required else Severity.Warning
        for focus in graph.subjects(RDF.type, cls):
            nodes = [focus]
            if target is Target.System:
                nodes += [m for m in graph.objects(focus, AIRO.hasModel) if isinstance(m, Iri)]
            if any(graph.objects(n, p) for n in nodes for p in preds):
                continue
            names = " | ".join(p.n3() for p in preds)
            results.append(
                ValidationResult(
                    focus=focus,
                    path=preds[0],
                    constraint=ConstraintKind.MinCount,
                    severity=severity,
                    message=f"{group}: expected at least one of {names}",
                    shape=_shape_iri(cls),
                )
            )
    return results


def validate_registration(graph: Graph, req_set: FieldRequirementSet) -> ValidationReport:
    """Shape validation plus the any-of checks for one requirement set."""
    return validate(graph, shapes_for(req_set)).merged(check_any_of(graph, req_set))


def visibility_filter(records: Iterable, view: View) -> list:
    """Records visible in an EU database view.

    The public view shows public-section records only; the full view adds
    the non-public section. National registrations never appear.
    """
    allowed = {Visibility.PublicEU} if view is View.Public else {Visibility.PublicEU, Visibility.NonPublicEU}
    return [r for r in records if r.scenario.visibility in allowed]


def all_inputs() -> Sequence[tuple[int, RiskStatus, RegistrantRole]]:
    return [(p, r, role) for p in range(1, 9) for r in RiskStatus for role in RegistrantRole]
