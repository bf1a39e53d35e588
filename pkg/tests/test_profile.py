from __future__ import annotations

import json
from importlib import resources

import pytest

from aicat.graph import Graph, Iri, Triple
from aicat.profile import (
    AnnexSection,
    Clause,
    FieldRequirementSet,
    NationalRegistration,
    Necessity,
    RegistrantRole,
    RegistrationScenario,
    RiskStatus,
    Target,
    UnmappedScenario,
    View,
    Visibility,
    all_inputs,
    annex_point,
    classify_scenario,
    required_fields,
    requirement_table,
    shapes_for,
    validate_registration,
    visibility_filter,
)
from aicat.shacl import ConstraintKind, PropertyConstraint, Severity, validate
from aicat.vocab import AIRO, DCT, TECH, XSD

from profile_key import CASES, EU_ROUTES, NODES, REQUIRED, drop, synthesize

DATA_FIELDS = {AIRO.hasTrainingData, AIRO.hasValidationData, AIRO.hasTestingData}


def scenario(clause_name: str) -> RegistrationScenario:
    return classify_scenario(*EU_ROUTES[clause_name])


@pytest.mark.parametrize("point,risk,role,expected", CASES, ids=[f"{c[1].value}-{c[2].value}-{c[0]}" for c in CASES])
def test_matrix(point, risk, role, expected):
    if expected is None:
        with pytest.raises(UnmappedScenario):
            classify_scenario(point, risk, role)
        return
    got = classify_scenario(point, risk, role)
    clause, section, points, visibility = expected
    assert got.clause is Clause[clause]
    assert (got.annex_section.value if got.annex_section else None) == section
    assert got.included_points == points
    assert got.visibility is Visibility(visibility)


def test_matrix_is_total():
    assert len(CASES) == 48 == len(all_inputs())
    assert {(c[0], c[1], c[2]) for c in CASES} == set(all_inputs())
    assert sum(1 for c in CASES if c[3] is None) == 8
    hit = {classify_scenario(p, r, role).clause for p, r, role in all_inputs()
           if not (r is RiskStatus.AssessedNonHighRisk and role is RegistrantRole.PublicAuthorityDeployer)}
    assert hit == set(Clause)


def test_visibility_consistency():
    for point, risk, role in all_inputs():
        try:
            s = classify_scenario(point, risk, role)
        except UnmappedScenario:
            continue
        if risk is RiskStatus.HighRisk and point == 2:
            assert s.visibility is Visibility.NationalLevel
        elif point in (1, 6, 7):
            assert s.visibility is Visibility.NonPublicEU
        else:
            assert s.visibility is Visibility.PublicEU


@pytest.mark.parametrize("bad", [0, 9, -1])
def test_point_range(bad):
    with pytest.raises(ValueError):
        annex_point(bad)


def test_scenario_invariants():
    with pytest.raises(ValueError):
        RegistrationScenario(Clause.A49_5, AnnexSection.A, frozenset(), Visibility.NationalLevel)
    with pytest.raises(ValueError):
        RegistrationScenario(Clause.A49_1, AnnexSection.A, frozenset({13}), Visibility.PublicEU)


def test_scenario_dict_round_trip():
    for name in EU_ROUTES:
        s = scenario(name)
        assert RegistrationScenario.from_dict(json.loads(json.dumps(s.to_dict()))) == s


def test_national_has_no_requirements():
    with pytest.raises(NationalRegistration):
        required_fields(classify_scenario(2, RiskStatus.HighRisk, RegistrantRole.Provider))


class TestRequiredFields:
    def test_public_a_has_market_status(self):
        assert TECH.hasMarketAvailabilityStatus in required_fields(scenario("A49_1")).predicates()

    def test_nonpublic_a_excludes_data(self):
        preds = required_fields(scenario("A49_1_4")).predicates()
        assert AIRO.hasInput not in preds
        assert not preds & DATA_FIELDS

    def test_deployer_route(self):
        preds = required_fields(scenario("A49_3")).predicates(Target.System)
        assert AIRO.isDeployedBy in preds and AIRO.isProvidedBy not in preds

    @pytest.mark.parametrize("name", sorted(REQUIRED))
    def test_required_sets(self, name):
        got = {(r.applies_to.value, r.predicate) for r in required_fields(scenario(name)).required()}
        assert got == REQUIRED[name]

    def test_model_rows_only_on_request(self):
        without = required_fields(scenario("A49_1"))
        with_models = required_fields(scenario("A49_1"), includes_model_metadata=True)
        assert not [r for r in without.requirements if r.applies_to is Target.Model and r.necessity is not Necessity.Optional]
        assert {DCT.issued, AIRO.hasInput, AIRO.hasOutput, AIRO.hasLicense} <= with_models.predicates(Target.Model)
        assert AIRO.hasModel in with_models.predicates(Target.System)

    @pytest.mark.parametrize("public,restricted", [("A49_1", "A49_1_4"), ("A49_2", "A49_2_4"), ("A49_3", "A49_3_4")])
    def test_restricted_subset_of_public(self, public, restricted):
        assert set(required_fields(scenario(restricted)).requirements) <= set(required_fields(scenario(public)).requirements)

    def test_table_file_versioned(self):
        data = json.loads(resources.files("aicat").joinpath("data", "requirements.json").read_text(encoding="utf-8"))
        assert data["version"] and len(data["requirements"]) == len(requirement_table())


class TestShapes:
    def test_provider_shape_matches_listing1(self):
        shapes = shapes_for(required_fields(scenario("A49_1")))
        system = next(s for s in shapes.shapes if s.target_type == AIRO.AISystem)
        assert PropertyConstraint(AIRO.isProvidedBy, min_count=1, severity=Severity.Violation) in system.properties

    def test_empty_set(self):
        empty = FieldRequirementSet(scenario("A49_1"), ())
        assert len(shapes_for(empty)) == 0
        assert validate(Graph(), shapes_for(empty)).conforms

    def test_issued_datatype(self):
        shapes = shapes_for(required_fields(scenario("A49_1"), includes_model_metadata=True))
        model = next(s for s in shapes.shapes if s.target_type == AIRO.AIModel)
        issued = [c for c in model.properties if c.path == DCT.issued]
        assert issued and issued[0].datatype == XSD.date and issued[0].min_count == 1

    def test_model_missing_issued(self):
        req = required_fields(scenario("A49_1"), includes_model_metadata=True)
        record = drop(synthesize(req), NODES[Target.Model], DCT.issued)
        results = [r for r in validate_registration(record, req).results if r.path == DCT.issued]
        assert [r.constraint for r in results] == [ConstraintKind.MinCount]


@pytest.mark.parametrize("name", sorted(EU_ROUTES))
@pytest.mark.parametrize("with_models", [False, True])
def test_full_record_conforms_and_each_required_field_matters(name, with_models):
    req = required_fields(scenario(name), with_models)
    record = synthesize(req)
    report = validate_registration(record, req)
    assert report.conforms and not report.results, report.to_text()
    for field in req.required():
        broken = drop(record, NODES[field.applies_to], field.predicate)
        assert validate_registration(broken, req).violations, (name, field.annex_ref)


def test_any_of_data_group():
    req = required_fields(scenario("A49_1"))
    record = synthesize(req)
    system = NODES[Target.System]
    only_testing = Graph(t for t in record if not (t.subject == system and t.predicate in DATA_FIELDS - {AIRO.hasTestingData}))
    assert not [r for r in validate_registration(only_testing, req).results if "A6" in r.message]
    none = Graph(t for t in record if not (t.subject == system and t.predicate in DATA_FIELDS))
    composite = [r for r in validate_registration(none, req).results if "A6" in r.message]
    assert len(composite) == 1 and composite[0].severity is Severity.Warning


def test_any_of_through_model(listing2):
    req = required_fields(scenario("A49_1"))
    assert not [r for r in validate_registration(listing2, req).results if "A6" in r.message]


@pytest.mark.parametrize("name,conforms", [("A49_1", True), ("A49_1_4", True), ("A49_2", True), ("A49_3", False)])
def test_listing2_per_route(listing2, name, conforms):
    report = validate_registration(listing2, required_fields(scenario(name)))
    assert report.conforms is conforms
    if not conforms:
        assert [r.path for r in report.violations] == [AIRO.isDeployedBy]


class _Rec:
    def __init__(self, scenario):
        self.scenario = scenario


def test_visibility_filter():
    public = _Rec(scenario("A49_1"))
    hidden = _Rec(scenario("A49_1_4"))
    national = _Rec(classify_scenario(2, RiskStatus.HighRisk, RegistrantRole.Provider))
    assert visibility_filter([public, hidden], View.Public) == [public]
    assert visibility_filter([public, hidden, national], View.Full) == [public, hidden]
    assert visibility_filter([public], View.Public) == [public]
    assert visibility_filter([national], View.Full) == []
