from __future__ import annotations

from pathlib import Path

import pytest

from aicat.fixtures import EXAMPLE_NS, catalogue_graph, catalogue_text, self_contained, shape_graph, shape_text
from aicat.graph import Iri

FIXTURES = Path(__file__).parent / "fixtures"

PROCTIFY = Iri(EXAMPLE_NS + "proctify")
MODEL = Iri(EXAMPLE_NS + "susbehaved_model")
DATASET = Iri(EXAMPLE_NS + "susbehaved_dataset")
PROVIDER_LINE = "    airo:isProvidedBy ex:aiedux ;\n"


@pytest.fixture
def listing2():
    return catalogue_graph()


@pytest.fixture
def listing1():
    return shape_graph()


@pytest.fixture
def listing_files(tmp_path: Path) -> dict[str, Path]:
    """Self-contained copies of both listings, plus a no-provider variant."""
    full = self_contained(catalogue_text())
    assert PROVIDER_LINE in full
    paths = {
        "listing2": tmp_path / "listing2.ttl",
        "listing1": tmp_path / "listing1.ttl",
        "no_provider": tmp_path / "listing2-no-provider.ttl",
    }
    paths["listing2"].write_text(full, encoding="utf-8")
    paths["listing1"].write_text(self_contained(shape_text(), {"": EXAMPLE_NS}), encoding="utf-8")
    paths["no_provider"].write_text(full.replace(PROVIDER_LINE, ""), encoding="utf-8")
    return paths


# acceptance criteria record one line each; printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
