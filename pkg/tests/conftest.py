import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from levyspec import AtomMeasure

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"


def paired_atoms(alpha=2.0):
    """nu = (alpha/4)(delta_{-1} + delta_{1})"""
    return AtomMeasure(np.array([[-1.0], [1.0]]), [alpha / 4, alpha / 4])


@pytest.fixture
def write_model(tmp_path):
    def _write(obj, name="model.json"):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)
    return _write


def schema_validator(name):
    from jsonschema import Draft202012Validator
    from referencing import Registry, Resource

    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        resources.append((p.name, Resource.from_contents(json.loads(p.read_text()))))
    registry = Registry().with_resources(resources)
    schema = json.loads((SCHEMAS / name).read_text())
    return Draft202012Validator(schema, registry=registry)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
