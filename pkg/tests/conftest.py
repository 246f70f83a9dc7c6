import os

import pytest

from aftforge.io.models_json import parse_dataflow, parse_deployment
from aftforge.io.tree_dsl import parse_tree_dsl
from aftforge.vulndb.store import VulnStore

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


def read_fixture(*parts: str) -> str:
    with open(fixture_path(*parts), encoding="utf-8") as handle:
        return handle.read()


@pytest.fixture
def dataflow():
    return parse_dataflow(read_fixture("dataflow.json"))


@pytest.fixture
def deployment():
    return parse_deployment(read_fixture("deployment.json"))


@pytest.fixture
def injury_ft():
    return parse_tree_dsl(read_fixture("injury.ft"))


@pytest.fixture
def store():
    """Store loaded with the fast_dds CVEs, the CWE graph and the CPE dictionary."""
    import json

    s = VulnStore()
    s.import_nvd([json.loads(read_fixture("nvd_fastdds.json"))])
    s.import_cwe(json.loads(read_fixture("cwe.json")))
    s.set_cpe_dictionary(read_fixture("cpe-dict.txt").splitlines())
    return s
