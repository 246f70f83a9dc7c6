import pytest

from aftforge.errors import KindMismatch, UnknownReference
from aftforge.model import (
    DataflowModel,
    DeploymentElement,
    DeploymentModel,
    ElementRef,
    ElementType,
    RefKind,
    deployment_closure,
    resolve_ref,
)
from aftforge.validate import ERROR, WARNING, validate
from conftest import read_fixture
from aftforge.io.models_json import parse_dataflow


def test_resolve_channel_exposes_writers(dataflow, deployment):
    ref = ElementRef(RefKind.DATAFLOW_CHANNEL, "vrpn_pose")
    channel = resolve_ref(ref, dataflow, deployment)
    assert channel.writers == ("vrpn_client",)
    assert channel.readers == ("position_control",)


def test_resolve_unknown_id(dataflow, deployment):
    with pytest.raises(UnknownReference):
        resolve_ref(ElementRef(RefKind.DEPLOYMENT_ELEMENT, "missing"), dataflow, deployment)


def test_resolve_kind_mismatch(dataflow, deployment):
    with pytest.raises(KindMismatch):
        resolve_ref(ElementRef(RefKind.DATAFLOW_COMPONENT, "vrpn_pose"), dataflow, deployment)


def test_closure_contains_fast_dds(deployment):
    closure = deployment_closure("default_FARFETCH_bebop_position_control", deployment)
    assert "fast_dds" in closure
    assert "default_FARFETCH_bebop_position_control" in closure


def test_closure_of_leaf_is_singleton(deployment):
    assert deployment_closure("fast_dds", deployment) == {"fast_dds"}


def _graph(elements, depends_on):
    return DeploymentModel(
        elements=tuple(
            DeploymentElement(id=e, name=e, type=ElementType.PACKAGE) for e in elements
        ),
        depends_on=tuple(depends_on),
    )


def brute_force_reachable(start, edges):
    reached = {start}
    changed = True
    while changed:
        changed = False
        for src, dst in edges:
            if src in reached and dst not in reached:
                reached.add(dst)
                changed = True
    return reached


def test_closure_on_diamond_counts_each_node_once():
    edges = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    model = _graph("abcd", edges)
    closure = deployment_closure("a", model)
    assert closure == brute_force_reachable("a", edges) == {"a", "b", "c", "d"}


def test_closure_terminates_on_cycles_and_matches_brute_force():
    edges = [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]
    model = _graph("abcd", edges)
    assert deployment_closure("a", model) == brute_force_reachable("a", edges)


def test_closure_unknown_element(deployment):
    with pytest.raises(UnknownReference):
        deployment_closure("missing", deployment)


def test_closure_does_not_follow_executes_on():
    model = DeploymentModel(
        elements=(
            DeploymentElement(id="comp", name="comp", type=ElementType.PACKAGE),
            DeploymentElement(id="host", name="host", type=ElementType.PLATFORM),
        ),
        executes_on=(("comp", "host"),),
    )
    assert deployment_closure("comp", model) == {"comp"}


def test_validate_clean_fixture_is_empty(dataflow, deployment):
    assert validate(dataflow=dataflow, deployment=deployment) == []


def test_validate_reports_dangling_channel_writer():
    model = parse_dataflow(read_fixture("dataflow.json"))
    broken = DataflowModel(
        components=model.components[:1],  # drop position_control
        channels=model.channels,
    )
    diagnostics = validate(dataflow=broken)
    assert any(d.severity == ERROR and "position_control" in d.message for d in diagnostics)
    assert any(d.subject == "vrpn_pose" for d in diagnostics)


def test_validate_warns_on_dependency_cycle():
    model = _graph("ab", [("a", "b"), ("b", "a")])
    diagnostics = validate(deployment=model)
    assert any(d.severity == WARNING and d.code == "dependency-cycle" for d in diagnostics)
    assert not [d for d in diagnostics if d.severity == ERROR]


def test_validate_rejects_two_parent_node(injury_ft):
    tree = injury_ft
    tree.nodes["top"].children.append("mechanical")  # second parent for a leaf
    diagnostics = validate(trees=(tree,))
    assert any(d.code == "not-a-tree" for d in diagnostics)
