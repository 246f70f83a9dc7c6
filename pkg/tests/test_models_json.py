import pytest

from aftforge.errors import ParseError, SchemaError, ValidationError
from aftforge.io.models_json import (
    dump_dataflow,
    dump_deployment,
    parse_dataflow,
    parse_deployment,
)
from aftforge.model import ElementType
from conftest import read_fixture


def test_fixture_dataflow_wiring(dataflow):
    assert [c.id for c in dataflow.components] == ["vrpn_client", "position_control"]
    channel = dataflow.channels_by_id["vrpn_pose"]
    assert channel.writers == ("vrpn_client",)
    assert channel.readers == ("position_control",)


def test_empty_model_is_valid():
    model = parse_dataflow('{"components": [], "channels": []}')
    assert model.components == ()
    assert model.channels == ()


def test_unknown_writer_raises_validation_error():
    doc = (
        '{"components": [{"id": "a", "name": "a"}],'
        ' "channels": [{"id": "c", "name": "c", "writers": ["ghost"], "readers": []}]}'
    )
    with pytest.raises(ValidationError) as err:
        parse_dataflow(doc)
    assert "ghost" in str(err.value)


def test_json_syntax_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_dataflow('{"components": [,]}')
    assert err.value.line == 1
    assert err.value.col > 1


def test_missing_field_is_schema_error():
    with pytest.raises(SchemaError) as err:
        parse_dataflow('{"components": [{"id": "a"}]}')
    assert "name" in str(err.value)


def test_deployment_fixture(deployment):
    element = deployment.elements_by_id["default_FARFETCH_bebop_position_control"]
    assert element.type is ElementType.COMPONENT_REF
    assert element.ref_component == "position_control"
    assert deployment.depends_on == (
        ("default_FARFETCH_bebop_position_control", "fast_dds"),
    )
    assert deployment.channels[0].dataflow_channel == "vrpn_pose"


def test_component_ref_without_ref_is_schema_error():
    doc = '{"elements": [{"id": "x", "name": "x", "type": "COMPONENT_REF"}]}'
    with pytest.raises(SchemaError):
        parse_deployment(doc)


def test_unknown_element_type_is_schema_error():
    doc = '{"elements": [{"id": "x", "name": "x", "type": "GIZMO"}]}'
    with pytest.raises(SchemaError):
        parse_deployment(doc)


def test_depends_on_cycle_loads_with_warning():
    doc = (
        '{"elements": [{"id": "a", "name": "a", "type": "PACKAGE"},'
        ' {"id": "b", "name": "b", "type": "PACKAGE"}],'
        ' "dependsOn": [["a", "b"], ["b", "a"]]}'
    )
    model = parse_deployment(doc)
    assert any(w.code == "dependency-cycle" for w in model.warnings)
    assert len(model.elements) == 2


def test_dangling_depends_on_is_error():
    doc = '{"elements": [{"id": "a", "name": "a", "type": "PACKAGE"}], "dependsOn": [["a", "ghost"]]}'
    with pytest.raises(ValidationError):
        parse_deployment(doc)


def test_dump_parse_round_trip(dataflow, deployment):
    assert parse_dataflow(dump_dataflow(dataflow)) == dataflow
    assert parse_deployment(dump_deployment(deployment)) == deployment
    assert dump_deployment(deployment) == dump_deployment(
        parse_deployment(read_fixture("deployment.json"))
    )
