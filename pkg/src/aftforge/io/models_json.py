"""JSON readers and writers for dataflow and deployment models.

Dataflow documents look like::

    {"components": [{"id": "c1", "name": "Position Control"}],
     "channels": [{"id": "ch1", "name": "Pose", "writers": ["c1"], "readers": []}]}

Deployment documents::

    {"elements": [{"id": "fast_dds", "name": "fast_dds", "type": "PACKAGE",
                   "properties": {"version": "2.1.1"}, "version": "2.1.1"}],
     "executesOn": [["child", "host"]],
     "dependsOn": [["from", "to"]],
     "channels": [{"id": "net1", "dataflowChannel": "ch1", "properties": {}}]}

Parsers raise ParseError for bad JSON (with line/column), SchemaError for
wrong shapes, and ValidationError when internal invariants fail.  Warnings
(for example dependency cycles) are attached to the returned model.
"""

from __future__ import annotations

import json

from ..errors import ParseError, SchemaError, ValidationError
from ..model import (
    DataflowChannel,
    DataflowComponent,
    DataflowModel,
    DeploymentChannel,
    DeploymentElement,
    DeploymentModel,
    ElementType,
)
from ..validate import WARNING, errors_only, validate


def _load_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    return doc


_MISSING = object()


def _string(obj: dict, key: str, where: str) -> str:
    value = obj.get(key, _MISSING)
    if value is _MISSING:
        raise SchemaError(f"{where}: missing field {key!r}")
    if not isinstance(value, str):
        raise SchemaError(f"{where}: field {key!r} must be a string")
    return value


def _string_list(obj: dict, key: str, where: str) -> tuple[str, ...]:
    value = obj.get(key, [])
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise SchemaError(f"{where}: field {key!r} must be a list of strings")
    return tuple(value)


def _object_list(doc: dict, key: str, where: str) -> list[dict]:
    value = doc.get(key, [])
    if not isinstance(value, list) or any(not isinstance(v, dict) for v in value):
        raise SchemaError(f"{where}: field {key!r} must be a list of objects")
    return value


def _properties(obj: dict, where: str) -> dict[str, str]:
    value = obj.get("properties", {})
    if not isinstance(value, dict):
        raise SchemaError(f"{where}: field 'properties' must be an object")
    out = {}
    for k, v in value.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise SchemaError(f"{where}: properties must map strings to strings")
        out[k] = v
    return out


def parse_dataflow(text: str) -> DataflowModel:
    doc = _load_json(text)
    components = []
    for index, item in enumerate(_object_list(doc, "components", "dataflow")):
        where = f"components[{index}]"
        components.append(
            DataflowComponent(id=_string(item, "id", where), name=_string(item, "name", where))
        )
    channels = []
    for index, item in enumerate(_object_list(doc, "channels", "dataflow")):
        where = f"channels[{index}]"
        channels.append(
            DataflowChannel(
                id=_string(item, "id", where),
                name=_string(item, "name", where),
                writers=_string_list(item, "writers", where),
                readers=_string_list(item, "readers", where),
            )
        )
    model = DataflowModel(components=tuple(components), channels=tuple(channels))
    diagnostics = validate(dataflow=model)
    errors = errors_only(diagnostics)
    if errors:
        raise ValidationError(errors)
    return DataflowModel(
        components=model.components,
        channels=model.channels,
        warnings=tuple(d for d in diagnostics if d.severity == WARNING),
    )


def _edges(doc: dict, key: str) -> tuple[tuple[str, str], ...]:
    value = doc.get(key, [])
    if not isinstance(value, list):
        raise SchemaError(f"field {key!r} must be a list of [from, to] pairs")
    out = []
    for index, pair in enumerate(value):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(not isinstance(p, str) for p in pair)
        ):
            raise SchemaError(f"{key}[{index}]: must be a [from, to] pair of strings")
        out.append((pair[0], pair[1]))
    return tuple(out)


def parse_deployment(text: str) -> DeploymentModel:
    doc = _load_json(text)
    elements = []
    for index, item in enumerate(_object_list(doc, "elements", "deployment")):
        where = f"elements[{index}]"
        type_name = _string(item, "type", where)
        try:
            element_type = ElementType(type_name)
        except ValueError:
            raise SchemaError(f"{where}: unknown element type {type_name!r}") from None
        ref = item.get("ref")
        if ref is not None and not isinstance(ref, str):
            raise SchemaError(f"{where}: field 'ref' must be a string")
        if element_type is ElementType.COMPONENT_REF and ref is None:
            raise SchemaError(f"{where}: COMPONENT_REF requires field 'ref'")
        if element_type is not ElementType.COMPONENT_REF and ref is not None:
            raise SchemaError(f"{where}: field 'ref' is only valid on COMPONENT_REF")
        cpe = item.get("cpe")
        if cpe is not None and not isinstance(cpe, str):
            raise SchemaError(f"{where}: field 'cpe' must be a string")
        version = item.get("version")
        if version is not None and not isinstance(version, str):
            raise SchemaError(f"{where}: field 'version' must be a string")
        elements.append(
            DeploymentElement(
                id=_string(item, "id", where),
                name=_string(item, "name", where),
                type=element_type,
                properties=_properties(item, where),
                cpe=cpe,
                ref_component=ref,
                version=version,
            )
        )
    channels = []
    for index, item in enumerate(_object_list(doc, "channels", "deployment")):
        where = f"channels[{index}]"
        dataflow_channel = item.get("dataflowChannel")
        if dataflow_channel is not None and not isinstance(dataflow_channel, str):
            raise SchemaError(f"{where}: field 'dataflowChannel' must be a string")
        channels.append(
            DeploymentChannel(
                id=_string(item, "id", where),
                dataflow_channel=dataflow_channel,
                properties=_properties(item, where),
            )
        )
    model = DeploymentModel(
        elements=tuple(elements),
        executes_on=_edges(doc, "executesOn"),
        depends_on=_edges(doc, "dependsOn"),
        channels=tuple(channels),
    )
    diagnostics = validate(deployment=model)
    errors = errors_only(diagnostics)
    if errors:
        raise ValidationError(errors)
    return DeploymentModel(
        elements=model.elements,
        executes_on=model.executes_on,
        depends_on=model.depends_on,
        channels=model.channels,
        warnings=tuple(d for d in diagnostics if d.severity == WARNING),
    )


def dump_dataflow(model: DataflowModel) -> str:
    doc = {
        "components": [{"id": c.id, "name": c.name} for c in model.components],
        "channels": [
            {
                "id": c.id,
                "name": c.name,
                "writers": list(c.writers),
                "readers": list(c.readers),
            }
            for c in model.channels
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def dump_deployment(model: DeploymentModel) -> str:
    elements = []
    for e in model.elements:
        item: dict = {"id": e.id, "name": e.name, "type": e.type.value}
        if e.properties:
            item["properties"] = dict(e.properties)
        if e.cpe is not None:
            item["cpe"] = e.cpe
        if e.ref_component is not None:
            item["ref"] = e.ref_component
        if e.version is not None:
            item["version"] = e.version
        elements.append(item)
    doc = {
        "elements": elements,
        "executesOn": [list(edge) for edge in model.executes_on],
        "dependsOn": [list(edge) for edge in model.depends_on],
        "channels": [
            {
                "id": c.id,
                **({"dataflowChannel": c.dataflow_channel} if c.dataflow_channel else {}),
                "properties": dict(c.properties),
            }
            for c in model.channels
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
