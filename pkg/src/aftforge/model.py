"""Dataflow and deployment models plus reference resolution.

The dataflow model is the logical view: components exchanging data over
channels.  The deployment model grounds it in concrete system elements
(packages, libraries, hosts) connected by executes-on and depends-on
edges.  Both are immutable value objects; parsing lives in aftforge.io.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from .errors import KindMismatch, UnknownReference


class RefKind(Enum):
    DATAFLOW_COMPONENT = "component"
    DATAFLOW_CHANNEL = "channel"
    DEPLOYMENT_ELEMENT = "deploy"

    @classmethod
    def from_prefix(cls, prefix: str) -> "RefKind":
        for kind in cls:
            if kind.value == prefix:
                return kind
        raise ValueError(f"unknown reference kind: {prefix!r}")


@dataclass(frozen=True)
class ElementRef:
    kind: RefKind
    id: str

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.id}"


class ElementType(Enum):
    FILE = "FILE"
    LIBRARY = "LIBRARY"
    PACKAGE = "PACKAGE"
    PLATFORM = "PLATFORM"
    OS = "OS"
    HW = "HW"
    SENSOR = "SENSOR"
    ACTOR = "ACTOR"
    COMPONENT_REF = "COMPONENT_REF"
    OTHER = "OTHER"


@dataclass(frozen=True)
class DataflowComponent:
    id: str
    name: str


@dataclass(frozen=True)
class DataflowChannel:
    id: str
    name: str
    writers: tuple[str, ...] = ()
    readers: tuple[str, ...] = ()


@dataclass(frozen=True)
class DataflowModel:
    components: tuple[DataflowComponent, ...] = ()
    channels: tuple[DataflowChannel, ...] = ()
    warnings: tuple = field(default=(), compare=False, repr=False)

    @cached_property
    def components_by_id(self) -> dict[str, DataflowComponent]:
        return {c.id: c for c in self.components}

    @cached_property
    def channels_by_id(self) -> dict[str, DataflowChannel]:
        return {c.id: c for c in self.channels}


@dataclass(frozen=True)
class DeploymentElement:
    id: str
    name: str
    type: ElementType
    properties: dict[str, str] = field(default_factory=dict)
    cpe: str | None = None
    ref_component: str | None = None
    version: str | None = None


@dataclass(frozen=True)
class DeploymentChannel:
    id: str
    dataflow_channel: str | None = None
    properties: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DeploymentModel:
    elements: tuple[DeploymentElement, ...] = ()
    executes_on: tuple[tuple[str, str], ...] = ()
    depends_on: tuple[tuple[str, str], ...] = ()
    channels: tuple[DeploymentChannel, ...] = ()
    warnings: tuple = field(default=(), compare=False, repr=False)

    @cached_property
    def elements_by_id(self) -> dict[str, DeploymentElement]:
        return {e.id: e for e in self.elements}

    @cached_property
    def direct_dependencies(self) -> dict[str, tuple[str, ...]]:
        deps: dict[str, list[str]] = {}
        for src, dst in self.depends_on:
            deps.setdefault(src, []).append(dst)
        return {k: tuple(v) for k, v in deps.items()}

    @cached_property
    def elements_for_component(self) -> dict[str, tuple[DeploymentElement, ...]]:
        """Deployment elements grouped by the dataflow component they map."""
        mapping: dict[str, list[DeploymentElement]] = {}
        for e in self.elements:
            if e.ref_component is not None:
                mapping.setdefault(e.ref_component, []).append(e)
        return {k: tuple(v) for k, v in mapping.items()}

    @cached_property
    def channels_for_dataflow_channel(self) -> dict[str, tuple[DeploymentChannel, ...]]:
        mapping: dict[str, list[DeploymentChannel]] = {}
        for c in self.channels:
            if c.dataflow_channel is not None:
                mapping.setdefault(c.dataflow_channel, []).append(c)
        return {k: tuple(v) for k, v in mapping.items()}


def resolve_ref(ref: ElementRef, dataflow: DataflowModel, deployment: DeploymentModel):
    """Resolve a reference to its model element, checking the stated kind."""
    tables = {
        RefKind.DATAFLOW_COMPONENT: dataflow.components_by_id,
        RefKind.DATAFLOW_CHANNEL: dataflow.channels_by_id,
        RefKind.DEPLOYMENT_ELEMENT: deployment.elements_by_id,
    }
    hit = tables[ref.kind].get(ref.id)
    if hit is not None:
        return hit
    for kind, table in tables.items():
        if kind is not ref.kind and ref.id in table:
            raise KindMismatch(
                f"{ref.id!r} exists as {kind.value}, not as {ref.kind.value}"
            )
    raise UnknownReference(f"no {ref.kind.value} element with id {ref.id!r}")


def deployment_closure(element_id: str, deployment: DeploymentModel) -> set[str]:
    """The element plus everything reachable over depends-on edges.

    Executes-on edges are not followed.  Terminates on cyclic graphs.
    """
    if element_id not in deployment.elements_by_id:
        raise UnknownReference(f"no deployment element with id {element_id!r}")
    seen = {element_id}
    stack = [element_id]
    deps = deployment.direct_dependencies
    while stack:
        current = stack.pop()
        for nxt in deps.get(current, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen
