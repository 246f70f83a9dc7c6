"""Deployment model assembly from a parsed snapshot inventory.

Components become COMPONENT_REF elements running on one PLATFORM element
per host.  Open files and their shared-library resolutions become
depends-on edges; files owned by a package collapse into a single PACKAGE
element carrying the package version, unowned files stay as FILE or
LIBRARY elements flagged unowned=true.  Output is deterministic: ids are
the component names, package names and file paths themselves, and all
element and edge lists are assembled in sorted order.
"""

from __future__ import annotations

import re

from ..model import (
    DataflowModel,
    DeploymentElement,
    DeploymentModel,
    ElementType,
)
from .snapshot import Inventory

MAX_DEPTH = 8

_SONAME_VERSION = re.compile(r"\.so\.([0-9][0-9.]*)$")


def build_deployment(
    inventory: Inventory,
    dataflow: DataflowModel,
    hosts_config: dict[str, dict[str, str]] | None = None,
) -> DeploymentModel:
    hosts_config = hosts_config or {}
    warnings: list[str] = list(inventory.warnings)

    elements: dict[str, DeploymentElement] = {}
    edges: set[tuple[str, str]] = set()

    def add_element(element: DeploymentElement) -> None:
        existing = elements.get(element.id)
        if existing is None:
            elements[element.id] = element
        elif existing.type is not element.type:
            warnings.append(
                f"id {element.id!r} used as both {existing.type.value} and "
                f"{element.type.value}; keeping the first"
            )

    # node id for a concrete file path: its owning package when known
    def node_for_path(path: str) -> str:
        package = inventory.file_owner.get(path)
        if package is not None:
            version = inventory.package_version.get(package)
            properties = {}
            if version:
                properties["version"] = version
            add_element(
                DeploymentElement(
                    id=package,
                    name=package,
                    type=ElementType.PACKAGE,
                    properties=properties,
                    version=version,
                )
            )
            return package
        soname = _SONAME_VERSION.search(path)
        element_type = ElementType.LIBRARY if ".so" in path else ElementType.FILE
        add_element(
            DeploymentElement(
                id=path,
                name=path.rsplit("/", 1)[-1],
                type=element_type,
                properties={"unowned": "true"},
                version=soname.group(1) if soname else None,
            )
        )
        return path

    name_to_component = {c.id: c.id for c in dataflow.components}
    for c in dataflow.components:
        name_to_component.setdefault(c.name, c.id)

    for capture in inventory.components:
        add_element(
            DeploymentElement(
                id=capture.host,
                name=capture.host,
                type=ElementType.PLATFORM,
                properties=dict(hosts_config.get(capture.host, {})),
            )
        )
        ref = name_to_component.get(capture.name)
        if ref is None:
            warnings.append(f"component {capture.name!r} is not in the dataflow model")
        add_element(
            DeploymentElement(
                id=capture.name,
                name=capture.name,
                type=ElementType.OTHER if ref is None else ElementType.COMPONENT_REF,
                properties={"pid": str(capture.pid)},
                ref_component=ref,
            )
        )

        # breadth-first over open files and their library resolutions
        frontier = [(capture.name, path) for path in sorted(capture.open_files)]
        visited_paths: set[str] = set()
        depth = 0
        while frontier and depth < MAX_DEPTH:
            next_frontier = []
            for parent_node, path in frontier:
                node = node_for_path(path)
                if node != parent_node:
                    edges.add((parent_node, node))
                if path in visited_paths:
                    continue
                visited_paths.add(path)
                for resolved in inventory.resolved_libraries.get(path, ()):
                    next_frontier.append((node, resolved))
            frontier = next_frontier
            depth += 1

    executes_on = sorted((capture.name, capture.host) for capture in inventory.components)
    depends_on = sorted(edge for edge in edges if edge[0] != edge[1])

    ordered = [elements[key] for key in sorted(elements)]
    return DeploymentModel(
        elements=tuple(ordered),
        executes_on=tuple(executes_on),
        depends_on=tuple(depends_on),
        channels=(),
        warnings=tuple(warnings),
    )
