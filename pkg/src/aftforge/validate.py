"""Collected invariant checking over models and trees.

Validation never raises: it returns every problem found so a user can fix
a model in one pass.  Callers that need to refuse bad input check for
diagnostics with severity ERROR.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import DataflowModel, DeploymentModel, ElementType
from .tree import NodeKind, TreeKind, TreeModel

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    subject: str | None = None

    def __str__(self) -> str:
        where = f" [{self.subject}]" if self.subject else ""
        return f"{self.severity}: {self.code}: {self.message}{where}"


def errors_only(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == ERROR]


def validate(
    dataflow: DataflowModel | None = None,
    deployment: DeploymentModel | None = None,
    trees: tuple[TreeModel, ...] = (),
) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if dataflow is not None:
        out.extend(_validate_dataflow(dataflow))
    if deployment is not None:
        out.extend(_validate_deployment(deployment, dataflow))
    for tree in trees:
        out.extend(validate_tree(tree))
    return out


def _validate_dataflow(model: DataflowModel) -> list[Diagnostic]:
    out = []
    seen: set[str] = set()
    for item in list(model.components) + list(model.channels):
        if not item.id:
            out.append(Diagnostic(ERROR, "empty-id", "element with empty id"))
        elif item.id in seen:
            out.append(Diagnostic(ERROR, "duplicate-id", "id used twice", item.id))
        seen.add(item.id)
    component_ids = {c.id for c in model.components}
    for channel in model.channels:
        for role, ids in (("writer", channel.writers), ("reader", channel.readers)):
            for cid in ids:
                if cid not in component_ids:
                    out.append(
                        Diagnostic(
                            ERROR,
                            "dangling-ref",
                            f"channel {role} {cid!r} is not a component",
                            channel.id,
                        )
                    )
    return out


def _validate_deployment(
    model: DeploymentModel, dataflow: DataflowModel | None
) -> list[Diagnostic]:
    out = []
    seen: set[str] = set()
    for element in model.elements:
        if not element.id:
            out.append(Diagnostic(ERROR, "empty-id", "element with empty id"))
        elif element.id in seen:
            out.append(Diagnostic(ERROR, "duplicate-id", "id used twice", element.id))
        seen.add(element.id)
        if element.type is ElementType.COMPONENT_REF and element.ref_component is None:
            out.append(
                Diagnostic(ERROR, "missing-ref", "COMPONENT_REF without a dataflow component", element.id)
            )
        if element.type is not ElementType.COMPONENT_REF and element.ref_component is not None:
            out.append(
                Diagnostic(
                    ERROR,
                    "unexpected-ref",
                    f"{element.type.value} element must not reference a dataflow component",
                    element.id,
                )
            )
        if dataflow is not None and element.ref_component is not None:
            if element.ref_component not in dataflow.components_by_id:
                out.append(
                    Diagnostic(
                        ERROR,
                        "dangling-ref",
                        f"unknown dataflow component {element.ref_component!r}",
                        element.id,
                    )
                )
    ids = {e.id for e in model.elements}
    for edge_name, edges in (("executesOn", model.executes_on), ("dependsOn", model.depends_on)):
        for src, dst in edges:
            for endpoint in (src, dst):
                if endpoint not in ids:
                    out.append(
                        Diagnostic(
                            ERROR,
                            "dangling-edge",
                            f"{edge_name} endpoint {endpoint!r} is not an element",
                            f"{src}->{dst}",
                        )
                    )
        for src, dst in edges:
            if src == dst:
                out.append(Diagnostic(ERROR, "self-loop", f"{edge_name} self loop", src))
    for cycle in _find_dependency_cycles(model):
        out.append(
            Diagnostic(WARNING, "dependency-cycle", "dependsOn cycle: " + " -> ".join(cycle))
        )
    if dataflow is not None:
        for channel in model.channels:
            if channel.dataflow_channel is not None:
                if channel.dataflow_channel not in dataflow.channels_by_id:
                    out.append(
                        Diagnostic(
                            ERROR,
                            "dangling-ref",
                            f"unknown dataflow channel {channel.dataflow_channel!r}",
                            channel.id,
                        )
                    )
    return out


def _find_dependency_cycles(model: DeploymentModel) -> list[tuple[str, ...]]:
    """Cycles in the depends-on graph via iterative three-colour DFS."""
    deps = model.direct_dependencies
    white = {e.id for e in model.elements}
    cycles: list[tuple[str, ...]] = []
    on_path: list[str] = []
    on_path_set: set[str] = set()

    def visit(start: str) -> None:
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node, child_idx = stack[-1]
            if child_idx == 0:
                white.discard(node)
                on_path.append(node)
                on_path_set.add(node)
            children = deps.get(node, ())
            if child_idx < len(children):
                stack[-1] = (node, child_idx + 1)
                child = children[child_idx]
                if child in on_path_set:
                    cycles.append(tuple(on_path[on_path.index(child):]) + (child,))
                elif child in white:
                    stack.append((child, 0))
            else:
                stack.pop()
                on_path.pop()
                on_path_set.discard(node)

    for element in model.elements:
        if element.id in white:
            visit(element.id)
    return cycles


def validate_tree(tree: TreeModel) -> list[Diagnostic]:
    out = []
    if tree.root_id not in tree.nodes:
        out.append(Diagnostic(ERROR, "missing-root", f"root {tree.root_id!r} not defined"))
        return out

    parents: dict[str, str] = {}
    for node in tree.nodes.values():
        for child in node.children:
            if child not in tree.nodes:
                out.append(Diagnostic(ERROR, "dangling-child", f"child {child!r} not defined", node.id))
            elif child in parents:
                out.append(
                    Diagnostic(ERROR, "not-a-tree", f"{child!r} has two parents", child)
                )
            else:
                parents[child] = node.id

    reachable: set[str] = set()
    stack = [tree.root_id]
    while stack:
        nid = stack.pop()
        if nid in reachable or nid not in tree.nodes:
            continue
        reachable.add(nid)
        stack.extend(tree.nodes[nid].children)
    for nid in tree.nodes:
        if nid not in reachable:
            out.append(Diagnostic(ERROR, "unreachable", "node not reachable from root", nid))
    if tree.root_id in parents:
        out.append(Diagnostic(ERROR, "not-a-tree", "root has a parent", tree.root_id))

    for node in tree.nodes.values():
        if node.kind is NodeKind.GATE:
            if node.gate is None:
                out.append(Diagnostic(ERROR, "missing-gate-type", "gate without a type", node.id))
            if not node.children:
                out.append(Diagnostic(ERROR, "empty-gate", "gate with no children", node.id))
        else:
            if node.children:
                out.append(Diagnostic(ERROR, "leaf-with-children", "leaf node has children", node.id))
        if node.kind is NodeKind.ATTACK_EVENT:
            if node.ref is None and node.ref_var is None:
                out.append(Diagnostic(ERROR, "missing-ref", "attack event without a reference", node.id))
            if node.ref_var is not None and tree.kind is not TreeKind.FRAGMENT_BODY:
                out.append(
                    Diagnostic(ERROR, "unbound-variable", f"unresolved ${node.ref_var}", node.id)
                )
    return out


def validate_tree_refs(
    tree: TreeModel, dataflow: DataflowModel, deployment: DeploymentModel
) -> list[Diagnostic]:
    """Cross-model check: every attack event reference must resolve."""
    from .model import resolve_ref
    from .errors import AftforgeError

    out = []
    for node in tree.nodes.values():
        if node.kind is NodeKind.ATTACK_EVENT and node.ref is not None:
            try:
                resolve_ref(node.ref, dataflow, deployment)
            except AftforgeError as exc:
                out.append(Diagnostic(ERROR, "dangling-ref", str(exc), node.id))
    return out
