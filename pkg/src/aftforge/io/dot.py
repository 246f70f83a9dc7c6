"""Graphviz DOT rendering for trees.

Attack events use the house shape; basic events are circles, attack steps
boxes, and each gate type gets its own shape.  Output is deterministic:
nodes in document order, edges parent -> child in child order.
"""

from __future__ import annotations

from ..tree import GateType, NodeKind, TreeModel, TreeNode

_GATE_SHAPES = {
    GateType.AND: "invtriangle",
    GateType.OR: "invtrapezium",
    GateType.SAND: "cds",
    GateType.PAND: "larrow",
}


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _node_line(node: TreeNode) -> str:
    if node.kind is NodeKind.GATE:
        shape = _GATE_SHAPES[node.gate]
        label = _escape(f"{node.gate.value}: {node.label}")
    elif node.kind is NodeKind.BASIC_EVENT:
        shape = "circle"
        label = _escape(node.label)
    elif node.kind is NodeKind.ATTACK_EVENT:
        shape = "house"
        label = _escape(node.label)
        if node.required_cia is not None:
            label += "\\n" + node.required_cia.format()
    else:  # attack step
        shape = "box"
        label = _escape(node.label)
        if node.cve_id:
            label += "\\n" + _escape(node.cve_id)
    return f'  "{_escape(node.id)}" [shape={shape}, label="{label}"];'


def export_dot(tree: TreeModel) -> str:
    out = ["digraph tree {", "  rankdir=TB;"]
    for node in tree.iter_preorder():
        out.append(_node_line(node))
    for node in tree.iter_preorder():
        for child in node.children:
            out.append(f'  "{_escape(node.id)}" -> "{_escape(child)}";')
    out.append("}")
    return "\n".join(out) + "\n"
