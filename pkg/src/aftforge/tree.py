"""Unified tree representation for fault trees, attack trees and AFTs.

A tree is a map of nodes plus a root id.  Children are ordered; for SAND
and PAND gates the order is semantically significant and every operation
in this package preserves it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator

from .cia import CiaTriple
from .model import ElementRef


class TreeKind(Enum):
    FAULT_TREE = "faulttree"
    ATTACK_TREE = "attacktree"
    AFT = "aft"
    FRAGMENT_BODY = "fragment_body"


class NodeKind(Enum):
    GATE = "gate"
    BASIC_EVENT = "basic"
    ATTACK_EVENT = "attack"
    ATTACK_STEP = "step"


class GateType(Enum):
    AND = "AND"
    OR = "OR"
    SAND = "SAND"
    PAND = "PAND"


@dataclass
class TreeNode:
    id: str
    label: str
    kind: NodeKind
    gate: GateType | None = None
    children: list[str] = field(default_factory=list)
    # attack events: what they point at and what an attack must provide
    ref: ElementRef | None = None
    ref_var: str | None = None  # unresolved variable, fragment bodies only
    required_cia: CiaTriple | None = None
    # attack steps: the exploited vulnerability and its impact
    cve_id: str | None = None
    cwe_id: str | None = None
    cvss_vector: str | None = None
    provided_cia: CiaTriple | None = None
    # generation trace, not part of structural equality
    provenance: dict | None = field(default=None, compare=False, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.kind is not NodeKind.GATE


@dataclass
class TreeModel:
    kind: TreeKind
    name: str
    root_id: str
    nodes: dict[str, TreeNode] = field(default_factory=dict)

    def node(self, node_id: str) -> TreeNode:
        return self.nodes[node_id]

    @property
    def root(self) -> TreeNode:
        return self.nodes[self.root_id]

    def iter_preorder(self, start: str | None = None) -> Iterator[TreeNode]:
        """Depth-first document order, children in stored order."""
        stack = [start if start is not None else self.root_id]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.iter_preorder() if n.is_leaf]

    def attack_events(self) -> list[TreeNode]:
        return [n for n in self.iter_preorder() if n.kind is NodeKind.ATTACK_EVENT]

    def parent_map(self) -> dict[str, str]:
        parents: dict[str, str] = {}
        for node in self.nodes.values():
            for child in node.children:
                parents[child] = node.id
        return parents

    def copy(self, kind: TreeKind | None = None, id_prefix: str = "") -> "TreeModel":
        """Structure-preserving copy, optionally re-kinded and id-prefixed."""
        nodes = {}
        for node in self.nodes.values():
            clone = replace(
                node,
                id=id_prefix + node.id,
                children=[id_prefix + c for c in node.children],
            )
            nodes[clone.id] = clone
        return TreeModel(
            kind=kind if kind is not None else self.kind,
            name=self.name,
            root_id=id_prefix + self.root_id,
            nodes=nodes,
        )


def fresh_id_allocator(tree: TreeModel, stem: str = "g"):
    """Yields node ids <stem>1, <stem>2, ... skipping ids already taken."""
    counter = 0

    def allocate() -> str:
        nonlocal counter
        while True:
            counter += 1
            candidate = f"{stem}{counter}"
            if candidate not in tree.nodes:
                return candidate

    return allocate
