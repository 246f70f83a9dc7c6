"""Cut-set and attack-path analysis over trees.

Minimal cut sets treat SAND and PAND like AND (the ordering constraint is
dropped for the monotone analysis and reintroduced in attack_paths).
Leaves are basic events, unresolved attack events and attack steps.
"""

from __future__ import annotations

from .errors import SizeLimitExceeded
from .tree import GateType, NodeKind, TreeModel

DEFAULT_CUT_SET_CAP = 10_000


def _minimize(families: list[frozenset[str]]) -> list[frozenset[str]]:
    """Drop supersets (absorption); result sorted by size then ids."""
    ordered = sorted(set(families), key=lambda s: (len(s), sorted(s)))
    kept: list[frozenset[str]] = []
    for candidate in ordered:
        if not any(existing <= candidate for existing in kept):
            kept.append(candidate)
    return kept


def minimal_cut_sets(
    tree: TreeModel, cap: int = DEFAULT_CUT_SET_CAP
) -> list[frozenset[str]]:
    def combine(node_id: str) -> list[frozenset[str]]:
        node = tree.nodes[node_id]
        if node.kind is not NodeKind.GATE:
            return [frozenset({node.id})]
        child_families = [combine(child) for child in node.children]
        if node.gate is GateType.OR:
            merged: list[frozenset[str]] = []
            for family in child_families:
                merged.extend(family)
            result = _minimize(merged)
        else:  # AND, SAND, PAND
            result = [frozenset()]
            for family in child_families:
                crossed = [a | b for a in result for b in family]
                if len(crossed) > cap:
                    raise SizeLimitExceeded(
                        f"more than {cap} cut sets at gate {node.id}"
                    )
                result = _minimize(crossed)
        if len(result) > cap:
            raise SizeLimitExceeded(f"more than {cap} cut sets at gate {node.id}")
        return result

    return sorted(combine(tree.root_id), key=lambda s: (len(s), sorted(s)))


def _ordering_constraints(tree: TreeModel) -> list[tuple[str, str]]:
    """(before, after) pairs implied by SAND/PAND gates over attack steps."""
    step_ids = {
        node.id for node in tree.nodes.values() if node.kind is NodeKind.ATTACK_STEP
    }

    def steps_below(node_id: str) -> list[str]:
        return [
            n.id for n in tree.iter_preorder(node_id) if n.id in step_ids
        ]

    constraints: list[tuple[str, str]] = []
    for node in tree.iter_preorder():
        if node.kind is NodeKind.GATE and node.gate in (GateType.SAND, GateType.PAND):
            groups = [steps_below(child) for child in node.children]
            for earlier_index in range(len(groups)):
                for later_index in range(earlier_index + 1, len(groups)):
                    for before in groups[earlier_index]:
                        for after in groups[later_index]:
                            constraints.append((before, after))
    return constraints


def attack_paths(
    tree: TreeModel, cap: int = DEFAULT_CUT_SET_CAP
) -> list[tuple[str, ...]]:
    """Ordered attack-step sequences, one per cut set that contains steps.

    Steps are ordered topologically by the SAND/PAND constraints along
    their ancestry; unconstrained steps fall back to id order.
    """
    cut_sets = minimal_cut_sets(tree, cap=cap)
    constraints = _ordering_constraints(tree)

    paths = []
    for cut_set in cut_sets:
        steps = sorted(
            node_id
            for node_id in cut_set
            if tree.nodes[node_id].kind is NodeKind.ATTACK_STEP
        )
        if not steps:
            continue
        relevant = [(a, b) for a, b in constraints if a in cut_set and b in cut_set]
        paths.append(_topological(steps, relevant))
    return sorted(paths, key=lambda p: (len(p), p))


def _topological(steps: list[str], constraints: list[tuple[str, str]]) -> tuple[str, ...]:
    remaining = set(steps)
    blockers: dict[str, set[str]] = {s: set() for s in steps}
    for before, after in constraints:
        if before in remaining and after in remaining:
            blockers[after].add(before)
    out: list[str] = []
    while remaining:
        ready = sorted(s for s in remaining if not blockers[s] & remaining)
        if not ready:
            raise ValueError("cyclic ordering constraints")
        nxt = ready[0]
        out.append(nxt)
        remaining.discard(nxt)
    return tuple(out)
