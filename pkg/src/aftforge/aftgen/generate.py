"""Three-phase AFT generation.

1. Copy the fault tree into a fresh AFT (ids prefixed `aft.`).
2. Repeatedly attach matching fragments to unresolved attack events;
   events introduced by fragment bodies become eligible in the next
   iteration.  Termination: a fragment is never re-applied along its own
   ancestry chain, and the iteration count is bounded.
3. Attach generated attack trees to the attack events that remain.

Replaced attack events are kept as intermediate OR nodes above their
attachments so the original fault-tree labels stay visible; multiple
attachments are joined under a single OR gate.  Every decision lands in
the generation report.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..cia import ANY_TRIPLE, CiaTriple, cia_satisfies
from ..errors import TemplateError
from ..model import DataflowModel, DeploymentModel, ElementRef
from ..tree import GateType, NodeKind, TreeKind, TreeModel, TreeNode, fresh_id_allocator
from .fragments import Fragment
from .matching import (
    REJECT_CIA,
    REJECT_CONTEXT,
    Binding,
    MatchResult,
    at_context_matches,
    match_fragment,
)

_INTERPOLATION = re.compile(r"\$\{\$([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_]+)\}")

JOIN_LABEL = "one of"


@dataclass
class EventReport:
    event_id: str
    label: str
    origin: str  # "fault-tree" or "fragment:<name>"
    required_cia: str
    ref: str | None = None
    fragments_attached: list[dict] = field(default_factory=list)
    fragments_rejected: list[dict] = field(default_factory=list)
    suppressed: list[dict] = field(default_factory=list)
    ats_attached: list[dict] = field(default_factory=list)
    ats_rejected: list[dict] = field(default_factory=list)
    resolved: bool = False


@dataclass
class GenerationReport:
    events: dict[str, EventReport] = field(default_factory=dict)
    iterations: int = 0
    depth_exhausted: bool = False
    config: dict = field(default_factory=dict)

    @property
    def unresolved(self) -> list[str]:
        return [e.event_id for e in self.events.values() if not e.resolved]

    def event(self, event_id: str) -> EventReport:
        return self.events[event_id]

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "iterations": self.iterations,
            "depthExhausted": self.depth_exhausted,
            "unresolved": self.unresolved,
            "events": [
                {
                    "eventId": e.event_id,
                    "label": e.label,
                    "origin": e.origin,
                    "ref": e.ref,
                    "requiredCia": e.required_cia,
                    "fragmentsAttached": e.fragments_attached,
                    "fragmentsRejected": e.fragments_rejected,
                    "suppressed": e.suppressed,
                    "atsAttached": e.ats_attached,
                    "atsRejected": e.ats_rejected,
                    "resolved": e.resolved,
                }
                for e in self.events.values()
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


@dataclass
class GenerationOptions:
    max_depth: int = 5


def copy_fault_tree(ft: TreeModel) -> TreeModel:
    """Fresh AFT with the fault tree's exact structure, ids prefixed aft. ."""
    if ft.kind is not TreeKind.FAULT_TREE:
        raise ValueError("expected a fault tree")
    return ft.copy(kind=TreeKind.AFT, id_prefix="aft.")


def _interpolate(label: str, binding: Binding) -> str:
    def substitute(match: re.Match) -> str:
        var, attr = match.group(1), match.group(2)
        element = binding.get(var)
        if element is None:
            raise TemplateError(f"${{${var}.{attr}}}: variable ${var} is not bound")
        if attr == "name":
            return element.name
        if attr == "id":
            return element.id
        if attr == "version":
            return element.version or ""
        raise TemplateError(f"${{${var}.{attr}}}: unknown attribute {attr!r}")

    return _INTERPOLATION.sub(substitute, label)


def instantiate_body(
    aft: TreeModel,
    fragment: Fragment,
    binding: Binding,
    allocate,
    ancestry: tuple[str, ...],
) -> str:
    """Clone the fragment body into the AFT with variables substituted.

    Returns the new root id.  Introduced attack events carry the fragment
    ancestry chain in their provenance so re-application can be detected.
    """
    id_map = {old: allocate() for old in (n.id for n in fragment.body.iter_preorder())}
    root_new = None
    for node in fragment.body.iter_preorder():
        new_id = id_map[node.id]
        if root_new is None:
            root_new = new_id
        ref = node.ref
        if node.ref_var is not None:
            element = binding.get(node.ref_var)
            if element is None:
                raise TemplateError(f"ref=${node.ref_var}: variable is not bound")
            ref = ElementRef(element.kind, element.id)
        clone = TreeNode(
            id=new_id,
            label=_interpolate(node.label, binding),
            kind=node.kind,
            gate=node.gate,
            children=[id_map[c] for c in node.children],
            ref=ref,
            required_cia=node.required_cia,
            cve_id=node.cve_id,
            cwe_id=node.cwe_id,
            cvss_vector=node.cvss_vector,
            provided_cia=node.provided_cia,
        )
        if clone.kind is NodeKind.ATTACK_EVENT:
            clone.provenance = {"origin": f"fragment:{fragment.name}", "ancestry": list(ancestry)}
        aft.nodes[new_id] = clone
    assert root_new is not None
    return root_new


def _attach_subtree(aft: TreeModel, event_id: str, subtree_root: str, allocate) -> None:
    """Hang a subtree under an attack event, converting it on first use.

    The event becomes an intermediate OR node with a single child: the
    attachment itself, or a join OR gate once there are several.
    """
    event = aft.nodes[event_id]
    if event.kind is NodeKind.ATTACK_EVENT:
        event.kind = NodeKind.GATE
        event.gate = GateType.OR
        event.ref = None
        event.ref_var = None
        event.required_cia = None
        event.children = [subtree_root]
        return
    assert event.kind is NodeKind.GATE and len(event.children) == 1
    only_child = aft.nodes[event.children[0]]
    if only_child.provenance is not None and only_child.provenance.get("join"):
        only_child.children.append(subtree_root)
        return
    join = TreeNode(
        id=allocate(),
        label=JOIN_LABEL,
        kind=NodeKind.GATE,
        gate=GateType.OR,
        children=[only_child.id, subtree_root],
        provenance={"join": True},
    )
    aft.nodes[join.id] = join
    event.children = [join.id]


def _binding_summary(binding: Binding) -> dict[str, str]:
    return {var: element.id for var, element in sorted(binding.items())}


def apply_fragment(
    aft: TreeModel,
    event_id: str,
    fragment: Fragment,
    bindings: list[Binding],
    allocate=None,
    ancestry: tuple[str, ...] = (),
    required: CiaTriple | None = None,
) -> list[str]:
    """Instantiate the fragment once per binding under the given event.

    Returns the new subtree root ids, in binding order.  `required` is the
    event's impact requirement; pass it explicitly when the event was
    already converted by an earlier attachment.
    """
    if not bindings:
        raise ValueError("apply_fragment requires at least one binding")
    if allocate is None:
        allocate = fresh_id_allocator(aft)
    event = aft.nodes[event_id]
    if required is None:
        required = event.required_cia if event.required_cia is not None else ANY_TRIPLE
    roots = []
    chain = ancestry + (fragment.name,)
    for binding in bindings:
        root_id = instantiate_body(aft, fragment, binding, allocate, chain)
        root = aft.nodes[root_id]
        provenance = dict(root.provenance or {})
        provenance.update(
            {
                "attachment": "fragment",
                "fragment": fragment.name,
                "binding": _binding_summary(binding),
                "provides": fragment.provides_cia.format(),
                "eventRequired": required.format(),
                "eventId": event_id,
            }
        )
        root.provenance = provenance
        _attach_subtree(aft, event_id, root_id, allocate)
        roots.append(root_id)
    return roots


def _event_ancestry(node: TreeNode) -> tuple[str, ...]:
    if node.provenance is None:
        return ()
    return tuple(node.provenance.get("ancestry", ()))


def _register_event(report: GenerationReport, node: TreeNode) -> EventReport:
    if node.id not in report.events:
        origin = "fault-tree"
        if node.provenance is not None and "origin" in node.provenance:
            origin = node.provenance["origin"]
        report.events[node.id] = EventReport(
            event_id=node.id,
            label=node.label,
            origin=origin,
            required_cia=(node.required_cia or ANY_TRIPLE).format(),
            ref=str(node.ref) if node.ref is not None else None,
        )
    return report.events[node.id]


def fragment_phase(
    aft: TreeModel,
    fragments: list[Fragment],
    dataflow: DataflowModel,
    deployment: DeploymentModel,
    max_depth: int = 5,
    report: GenerationReport | None = None,
) -> GenerationReport:
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if report is None:
        report = GenerationReport()
    allocate = fresh_id_allocator(aft)
    evaluated: set[tuple[str, str]] = set()

    while report.iterations < max_depth:
        report.iterations += 1
        events = [n.id for n in aft.attack_events()]
        for node in (aft.nodes[i] for i in events):
            _register_event(report, node)
        applied_any = False
        for event_id in events:
            event = aft.nodes[event_id]
            entry = report.events[event_id]
            ancestry = _event_ancestry(event)
            required = event.required_cia if event.required_cia is not None else ANY_TRIPLE
            matches: list[tuple[Fragment, MatchResult]] = []
            for fragment in fragments:
                key = (event_id, fragment.name)
                if key in evaluated:
                    continue
                if fragment.name in ancestry:
                    evaluated.add(key)
                    entry.suppressed.append(
                        {"fragment": fragment.name, "reason": "ANCESTRY"}
                    )
                    continue
                result = match_fragment(fragment, event, dataflow, deployment)
                evaluated.add(key)
                if result.bindings:
                    matches.append((fragment, result))
                else:
                    entry.fragments_rejected.append(
                        {"fragment": fragment.name, "reason": result.rejection}
                    )
            for fragment, result in matches:
                roots = apply_fragment(
                    aft, event_id, fragment, result.bindings,
                    allocate=allocate, ancestry=ancestry, required=required,
                )
                applied_any = True
                entry.resolved = True
                for root_id, binding in zip(roots, result.bindings):
                    entry.fragments_attached.append(
                        {
                            "fragment": fragment.name,
                            "binding": _binding_summary(binding),
                            "rootId": root_id,
                        }
                    )
        if not applied_any:
            break
    else:
        report.depth_exhausted = True
    # events introduced in the final iteration still belong in the report
    for node in aft.attack_events():
        _register_event(report, node)
    return report


def attach_attack_trees(
    aft: TreeModel,
    ats: list,
    dataflow: DataflowModel,
    deployment: DeploymentModel,
    report: GenerationReport | None = None,
) -> GenerationReport:
    if report is None:
        report = GenerationReport()
    allocate = fresh_id_allocator(aft)
    for event_id in [n.id for n in aft.attack_events()]:
        event = aft.nodes[event_id]
        entry = _register_event(report, event)
        required = event.required_cia if event.required_cia is not None else ANY_TRIPLE
        accepted = []
        # decide all candidates before the first attachment converts the event
        for at in ats:
            if not at_context_matches(event, at, dataflow, deployment):
                entry.ats_rejected.append(
                    {"name": at.name, "cveId": at.primary_cve_id, "reason": REJECT_CONTEXT}
                )
            elif not cia_satisfies(required, at.at_cia):
                entry.ats_rejected.append(
                    {"name": at.name, "cveId": at.primary_cve_id, "reason": REJECT_CIA}
                )
            else:
                accepted.append(at)
        for at in accepted:
            root_id = _instantiate_at(aft, at, allocate, required, event_id)
            _attach_subtree(aft, event_id, root_id, allocate)
            entry.resolved = True
            entry.ats_attached.append(
                {"name": at.name, "cveId": at.primary_cve_id,
                 "subject": at.subject_element_id, "rootId": root_id}
            )
    return report


def _instantiate_at(
    aft: TreeModel, at, allocate, required: CiaTriple, event_id: str
) -> str:
    id_map = {node.id: allocate() for node in at.tree.iter_preorder()}
    root_new = None
    for node in at.tree.iter_preorder():
        clone = TreeNode(
            id=id_map[node.id],
            label=node.label,
            kind=node.kind,
            gate=node.gate,
            children=[id_map[c] for c in node.children],
            ref=node.ref,
            required_cia=node.required_cia,
            cve_id=node.cve_id,
            cwe_id=node.cwe_id,
            cvss_vector=node.cvss_vector,
            provided_cia=node.provided_cia,
        )
        if root_new is None:
            root_new = clone.id
            clone.provenance = {
                "attachment": "at",
                "name": at.name,
                "cveId": at.primary_cve_id,
                "subject": at.subject_element_id,
                "provides": at.at_cia.format(),
                "eventRequired": required.format(),
                "eventId": event_id,
            }
        aft.nodes[clone.id] = clone
    assert root_new is not None
    return root_new


def generate_aft(
    ft: TreeModel,
    fragments: list[Fragment],
    ats: list,
    dataflow: DataflowModel,
    deployment: DeploymentModel,
    options: GenerationOptions | None = None,
) -> tuple[TreeModel, GenerationReport]:
    options = options or GenerationOptions()
    aft = copy_fault_tree(ft)
    report = fragment_phase(
        aft, fragments, dataflow, deployment, max_depth=options.max_depth
    )
    attach_attack_trees(aft, ats, dataflow, deployment, report=report)
    return aft, report


def audit_cia(aft: TreeModel) -> list[str]:
    """Post-hoc check: no attachment may violate its event's requirement.

    Works off the provenance recorded on every attachment root; returns a
    description per violation, empty when the AFT is clean.
    """
    violations = []
    for node in aft.nodes.values():
        p = node.provenance
        if not p or "attachment" not in p:
            continue
        required = CiaTriple.parse(p["eventRequired"])
        provided = CiaTriple.parse(p["provides"])
        if not cia_satisfies(required, provided):
            what = p.get("fragment") or p.get("name")
            violations.append(
                f"{node.id}: {what} provides {provided} but event {p['eventId']} "
                f"requires {required}"
            )
    return violations
