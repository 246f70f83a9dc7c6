"""Attack-tree generation from the vulnerability store.

One tree per CVSS-bearing CVE: the root OR gate is named after the
primary CVE's weakness category (falling back to the CVE id) and holds
the primary attack step; related CVEs found in the same result set are
chained in front of it with SAND (CanPrecede) or alongside it with AND
(PeerOf).  CVEs without a parsable CVSS vector cannot state an impact and
are dropped with a warning.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .cia import CiaTriple
from .cpeguess import PackageId, guess_cpe
from .errors import NoCvss, UnparsableCpe
from .model import DeploymentElement, DeploymentModel, ElementType
from .tree import GateType, NodeKind, TreeKind, TreeModel, TreeNode
from .vulndb.cpe import CpeName
from .vulndb.store import CveRecord, VulnStore

SCANNED_TYPES = (
    ElementType.PACKAGE,
    ElementType.LIBRARY,
    ElementType.FILE,
    ElementType.OS,
)

_FIRST_SENTENCE = re.compile(r"^(.*?\.)(?:\s|$)", re.DOTALL)


@dataclass(frozen=True)
class GeneratedAt:
    tree: TreeModel  # kind ATTACK_TREE
    subject_element_id: str
    subject_package_name: str
    name: str
    at_cia: CiaTriple
    primary_cve_id: str
    subject_cpe: CpeName | None = None

    def text_haystack(self) -> str:
        """Name, step descriptions and CPE fields, for context matching."""
        parts = [self.name]
        parts.extend(
            node.label for node in self.tree.iter_preorder() if node.kind is NodeKind.ATTACK_STEP
        )
        if self.subject_cpe is not None:
            parts.extend([self.subject_cpe.vendor, self.subject_cpe.product])
        return "\n".join(parts).lower()


@dataclass
class FindReport:
    by_element: dict[str, list[CveRecord]] = field(default_factory=dict)
    queried_cpe: dict[str, str] = field(default_factory=dict)  # element id -> CPE used
    warnings: list[str] = field(default_factory=list)


def find_vulnerabilities(deployment: DeploymentModel, store: VulnStore) -> FindReport:
    """CVE records per scannable deployment element.

    Elements with an assigned or guessable CPE are queried by CPE; the
    rest fall back to full-text search over descriptions.
    """
    report = FindReport()
    for element in deployment.elements:
        if element.type not in SCANNED_TYPES:
            continue
        query = _query_cpe_for(element, store, report)
        if query is not None:
            records = store.query_by_cpe(query)
            report.queried_cpe[element.id] = query.format()
        else:
            records = store.search_fulltext(element.name, element.version)
        kept = []
        for record in records:
            if record.impact is None:
                report.warnings.append(
                    f"{element.id}: dropped {record.cve_id} (no parsable CVSS vector)"
                )
                continue
            kept.append(record)
        report.by_element[element.id] = sorted(kept, key=lambda r: r.cve_id)
    return report


def _query_cpe_for(
    element: DeploymentElement, store: VulnStore, report: FindReport
) -> CpeName | None:
    version = element.version or element.properties.get("version") or "*"
    if element.cpe:
        try:
            assigned = CpeName.parse(element.cpe)
        except UnparsableCpe:
            report.warnings.append(f"{element.id}: unparsable CPE {element.cpe!r}")
            return None
        if assigned.version == "*" and version != "*":
            return CpeName(part=assigned.part, vendor=assigned.vendor,
                           product=assigned.product, version=version)
        return assigned
    guesses = guess_cpe(PackageId(name=element.name, version=element.version),
                        store.cpe_dictionary)
    if not guesses:
        return None
    top = guesses[0]
    return CpeName(part=top.part, vendor=top.vendor, product=top.product, version=version)


def generate_attack_trees(
    element_id: str,
    cves: list[CveRecord],
    store: VulnStore,
    subject_name: str | None = None,
    subject_cpe: CpeName | None = None,
) -> list[GeneratedAt]:
    """One attack tree per CVE, chained with its relatives in the input set."""
    ordered = sorted(cves, key=lambda r: r.cve_id)
    out = []
    for primary in ordered:
        if primary.impact is None:
            raise NoCvss(f"{primary.cve_id} has no parsed impact")
        out.append(
            _generate_single(element_id, primary, ordered, store, subject_name, subject_cpe)
        )
    return out


def _primary_cwe(record: CveRecord, store: VulnStore) -> str | None:
    for cwe_id in record.cwe_ids:
        if store.has_cwe(cwe_id):
            return cwe_id
    return record.cwe_ids[0] if record.cwe_ids else None


def _step_label(record: CveRecord) -> str:
    match = _FIRST_SENTENCE.match(record.description.strip())
    if match:
        return match.group(1)
    return record.description.strip() or record.cve_id


def _generate_single(
    element_id: str,
    primary: CveRecord,
    all_cves: list[CveRecord],
    store: VulnStore,
    subject_name: str | None,
    subject_cpe: CpeName | None,
) -> GeneratedAt:
    primary_cwe = _primary_cwe(primary, store)
    name = primary.cve_id
    if primary_cwe is not None:
        cwe_name = store.cwe_name(primary_cwe)
        if cwe_name:
            name = cwe_name

    nodes: dict[str, TreeNode] = {}
    clone_counter = 0

    def step_node(record: CveRecord) -> str:
        nonlocal clone_counter
        node_id = record.cve_id
        if node_id in nodes:
            clone_counter += 1
            node_id = f"{record.cve_id}.{clone_counter + 1}"
        nodes[node_id] = TreeNode(
            id=node_id,
            label=_step_label(record),
            kind=NodeKind.ATTACK_STEP,
            cve_id=record.cve_id,
            cwe_id=_primary_cwe(record, store),
            cvss_vector=record.cvss_vector,
            provided_cia=record.impact,
        )
        return node_id

    root = TreeNode(id="root", label=name, kind=NodeKind.GATE, gate=GateType.OR)
    nodes[root.id] = root
    root.children.append(step_node(primary))

    gate_counter = 0
    for other in all_cves:
        if other.cve_id == primary.cve_id or other.impact is None:
            continue
        other_cwe = _primary_cwe(other, store)
        if primary_cwe is None or other_cwe is None:
            continue
        if not (store.has_cwe(other_cwe) and store.has_cwe(primary_cwe)):
            continue
        relation = store.cwe_chain_related(other_cwe, primary_cwe)
        if relation == "CanPrecede":
            gate_counter += 1
            gate = TreeNode(
                id=f"chain{gate_counter}",
                label=f"{other.cve_id} then {primary.cve_id}",
                kind=NodeKind.GATE,
                gate=GateType.SAND,
                children=[step_node(other), step_node(primary)],
            )
            nodes[gate.id] = gate
            root.children.append(gate.id)
        elif relation == "PeerOf":
            gate_counter += 1
            gate = TreeNode(
                id=f"chain{gate_counter}",
                label=f"{other.cve_id} with {primary.cve_id}",
                kind=NodeKind.GATE,
                gate=GateType.AND,
                children=[step_node(other), step_node(primary)],
            )
            nodes[gate.id] = gate
            root.children.append(gate.id)

    tree = TreeModel(kind=TreeKind.ATTACK_TREE, name=name, root_id=root.id, nodes=nodes)
    return GeneratedAt(
        tree=tree,
        subject_element_id=element_id,
        subject_package_name=subject_name if subject_name is not None else element_id,
        name=name,
        at_cia=primary.impact,
        primary_cve_id=primary.cve_id,
        subject_cpe=subject_cpe,
    )


def generate_for_deployment(
    deployment: DeploymentModel, store: VulnStore
) -> tuple[list[GeneratedAt], FindReport]:
    """Find vulnerabilities and generate trees for every scannable element."""
    report = find_vulnerabilities(deployment, store)
    ats = []
    for element_id in sorted(report.by_element):
        cves = report.by_element[element_id]
        if not cves:
            continue
        element = deployment.elements_by_id[element_id]
        cpe_text = report.queried_cpe.get(element_id)
        cpe = CpeName.parse(cpe_text) if cpe_text else None
        ats.extend(
            generate_attack_trees(element_id, cves, store, element.name, cpe)
        )
    return ats, report


# --- file emission / ingestion ----------------------------------------------


def at_filename(at: GeneratedAt) -> str:
    safe_subject = at.subject_element_id.replace("/", "_")
    return f"{safe_subject}__{at.primary_cve_id}.at"


def write_attack_trees(ats: list[GeneratedAt], directory: str) -> list[str]:
    from .io.tree_dsl import print_tree_dsl

    os.makedirs(directory, exist_ok=True)
    written = []
    for at in ats:
        path = os.path.join(directory, at_filename(at))
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(print_tree_dsl(at.tree))
        written.append(path)
    return written


def read_attack_trees(directory: str, deployment: DeploymentModel) -> list[GeneratedAt]:
    """Rebuild GeneratedAt values from emitted .at files.

    The filename carries the subject element and primary CVE; the impact
    is recovered from the primary step inside the tree.
    """
    from .io.tree_dsl import parse_tree_dsl
    from .errors import SchemaError

    # filenames carry '/'-sanitized element ids; map them back
    unsanitize = {e.id.replace("/", "_"): e.id for e in deployment.elements}

    out = []
    for filename in sorted(os.listdir(directory)):
        if not filename.endswith(".at"):
            continue
        stem = filename[: -len(".at")]
        subject, sep, primary_cve = stem.rpartition("__")
        if not sep:
            raise SchemaError(f"{filename}: expected <element>__<cveId>.at")
        subject = unsanitize.get(subject, subject)
        with open(os.path.join(directory, filename), encoding="utf-8") as handle:
            tree = parse_tree_dsl(handle.read())
        if not isinstance(tree, TreeModel) or tree.kind is not TreeKind.ATTACK_TREE:
            raise SchemaError(f"{filename}: not an attack tree document")
        impact = None
        for node in tree.iter_preorder():
            if node.kind is NodeKind.ATTACK_STEP and node.cve_id == primary_cve:
                impact = node.provided_cia
                break
        if impact is None:
            raise SchemaError(f"{filename}: no step for primary CVE {primary_cve}")
        element = deployment.elements_by_id.get(subject)
        subject_cpe = None
        if element is not None and element.cpe:
            try:
                subject_cpe = CpeName.parse(element.cpe)
            except UnparsableCpe:
                subject_cpe = None
        out.append(
            GeneratedAt(
                tree=tree,
                subject_element_id=subject,
                subject_package_name=element.name if element else subject,
                name=tree.name,
                at_cia=impact,
                primary_cve_id=primary_cve,
                subject_cpe=subject_cpe,
            )
        )
    return out
