"""Command-line entry point.

Every pipeline stage is a subcommand over files, so hand-written models
can be injected between any two stages:

    aftforge db import nvd-page.json ...
    aftforge db cwe cwe-relations.json
    aftforge db cpe-dict official-cpe-dictionary.txt
    aftforge cpe guess libssl1.1 --version 1.1.1f
    aftforge scan parse snapshot/ --dataflow dataflow.json -o deployment.json
    aftforge atgen --deployment deployment.json -o ats/
    aftforge aftgen --ft injury.ft --ats ats/ --dataflow dataflow.json \
                    --deployment deployment.json -o injury.aft --report report.json
    aftforge export dot injury.aft -o injury.dot
    aftforge analyze cutsets injury.aft
    aftforge validate dataflow.json deployment.json injury.ft

Exit codes: 0 success, 1 validation/parse errors, 2 usage errors.
Diagnostics go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .aftgen.fragments import builtin_catalog
from .aftgen.generate import GenerationOptions, generate_aft
from .analysis import DEFAULT_CUT_SET_CAP, attack_paths, minimal_cut_sets
from .atgen import generate_for_deployment, read_attack_trees, write_attack_trees
from .cpeguess import PackageId, guess_cpe
from .depscan.build import build_deployment
from .depscan.snapshot import parse_snapshot
from .errors import AftforgeError, ValidationError
from .io.dot import export_dot
from .io.models_json import dump_deployment, parse_dataflow, parse_deployment
from .io.tree_dsl import parse_tree_dsl, print_tree_dsl
from .tree import TreeKind, TreeModel
from .validate import ERROR, validate, validate_tree_refs
from .vulndb.store import VulnStore

DEFAULT_STORE = "aftforge-store.json"


def _store_path(args) -> str:
    if getattr(args, "store", None):
        return args.store
    return os.environ.get("AFTFORGE_STORE", DEFAULT_STORE)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _load_tree(path: str, expected: tuple[TreeKind, ...]) -> TreeModel:
    tree = parse_tree_dsl(_read(path))
    if not isinstance(tree, TreeModel) or tree.kind not in expected:
        names = " or ".join(k.value for k in expected)
        raise AftforgeError(f"{path}: expected a {names} document")
    return tree


def _load_fragments(args) -> list:
    fragments = [] if getattr(args, "no_builtin", False) else builtin_catalog()
    directory = getattr(args, "fragments", None)
    if directory:
        for filename in sorted(os.listdir(directory)):
            if filename.endswith(".fragment"):
                fragment = parse_tree_dsl(_read(os.path.join(directory, filename)))
                fragments.append(fragment)
    return fragments


# --- subcommand handlers ----------------------------------------------------


def _cmd_db_import(args) -> int:
    store = VulnStore.load_or_create(_store_path(args))
    pages = []
    for path in args.files:
        try:
            pages.append(json.loads(_read(path)))
        except json.JSONDecodeError as exc:
            raise AftforgeError(f"{path}: {exc}") from None
    stats = store.import_nvd(pages)
    store.save(_store_path(args))
    for warning in stats.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"imported {stats.imported} records ({stats.changed} changed, "
        f"{stats.no_cvss} without CVSS, {stats.skipped} skipped)",
        file=sys.stderr,
    )
    return 0


def _cmd_db_cwe(args) -> int:
    store = VulnStore.load_or_create(_store_path(args))
    try:
        catalog = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise AftforgeError(f"{args.file}: {exc}") from None
    stats = store.import_cwe(catalog)
    store.save(_store_path(args))
    for warning in stats.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"imported {stats.imported} CWE entries", file=sys.stderr)
    return 0


def _cmd_db_cpe_dict(args) -> int:
    store = VulnStore.load_or_create(_store_path(args))
    stats = store.set_cpe_dictionary(_read(args.file).splitlines())
    store.save(_store_path(args))
    print(f"loaded {stats.imported} dictionary CPEs", file=sys.stderr)
    return 0


def _cmd_cpe_guess(args) -> int:
    store = VulnStore.load_or_create(_store_path(args))
    guesses = guess_cpe(PackageId(name=args.name, version=args.version), store.cpe_dictionary)
    for cpe in guesses:
        print(cpe.format())
    if not guesses:
        print(f"no dictionary CPE matches {args.name!r}", file=sys.stderr)
    return 0


def _cmd_scan_parse(args) -> int:
    dataflow = parse_dataflow(_read(args.dataflow))
    inventory = parse_snapshot(args.snapshot_dir)
    model = build_deployment(inventory, dataflow)
    for warning in model.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _write(args.output, dump_deployment(model))
    return 0


def _cmd_atgen(args) -> int:
    store = VulnStore.load_or_create(_store_path(args))
    deployment = parse_deployment(_read(args.deployment))
    ats, report = generate_for_deployment(deployment, store)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    written = write_attack_trees(ats, args.output)
    print(f"generated {len(written)} attack trees in {args.output}", file=sys.stderr)
    return 0


def _cmd_aftgen(args) -> int:
    for out_path in (args.output, args.report):
        if out_path and out_path != "-":
            parent = os.path.dirname(os.path.abspath(out_path))
            if not os.path.isdir(parent):
                raise AftforgeError(f"output directory does not exist: {parent}")
    ft = _load_tree(args.ft, (TreeKind.FAULT_TREE,))
    dataflow = parse_dataflow(_read(args.dataflow))
    deployment = parse_deployment(_read(args.deployment))
    ref_problems = validate_tree_refs(ft, dataflow, deployment)
    if ref_problems:
        raise ValidationError(ref_problems)
    fragments = _load_fragments(args)
    ats = read_attack_trees(args.ats, deployment) if args.ats else []
    aft, report = generate_aft(
        ft, fragments, ats, dataflow, deployment,
        GenerationOptions(max_depth=args.max_depth),
    )
    report.config = {
        "ft": args.ft,
        "dataflow": args.dataflow,
        "deployment": args.deployment,
        "ats": args.ats,
        "fragments": args.fragments,
        "builtinCatalog": not args.no_builtin,
        "maxDepth": args.max_depth,
        "output": args.output,
    }
    _write(args.output, print_tree_dsl(aft))
    if args.report:
        _write(args.report, report.to_json())
    unresolved = report.unresolved
    if unresolved:
        print(f"{len(unresolved)} attack events left unresolved", file=sys.stderr)
    return 0


def _cmd_export_dot(args) -> int:
    tree = _load_tree(args.tree, (TreeKind.AFT, TreeKind.FAULT_TREE, TreeKind.ATTACK_TREE))
    _write(args.output, export_dot(tree))
    return 0


def _cmd_analyze_cutsets(args) -> int:
    tree = _load_tree(args.tree, (TreeKind.AFT, TreeKind.FAULT_TREE, TreeKind.ATTACK_TREE))
    cut_sets = minimal_cut_sets(tree, cap=args.cap)
    if args.json:
        doc = {"cutSets": [sorted(s) for s in cut_sets]}
        print(json.dumps(doc, indent=2))
    else:
        print(f"{len(cut_sets)} minimal cut sets")
        for cut_set in cut_sets:
            labels = ", ".join(
                f"{node_id} ({tree.nodes[node_id].label})" for node_id in sorted(cut_set)
            )
            print(f"  {{{labels}}}")
    return 0


def _cmd_analyze_paths(args) -> int:
    tree = _load_tree(args.tree, (TreeKind.AFT, TreeKind.FAULT_TREE, TreeKind.ATTACK_TREE))
    paths = attack_paths(tree, cap=args.cap)
    if args.json:
        print(json.dumps({"attackPaths": [list(p) for p in paths]}, indent=2))
    else:
        print(f"{len(paths)} attack paths")
        for path in paths:
            print("  " + " -> ".join(path))
    return 0


def _cmd_validate(args) -> int:
    failed = False
    for path in args.files:
        try:
            diagnostics = _validate_file(path)
        except AftforgeError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            failed = True
            continue
        for diagnostic in diagnostics:
            print(f"{path}: {diagnostic}", file=sys.stderr)
        if any(d.severity == ERROR for d in diagnostics):
            failed = True
        else:
            print(f"{path}: ok")
    return 1 if failed else 0


def _validate_file(path: str):
    text = _read(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if "components" in doc:
            model = parse_dataflow(text)
            return validate(dataflow=model)
        if "elements" in doc:
            model = parse_deployment(text)
            return validate(deployment=model)
        raise AftforgeError("JSON document is neither a dataflow nor a deployment model")
    parsed = parse_tree_dsl(text)
    if isinstance(parsed, TreeModel):
        return validate(trees=(parsed,))
    return []  # fragments are checked during parsing


# --- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aftforge", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument("--store", help="store file (default: $AFTFORGE_STORE or ./aftforge-store.json)")

    db = sub.add_parser("db", help="manage the local vulnerability store")
    db_sub = db.add_subparsers(dest="db_command", required=True)
    p = db_sub.add_parser("import", help="import NVD API 2.0 JSON pages")
    p.add_argument("files", nargs="+")
    add_store(p)
    p.set_defaults(handler=_cmd_db_import)
    p = db_sub.add_parser("cwe", help="import the CWE relations catalog")
    p.add_argument("file")
    add_store(p)
    p.set_defaults(handler=_cmd_db_cwe)
    p = db_sub.add_parser("cpe-dict", help="load the CPE dictionary")
    p.add_argument("file")
    add_store(p)
    p.set_defaults(handler=_cmd_db_cpe_dict)

    cpe = sub.add_parser("cpe", help="CPE utilities")
    cpe_sub = cpe.add_subparsers(dest="cpe_command", required=True)
    p = cpe_sub.add_parser("guess", help="guess dictionary CPEs for a package name")
    p.add_argument("name")
    p.add_argument("--version")
    add_store(p)
    p.set_defaults(handler=_cmd_cpe_guess)

    scan = sub.add_parser("scan", help="system snapshot processing")
    scan_sub = scan.add_subparsers(dest="scan_command", required=True)
    p = scan_sub.add_parser("parse", help="build a deployment model from a snapshot")
    p.add_argument("snapshot_dir")
    p.add_argument("--dataflow", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_scan_parse)

    p = sub.add_parser("atgen", help="generate attack trees for deployment elements")
    p.add_argument("--deployment", required=True)
    p.add_argument("-o", "--output", required=True, help="output directory for .at files")
    add_store(p)
    p.set_defaults(handler=_cmd_atgen)

    p = sub.add_parser("aftgen", help="generate an AFT from a fault tree")
    p.add_argument("--ft", required=True)
    p.add_argument("--fragments", help="directory of extra .fragment files")
    p.add_argument("--no-builtin", action="store_true", help="skip the built-in fragment catalog")
    p.add_argument("--ats", help="directory of generated .at files")
    p.add_argument("--dataflow", required=True)
    p.add_argument("--deployment", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", help="write the generation report as JSON")
    p.add_argument("--max-depth", type=int, default=5)
    p.set_defaults(handler=_cmd_aftgen)

    export = sub.add_parser("export", help="export trees to other formats")
    export_sub = export.add_subparsers(dest="export_command", required=True)
    p = export_sub.add_parser("dot", help="Graphviz DOT")
    p.add_argument("tree")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=_cmd_export_dot)

    analyze = sub.add_parser("analyze", help="deterministic analysis")
    analyze_sub = analyze.add_subparsers(dest="analyze_command", required=True)
    p = analyze_sub.add_parser("cutsets", help="minimal cut sets")
    p.add_argument("tree")
    p.add_argument("--cap", type=int, default=DEFAULT_CUT_SET_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_analyze_cutsets)
    p = analyze_sub.add_parser("paths", help="ordered attack paths")
    p.add_argument("tree")
    p.add_argument("--cap", type=int, default=DEFAULT_CUT_SET_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_analyze_paths)

    p = sub.add_parser("validate", help="validate model and tree files")
    p.add_argument("files", nargs="+")
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except AftforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
