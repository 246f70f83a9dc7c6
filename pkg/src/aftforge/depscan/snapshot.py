"""Parsing of captured system-inspection snapshots.

A snapshot is a directory written by a capture script on the target
machine (the capture script itself lives in tools/, not here)::

    components.json          component name -> {"pid": int, "host": str}
    lsof/<pid>.txt           verbatim `lsof -p <pid>` output
    ldd/<encoded-path>.txt   verbatim `ldd <path>` output; the path is
                             encoded by replacing every '/' with '__'
    packages/dpkg-l.txt      `dpkg -l` output (Ubuntu/Debian)
    packages/portage.txt     installed-package list `category/name-version`
    packages/file-owners.txt lines `package: /absolute/path`

Everything here degrades gracefully: a missing ldd capture only loses
deeper dependency edges, malformed lines become warnings.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

from ..errors import MissingManifest, SchemaError

# ldd lines look like:   libm.so.6 => /lib/x86_64-linux-gnu/libm.so.6 (0x00007f...)
_LDD_RESOLVED = re.compile(r"^\s*(\S+)\s*=>\s*(\/\S+)\s*\(0x[0-9a-fA-F]+\)\s*$")
_LDD_NOT_FOUND = re.compile(r"^\s*(\S+)\s*=>\s*not found\s*$")
# portage: category/name-version where the version starts with a digit
_PORTAGE_LINE = re.compile(r"^(?:[\w+.-]+/)?([\w+.-]+?)-(\d[\w.+-]*)$")


@dataclass
class ComponentCapture:
    name: str
    pid: int
    host: str
    open_files: list[str] = field(default_factory=list)


@dataclass
class Inventory:
    components: list[ComponentCapture]
    resolved_libraries: dict[str, list[str]]  # binary/library path -> resolved paths
    file_owner: dict[str, str]  # file path -> package name
    package_version: dict[str, str]  # package name -> version
    package_source: str  # "dpkg" or "portage" or "none"
    warnings: list[str] = field(default_factory=list)


def parse_snapshot(directory: str) -> Inventory:
    manifest_path = os.path.join(directory, "components.json")
    if not os.path.isfile(manifest_path):
        raise MissingManifest(f"{directory}: no components.json")
    with open(manifest_path, encoding="utf-8") as handle:
        try:
            manifest = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"components.json: {exc}") from None
    if not isinstance(manifest, dict):
        raise SchemaError("components.json must map component names to {pid, host}")

    warnings: list[str] = []
    components = []
    for name in sorted(manifest):
        item = manifest[name]
        if not isinstance(item, dict) or "pid" not in item or "host" not in item:
            raise SchemaError(f"components.json: entry {name!r} needs 'pid' and 'host'")
        capture = ComponentCapture(name=name, pid=int(item["pid"]), host=str(item["host"]))
        lsof_path = os.path.join(directory, "lsof", f"{capture.pid}.txt")
        if os.path.isfile(lsof_path):
            capture.open_files = _parse_lsof(lsof_path, warnings)
        else:
            warnings.append(f"{name}: no lsof capture for pid {capture.pid}")
        components.append(capture)

    resolved = {}
    ldd_dir = os.path.join(directory, "ldd")
    if os.path.isdir(ldd_dir):
        for filename in sorted(os.listdir(ldd_dir)):
            if not filename.endswith(".txt"):
                continue
            subject = filename[: -len(".txt")].replace("__", "/")
            resolved[subject] = _parse_ldd(os.path.join(ldd_dir, filename), subject, warnings)

    file_owner = {}
    owners_path = os.path.join(directory, "packages", "file-owners.txt")
    if os.path.isfile(owners_path):
        file_owner = _parse_file_owners(owners_path, warnings)

    package_version: dict[str, str] = {}
    source = "none"
    dpkg_path = os.path.join(directory, "packages", "dpkg-l.txt")
    portage_path = os.path.join(directory, "packages", "portage.txt")
    if os.path.isfile(dpkg_path):
        package_version = _parse_dpkg(dpkg_path, warnings)
        source = "dpkg"
    elif os.path.isfile(portage_path):
        package_version = _parse_portage(portage_path, warnings)
        source = "portage"

    return Inventory(
        components=components,
        resolved_libraries=resolved,
        file_owner=file_owner,
        package_version=package_version,
        package_source=source,
        warnings=warnings,
    )


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8", errors="replace") as handle:
        return [line.rstrip("\r\n") for line in handle]


def _parse_lsof(path: str, warnings: list[str]) -> list[str]:
    """Keep regular-file rows with absolute NAME paths.

    Column layout: COMMAND PID USER FD TYPE DEVICE SIZE/OFF [NODE] NAME;
    the NAME is everything from the first '/'-initial column onwards, so
    paths containing spaces survive.
    """
    out: list[str] = []
    for line in _read_lines(path):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 6 or parts[4] != "REG":
            continue
        name_index = None
        for index in range(5, len(parts)):
            if parts[index].startswith("/"):
                name_index = index
                break
        if name_index is None:
            warnings.append(f"lsof: REG row without an absolute path: {line!r}")
            continue
        file_path = " ".join(parts[name_index:])
        if file_path not in out:
            out.append(file_path)
    return out


def _parse_ldd(path: str, subject: str, warnings: list[str]) -> list[str]:
    out: list[str] = []
    for line in _read_lines(path):
        if not line.strip():
            continue
        if "linux-vdso" in line or "linux-gate" in line:
            continue
        missing = _LDD_NOT_FOUND.match(line)
        if missing:
            warnings.append(f"ldd {subject}: {missing.group(1)} not found")
            continue
        resolved = _LDD_RESOLVED.match(line)
        if resolved:
            target = resolved.group(2)
            if target not in out:
                out.append(target)
    return out


def _parse_file_owners(path: str, warnings: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in _read_lines(path):
        if not line.strip():
            continue
        package, sep, file_path = line.partition(":")
        file_path = file_path.strip()
        if not sep or not file_path.startswith("/"):
            warnings.append(f"file-owners: unparsable line {line!r}")
            continue
        out[file_path] = package.strip()
    return out


def _parse_dpkg(path: str, warnings: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in _read_lines(path):
        parts = line.split()
        if len(parts) < 3 or parts[0] != "ii":
            continue
        name = parts[1].split(":")[0]  # drop :amd64 style arch qualifiers
        out[name] = parts[2]
    return out


def _parse_portage(path: str, warnings: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in _read_lines(path):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        match = _PORTAGE_LINE.match(line)
        if not match:
            warnings.append(f"portage: unparsable line {line!r}")
            continue
        out[match.group(1)] = match.group(2)
    return out
