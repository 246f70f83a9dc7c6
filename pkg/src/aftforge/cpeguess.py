"""Heuristic mapping from OS package names to dictionary CPE names.

The heuristics deliberately stay cheap and explainable: lowercase, strip
distro suffixes and embedded version/soname tails, offer the bare stem of
lib-prefixed names, and try hyphen/underscore spellings.  Candidates are
matched against the dictionary exact-product first, substring second; the
module never fabricates a CPE that is not in the dictionary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .vulndb.cpe import CpeName
from .vulndb.versions import compare_versions, version_eq

DISTRO_SUFFIXES = ("-dev", "-dbg", "-doc", "-common")

_TRAILING_VERSION = re.compile(r"^(.*?[a-z])[\d.]+$")
_DASHED_VERSION = re.compile(r"^(.+?)[-_]\d[\w.]*$")


class PackageSource(Enum):
    DPKG = "dpkg"
    APT = "apt"
    PORTAGE = "portage"
    MANUAL = "manual"


@dataclass(frozen=True)
class PackageId:
    name: str
    version: str | None = None
    source: PackageSource = PackageSource.MANUAL


def normalize_package(name: str) -> list[str]:
    """Ordered candidate tokens for a package name, most specific first."""
    out: list[str] = []

    def add(candidate: str) -> None:
        if not candidate:
            return
        for variant in (candidate, candidate.replace("-", "_"), candidate.replace("_", "-")):
            if variant and variant not in out:
                out.append(variant)

    base = name.lower().split(":")[0]  # drop :any / :amd64 arch qualifiers
    add(base)

    stripped = base
    for suffix in DISTRO_SUFFIXES:
        if stripped.endswith(suffix):
            stripped = stripped[: -len(suffix)]
            break
    add(stripped)

    dashed = _DASHED_VERSION.match(stripped)
    if dashed:
        stripped = dashed.group(1)
        add(stripped)
    trailing = _TRAILING_VERSION.match(stripped)
    if trailing:
        stripped = trailing.group(1)
        add(stripped)

    if stripped.startswith("lib") and len(stripped) > 3:
        add(stripped[3:])
    return out


def guess_cpe(pkg: PackageId, dictionary: tuple[CpeName, ...]) -> list[CpeName]:
    """Ranked dictionary CPEs for a package; empty when nothing matches."""
    candidates = normalize_package(pkg.name)
    best: dict[tuple[str, str], tuple] = {}  # (vendor, product) -> (rank key, cpe)
    for entry in dictionary:
        product = entry.product.lower()
        hit = None
        for token_index, token in enumerate(candidates):
            if product == token:
                hit = (0, token_index)
                break
            if token in product and hit is None:
                hit = (1, token_index)
        if hit is None:
            continue
        tier, token_index = hit
        version_bonus = 0
        if pkg.version and entry.version not in ("*", "-") and version_eq(pkg.version, entry.version):
            version_bonus = 1
        key = (tier, token_index, -version_bonus, entry.vendor.lower(), product)
        group = (entry.vendor.lower(), product)
        current = best.get(group)
        if current is None or key < current[0] or (
            key == current[0] and _prefer_version(entry, current[1], pkg.version)
        ):
            best[group] = (key, entry)
    ranked = sorted(best.values(), key=lambda item: item[0])
    return [entry for _, entry in ranked]


def _prefer_version(candidate: CpeName, incumbent: CpeName, version: str | None) -> bool:
    """Within a (vendor, product) group: exact version, then '*', then lowest."""
    def score(entry: CpeName) -> int:
        if version and entry.version not in ("*", "-") and version_eq(version, entry.version):
            return 0
        if entry.version == "*":
            return 1
        return 2

    sc, si = score(candidate), score(incumbent)
    if sc != si:
        return sc < si
    if sc == 2:
        return compare_versions(candidate.version, incumbent.version) < 0
    return False
