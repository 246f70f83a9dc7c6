"""Loose version comparison for package and CPE version strings.

Versions are split on '.', '-' and '_'; segments compare numerically when
both sides are numeric and lexicographically otherwise, with the shorter
version padded with zero segments.  This handles the common numeric case
(2.1.1 < 2.3.0) and degrades predictably on alphanumeric tails.
"""

from __future__ import annotations

import re

_SEPARATORS = re.compile(r"[._-]")


def version_segments(version: str) -> list[str]:
    return [s for s in _SEPARATORS.split(version.strip()) if s != ""]


def _compare_segment(a: str, b: str) -> int:
    if a.isdigit() and b.isdigit():
        na, nb = int(a), int(b)
        return (na > nb) - (na < nb)
    la, lb = a.lower(), b.lower()
    return (la > lb) - (la < lb)


def compare_versions(a: str, b: str) -> int:
    """-1, 0 or 1 as a <, ==, > b."""
    sa, sb = version_segments(a), version_segments(b)
    length = max(len(sa), len(sb))
    sa += ["0"] * (length - len(sa))
    sb += ["0"] * (length - len(sb))
    for xa, xb in zip(sa, sb):
        result = _compare_segment(xa, xb)
        if result != 0:
            return result
    return 0


def version_lt(a: str, b: str) -> bool:
    return compare_versions(a, b) < 0


def version_le(a: str, b: str) -> bool:
    return compare_versions(a, b) <= 0


def version_eq(a: str, b: str) -> bool:
    return compare_versions(a, b) == 0
