"""CVSS vector parsing, reduced to the impact triad.

v3.x impact metrics map N -> NEUTRAL, L -> LOW, H -> HIGH; v2 maps
N -> NEUTRAL, P (partial) -> LOW, C (complete) -> HIGH.  The full metric
map is retained alongside the triple.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..cia import CiaLevel, CiaTriple
from ..errors import UnparsableVector

_V3_IMPACT = {"N": CiaLevel.NEUTRAL, "L": CiaLevel.LOW, "H": CiaLevel.HIGH}
_V2_IMPACT = {"N": CiaLevel.NEUTRAL, "P": CiaLevel.LOW, "C": CiaLevel.HIGH}


@dataclass(frozen=True)
class CvssVector:
    raw: str
    version: str  # "3.1", "3.0", "2.0"
    metrics: dict[str, str]
    impact: CiaTriple


def parse_cvss_vector(text: str) -> CvssVector:
    raw = text.strip()
    body = raw.strip("()")
    if not body:
        raise UnparsableVector("empty CVSS vector")

    version = "2.0"
    if body.upper().startswith("CVSS:"):
        prefix, _, rest = body.partition("/")
        version = prefix[5:]
        if not version.startswith(("2", "3")):
            raise UnparsableVector(f"unsupported CVSS version {version!r}")
        body = rest

    metrics: dict[str, str] = {}
    for part in body.split("/"):
        if not part:
            continue
        key, sep, value = part.partition(":")
        if not sep or not key or not value:
            raise UnparsableVector(f"malformed metric {part!r} in {raw!r}")
        metrics[key] = value

    table = _V3_IMPACT if version.startswith("3") else _V2_IMPACT
    levels = []
    for aspect in ("C", "I", "A"):
        value = metrics.get(aspect)
        if value is None:
            raise UnparsableVector(f"vector {raw!r} lacks the {aspect} metric")
        level = table.get(value.upper())
        if level is None:
            raise UnparsableVector(f"unknown {aspect} impact {value!r} in {raw!r}")
        levels.append(level)

    return CvssVector(raw=raw, version=version, metrics=metrics, impact=CiaTriple(*levels))
