from .cpe import CpeName
from .cvss import CvssVector, parse_cvss_vector
from .store import CpeMatch, CveRecord, CweEntry, CweRelation, ImportStats, VulnStore
from .versions import compare_versions

__all__ = [
    "CpeMatch",
    "CpeName",
    "CveRecord",
    "CvssVector",
    "CweEntry",
    "CweRelation",
    "ImportStats",
    "VulnStore",
    "compare_versions",
    "parse_cvss_vector",
]
