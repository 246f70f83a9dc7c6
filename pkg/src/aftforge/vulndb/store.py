"""Local vulnerability cache: CVE records, the CWE relation graph and the
CPE dictionary, persisted as one JSON file.

Imports are transactional: changes are staged on copies and swapped in
under a lock, so concurrent readers never observe a half-imported
snapshot.  Re-importing the same snapshot is a no-op (records are keyed
and replaced by CVE id).
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field

from ..cia import CiaTriple
from ..errors import MalformedCatalog, MalformedFeed, UnknownCwe, UnparsableVector
from .cpe import CpeName
from .cvss import parse_cvss_vector
from .versions import version_eq, version_le, version_lt

_CVE_ID = re.compile(r"^CVE-\d{4}-\d{4,}$")
_CWE_ID = re.compile(r"^CWE-\d+$")
_TOKEN = re.compile(r"[a-z0-9]+")

STORE_FORMAT = 1


@dataclass(frozen=True)
class CpeMatch:
    criteria: str
    version_start_including: str | None = None
    version_start_excluding: str | None = None
    version_end_including: str | None = None
    version_end_excluding: str | None = None

    def admits_version(self, version: str) -> bool:
        """Does this criteria entry match the given concrete version?"""
        criteria = CpeName.parse(self.criteria)
        has_range = any(
            v is not None
            for v in (
                self.version_start_including,
                self.version_start_excluding,
                self.version_end_including,
                self.version_end_excluding,
            )
        )
        if version == "*":
            return criteria.version == "*" and not has_range
        if criteria.version not in ("*", "-") and not has_range:
            return version_eq(version, criteria.version)
        if self.version_start_including and not version_le(self.version_start_including, version):
            return False
        if self.version_start_excluding and not version_lt(self.version_start_excluding, version):
            return False
        if self.version_end_including and not version_le(version, self.version_end_including):
            return False
        if self.version_end_excluding and not version_lt(version, self.version_end_excluding):
            return False
        return True


@dataclass(frozen=True)
class CveRecord:
    cve_id: str
    description: str = ""
    cvss_vector: str | None = None
    impact: CiaTriple | None = None
    cwe_ids: tuple[str, ...] = ()
    cpe_matches: tuple[CpeMatch, ...] = ()


@dataclass(frozen=True)
class CweRelation:
    nature: str  # PeerOf, CanPrecede, ChildOf (CanFollow is normalized away)
    target: str


@dataclass(frozen=True)
class CweEntry:
    cwe_id: str
    name: str = ""
    relations: tuple[CweRelation, ...] = ()


@dataclass
class ImportStats:
    imported: int = 0
    changed: int = 0
    skipped: int = 0
    no_cvss: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "imported": self.imported,
            "changed": self.changed,
            "skipped": self.skipped,
            "noCvss": self.no_cvss,
            "warnings": list(self.warnings),
        }


def _field_matches(query: str, criteria: str) -> bool:
    if criteria == "*":
        return True
    if query == "*":
        return False
    return query.lower() == criteria.lower()


def cpe_query_matches(query: CpeName, match: CpeMatch) -> bool:
    """Field-wise wildcard match plus version-range admission."""
    criteria = CpeName.parse(match.criteria)
    for name in ("part", "vendor", "product", "update", "edition", "language",
                 "sw_edition", "target_sw", "target_hw", "other"):
        if not _field_matches(getattr(query, name), getattr(criteria, name)):
            return False
    return match.admits_version(query.version)


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


class VulnStore:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._cves: dict[str, CveRecord] = {}
        self._cwe: dict[str, CweEntry] = {}
        self._cpe_dictionary: tuple[CpeName, ...] = ()
        self._text_index: dict[str, set[str]] = {}

    # --- persistence ---------------------------------------------------

    @classmethod
    def load(cls, path: str) -> "VulnStore":
        store = cls()
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
        if not isinstance(doc, dict) or doc.get("format") != STORE_FORMAT:
            raise MalformedFeed(f"{path}: not an aftforge store file")
        cves = {}
        for cve_id, item in doc.get("cves", {}).items():
            matches = tuple(
                CpeMatch(
                    criteria=m["criteria"],
                    version_start_including=m.get("versionStartIncluding"),
                    version_start_excluding=m.get("versionStartExcluding"),
                    version_end_including=m.get("versionEndIncluding"),
                    version_end_excluding=m.get("versionEndExcluding"),
                )
                for m in item.get("cpeMatches", [])
            )
            vector = item.get("cvssVector")
            impact = None
            if vector is not None:
                impact = parse_cvss_vector(vector).impact
            cves[cve_id] = CveRecord(
                cve_id=cve_id,
                description=item.get("description", ""),
                cvss_vector=vector,
                impact=impact,
                cwe_ids=tuple(item.get("cweIds", [])),
                cpe_matches=matches,
            )
        cwe = {}
        for cwe_id, item in doc.get("cwe", {}).items():
            cwe[cwe_id] = CweEntry(
                cwe_id=cwe_id,
                name=item.get("name", ""),
                relations=tuple(
                    CweRelation(nature=r["nature"], target=r["target"])
                    for r in item.get("relations", [])
                ),
            )
        dictionary = tuple(CpeName.parse(line) for line in doc.get("cpeDictionary", []))
        store._cves = cves
        store._cwe = cwe
        store._cpe_dictionary = dictionary
        store._text_index = store._build_text_index(cves)
        return store

    @classmethod
    def load_or_create(cls, path: str) -> "VulnStore":
        if os.path.exists(path):
            return cls.load(path)
        return cls()

    def save(self, path: str) -> None:
        doc = {
            "format": STORE_FORMAT,
            "cves": {
                cve_id: self._record_to_json(record)
                for cve_id, record in sorted(self._cves.items())
            },
            "cwe": {
                cwe_id: {
                    "name": entry.name,
                    "relations": [
                        {"nature": r.nature, "target": r.target} for r in entry.relations
                    ],
                }
                for cwe_id, entry in sorted(self._cwe.items())
            },
            "cpeDictionary": [c.format() for c in self._cpe_dictionary],
        }
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".store-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(doc, handle, indent=1)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise

    @staticmethod
    def _record_to_json(record: CveRecord) -> dict:
        matches = []
        for m in record.cpe_matches:
            item: dict = {"criteria": m.criteria}
            if m.version_start_including:
                item["versionStartIncluding"] = m.version_start_including
            if m.version_start_excluding:
                item["versionStartExcluding"] = m.version_start_excluding
            if m.version_end_including:
                item["versionEndIncluding"] = m.version_end_including
            if m.version_end_excluding:
                item["versionEndExcluding"] = m.version_end_excluding
            matches.append(item)
        out: dict = {"description": record.description}
        if record.cvss_vector is not None:
            out["cvssVector"] = record.cvss_vector
        out["cweIds"] = list(record.cwe_ids)
        out["cpeMatches"] = matches
        return out

    @staticmethod
    def _build_text_index(cves: dict[str, CveRecord]) -> dict[str, set[str]]:
        index: dict[str, set[str]] = {}
        for cve_id, record in cves.items():
            for token in set(_tokens(record.description)):
                index.setdefault(token, set()).add(cve_id)
        return index

    # --- introspection ---------------------------------------------------

    @property
    def cve_count(self) -> int:
        return len(self._cves)

    def get(self, cve_id: str) -> CveRecord | None:
        return self._cves.get(cve_id)

    def records(self) -> list[CveRecord]:
        return [self._cves[k] for k in sorted(self._cves)]

    def cwe_entry(self, cwe_id: str) -> CweEntry | None:
        return self._cwe.get(cwe_id)

    def cwe_name(self, cwe_id: str) -> str | None:
        entry = self._cwe.get(cwe_id)
        return entry.name if entry and entry.name else None

    @property
    def cpe_dictionary(self) -> tuple[CpeName, ...]:
        return self._cpe_dictionary

    # --- imports ---------------------------------------------------------

    def import_nvd(self, pages: list[dict]) -> ImportStats:
        """Upsert every entry of the given NVD API 2.0 pages."""
        stats = ImportStats()
        staged = dict(self._cves)
        for page in pages:
            if not isinstance(page, dict) or not isinstance(page.get("vulnerabilities"), list):
                raise MalformedFeed("page has no 'vulnerabilities' array")
            for entry in page["vulnerabilities"]:
                try:
                    record = _parse_nvd_entry(entry)
                except (KeyError, TypeError, ValueError, AttributeError) as exc:
                    stats.skipped += 1
                    stats.warnings.append(f"skipped malformed entry: {exc}")
                    continue
                stats.imported += 1
                if record.cvss_vector is None:
                    stats.no_cvss += 1
                if staged.get(record.cve_id) != record:
                    stats.changed += 1
                staged[record.cve_id] = record
        staged_index = self._build_text_index(staged)
        with self._lock:
            self._cves = staged
            self._text_index = staged_index
        return stats

    def import_cwe(self, catalog) -> ImportStats:
        """Replace the relation graph from the simplified catalog format:
        [{"id": "CWE-426", "name": "...", "relations": [{"nature","target"}]}].
        CanFollow(a, b) is stored as CanPrecede(b, a); PeerOf is symmetric.
        """
        if not isinstance(catalog, list):
            raise MalformedCatalog("catalog must be a list of CWE entries")
        stats = ImportStats()

        # duplicate ids: the last entry wins entirely
        deduped: dict[str, dict] = {}
        for entry in catalog:
            try:
                cwe_id = _normalize_cwe_id(entry["id"])
            except (KeyError, TypeError) as exc:
                raise MalformedCatalog(f"bad CWE entry: {exc}") from None
            if cwe_id in deduped:
                stats.warnings.append(f"duplicate entry {cwe_id}, last one wins")
            deduped[cwe_id] = entry
            stats.imported += 1

        names: dict[str, str] = {}
        relations: dict[str, list[CweRelation]] = {}

        def add_relation(source: str, nature: str, target: str) -> None:
            rel = CweRelation(nature=nature, target=target)
            bucket = relations.setdefault(source, [])
            if rel not in bucket:
                bucket.append(rel)

        for cwe_id, entry in deduped.items():
            names[cwe_id] = entry.get("name", "")
            relations.setdefault(cwe_id, [])
            for rel in entry.get("relations", []):
                try:
                    nature = rel["nature"]
                    target = _normalize_cwe_id(rel["target"])
                except (KeyError, TypeError) as exc:
                    raise MalformedCatalog(f"bad relation on {cwe_id}: {exc}") from None
                if nature == "CanFollow":
                    add_relation(target, "CanPrecede", cwe_id)
                elif nature == "PeerOf":
                    add_relation(cwe_id, "PeerOf", target)
                    add_relation(target, "PeerOf", cwe_id)
                elif nature in ("CanPrecede", "ChildOf"):
                    add_relation(cwe_id, nature, target)
                else:
                    stats.warnings.append(f"{cwe_id}: ignored relation nature {nature!r}")

        staged = {
            cwe_id: CweEntry(
                cwe_id=cwe_id,
                name=names.get(cwe_id, ""),
                relations=tuple(relations.get(cwe_id, ())),
            )
            for cwe_id in set(names) | set(relations)
        }
        with self._lock:
            self._cwe = staged
        stats.changed = len(staged)
        return stats

    def set_cpe_dictionary(self, lines) -> ImportStats:
        stats = ImportStats()
        parsed = []
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parsed.append(CpeName.parse(line))
            stats.imported += 1
        with self._lock:
            self._cpe_dictionary = tuple(parsed)
        return stats

    # --- queries -----------------------------------------------------------

    def query_by_cpe(self, query: CpeName) -> list[CveRecord]:
        out = []
        for cve_id in sorted(self._cves):
            record = self._cves[cve_id]
            if any(cpe_query_matches(query, m) for m in record.cpe_matches):
                out.append(record)
        return out

    def search_fulltext(self, package_name: str, version: str | None = None) -> list[CveRecord]:
        """Token match of the package name against descriptions, ranked by
        matching token count (compatible-version mentions break ties),
        then by CVE id.
        """
        name_tokens = _tokens(package_name)
        if not name_tokens:
            return []
        counts: dict[str, int] = {}
        for token in set(name_tokens):
            for cve_id in self._text_index.get(token, ()):
                counts[cve_id] = counts.get(cve_id, 0) + 1
        ranked = []
        for cve_id, count in counts.items():
            record = self._cves[cve_id]
            bonus = 1 if version and self._mentions_version(record, version) else 0
            ranked.append((-count, -bonus, cve_id))
        ranked.sort()
        return [self._cves[key[2]] for key in ranked]

    @staticmethod
    def _mentions_version(record: CveRecord, version: str) -> bool:
        if any(m.admits_version(version) for m in record.cpe_matches):
            return True
        return version in record.description

    def cwe_chain_related(self, cwe_a: str, cwe_b: str) -> str | None:
        """The relation nature from a to b, if any, after normalization."""
        a, b = _normalize_cwe_id(cwe_a), _normalize_cwe_id(cwe_b)
        for cwe_id in (a, b):
            if cwe_id not in self._cwe:
                raise UnknownCwe(f"{cwe_id} is not in the relation graph")
        natures = {r.nature for r in self._cwe[a].relations if r.target == b}
        for nature in ("CanPrecede", "PeerOf", "ChildOf"):
            if nature in natures:
                return nature
        return None

    def has_cwe(self, cwe_id: str) -> bool:
        try:
            return _normalize_cwe_id(cwe_id) in self._cwe
        except MalformedCatalog:
            return False


def _normalize_cwe_id(value) -> str:
    if isinstance(value, int):
        return f"CWE-{value}"
    if isinstance(value, str):
        text = value.strip()
        if text.isdigit():
            return f"CWE-{text}"
        if _CWE_ID.match(text):
            return text
    raise MalformedCatalog(f"not a CWE id: {value!r}")


def _parse_nvd_entry(entry: dict) -> CveRecord:
    cve = entry["cve"]
    cve_id = cve["id"]
    if not _CVE_ID.match(cve_id):
        raise ValueError(f"not a CVE id: {cve_id!r}")

    description = ""
    for item in cve.get("descriptions", []):
        if item.get("lang") == "en":
            description = item["value"]
            break

    vector = None
    metrics = cve.get("metrics", {})
    for source in ("cvssMetricV31", "cvssMetricV30", "cvssMetricV2"):
        for metric in metrics.get(source, []):
            candidate = metric.get("cvssData", {}).get("vectorString")
            if candidate:
                try:
                    parse_cvss_vector(candidate)
                except UnparsableVector:
                    continue
                vector = candidate
                break
        if vector:
            break

    cwe_ids = []
    for weakness in cve.get("weaknesses", []):
        for item in weakness.get("description", []):
            value = item.get("value", "")
            if _CWE_ID.match(value) and value not in cwe_ids:
                cwe_ids.append(value)

    matches = []
    for configuration in cve.get("configurations", []):
        for node in _walk_config_nodes(configuration.get("nodes", [])):
            for m in node.get("cpeMatch", []):
                if m.get("vulnerable") is False:
                    continue
                criteria = m["criteria"]
                CpeName.parse(criteria)  # reject unparsable criteria early
                matches.append(
                    CpeMatch(
                        criteria=criteria,
                        version_start_including=m.get("versionStartIncluding"),
                        version_start_excluding=m.get("versionStartExcluding"),
                        version_end_including=m.get("versionEndIncluding"),
                        version_end_excluding=m.get("versionEndExcluding"),
                    )
                )

    impact = parse_cvss_vector(vector).impact if vector else None
    return CveRecord(
        cve_id=cve_id,
        description=description,
        cvss_vector=vector,
        impact=impact,
        cwe_ids=tuple(cwe_ids),
        cpe_matches=tuple(matches),
    )


def _walk_config_nodes(nodes):
    for node in nodes:
        yield node
        yield from _walk_config_nodes(node.get("children", []))
