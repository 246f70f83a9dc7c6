import random

import pytest

from aftforge.errors import MalformedCatalog, MalformedFeed, UnknownCwe
from aftforge.vulndb.cpe import CpeName
from aftforge.vulndb.store import CpeMatch, VulnStore, cpe_query_matches


def _page(entries):
    return {"vulnerabilities": entries}


def _entry(cve_id, description="A bug.", vector="CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:H",
           cwes=(), cpe_matches=()):
    cve = {
        "id": cve_id,
        "descriptions": [{"lang": "en", "value": description}],
        "metrics": {},
        "weaknesses": [
            {"description": [{"lang": "en", "value": cwe}]} for cwe in cwes
        ],
        "configurations": [
            {"nodes": [{"operator": "OR", "cpeMatch": list(cpe_matches)}]}
        ],
    }
    if vector:
        cve["metrics"] = {"cvssMetricV31": [{"cvssData": {"vectorString": vector}}]}
    return {"cve": cve}


def test_import_counts_and_no_cvss():
    store = VulnStore()
    page = _page(
        [
            _entry("CVE-2020-0001"),
            _entry("CVE-2020-0002"),
            _entry("CVE-2020-0003", vector=None),
        ]
    )
    stats = store.import_nvd([page])
    assert stats.imported == 3
    assert stats.no_cvss == 1
    assert store.cve_count == 3


def test_import_is_idempotent():
    store = VulnStore()
    page = _page([_entry(f"CVE-2020-000{i}") for i in range(1, 4)])
    first = store.import_nvd([page])
    assert first.changed == 3
    second = store.import_nvd([page])
    assert second.imported == 3
    assert second.changed == 0
    assert store.cve_count == 3


def test_malformed_page_rejected():
    with pytest.raises(MalformedFeed):
        VulnStore().import_nvd([{"foo": 1}])


def test_malformed_entry_skipped_not_fatal():
    store = VulnStore()
    page = _page([_entry("CVE-2020-0001"), {"cve": {"id": "not-a-cve-id"}}])
    stats = store.import_nvd([page])
    assert stats.imported == 1
    assert stats.skipped == 1


def test_cvss_preference_v31_over_v30_over_v2():
    cve = {
        "id": "CVE-2020-0010",
        "descriptions": [{"lang": "en", "value": "x"}],
        "metrics": {
            "cvssMetricV2": [{"cvssData": {"vectorString": "AV:N/AC:L/Au:N/C:P/I:P/A:P"}}],
            "cvssMetricV30": [{"cvssData": {"vectorString": "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L"}}],
            "cvssMetricV31": [{"cvssData": {"vectorString": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"}}],
        },
    }
    store = VulnStore()
    store.import_nvd([_page([{"cve": cve}])])
    assert store.get("CVE-2020-0010").cvss_vector.startswith("CVSS:3.1")


def test_save_load_round_trip(tmp_path, store):
    path = str(tmp_path / "store.json")
    store.save(path)
    loaded = VulnStore.load(path)
    assert loaded.cve_count == store.cve_count
    assert loaded.records() == store.records()
    assert loaded.cpe_dictionary == store.cpe_dictionary
    assert loaded.cwe_name("CWE-406") == store.cwe_name("CWE-406")


# --- CWE graph ----------------------------------------------------------------


def test_cwe_entry_without_relations(store):
    assert store.cwe_name("CWE-426") == "Untrusted Search Path"
    assert store.cwe_entry("CWE-426").relations == ()


def test_can_follow_normalized_to_can_precede(store):
    # catalog says CWE-79 CanFollow CWE-20
    assert store.cwe_chain_related("CWE-20", "CWE-79") == "CanPrecede"
    assert store.cwe_chain_related("CWE-79", "CWE-20") is None


def test_peer_of_is_symmetric(store):
    assert store.cwe_chain_related("CWE-79", "CWE-352") == "PeerOf"
    assert store.cwe_chain_related("CWE-352", "CWE-79") == "PeerOf"


def test_child_of_is_directed(store):
    assert store.cwe_chain_related("CWE-22", "CWE-20") == "ChildOf"
    assert store.cwe_chain_related("CWE-20", "CWE-22") is None


def test_unrelated_pair_is_none(store):
    assert store.cwe_chain_related("CWE-406", "CWE-426") is None


def test_unknown_cwe_raises(store):
    with pytest.raises(UnknownCwe):
        store.cwe_chain_related("CWE-99999", "CWE-406")


def test_duplicate_cwe_last_wins():
    store = VulnStore()
    stats = store.import_cwe(
        [
            {"id": "CWE-1", "name": "first", "relations": []},
            {"id": "CWE-1", "name": "second", "relations": []},
        ]
    )
    assert store.cwe_name("CWE-1") == "second"
    assert any("duplicate" in w for w in stats.warnings)


def test_malformed_catalog():
    with pytest.raises(MalformedCatalog):
        VulnStore().import_cwe([{"name": "missing id"}])
    with pytest.raises(MalformedCatalog):
        VulnStore().import_cwe({"id": "CWE-1"})


# --- CPE queries ----------------------------------------------------------------


def test_query_fast_dds_version_range(store):
    query = CpeName.parse("cpe:2.3:a:eprosima:fast_dds:2.1.1:*:*:*:*:*:*:*")
    records = store.query_by_cpe(query)
    assert [r.cve_id for r in records] == ["CVE-2020-99901", "CVE-2021-38425"]


def test_query_version_outside_range(store):
    query = CpeName.parse("cpe:2.3:a:eprosima:fast_dds:2.3.0:*:*:*:*:*:*:*")
    assert store.query_by_cpe(query) == []


def test_query_wrong_vendor(store):
    query = CpeName.parse("cpe:2.3:a:other:fast_dds:2.1.1:*:*:*:*:*:*:*")
    assert store.query_by_cpe(query) == []


def test_star_version_query_only_matches_unconstrained_criteria():
    match_with_range = CpeMatch(
        criteria="cpe:2.3:a:v:p:*:*:*:*:*:*:*:*", version_end_excluding="2.0"
    )
    match_unconstrained = CpeMatch(criteria="cpe:2.3:a:v:p:*:*:*:*:*:*:*:*")
    match_pinned = CpeMatch(criteria="cpe:2.3:a:v:p:1.0:*:*:*:*:*:*:*")
    query = CpeName.parse("cpe:2.3:a:v:p:*:*:*:*:*:*:*:*")
    assert cpe_query_matches(query, match_with_range) is False
    assert cpe_query_matches(query, match_unconstrained) is True
    assert cpe_query_matches(query, match_pinned) is False


def _random_match(rng):
    vendor = rng.choice(["eprosima", "openssl", "acme", "*"])
    product = rng.choice(["fast_dds", "openssl", "zlib", "*"])
    version = rng.choice(["*", "1.0", "2.1.1", "3.0"])
    kwargs = {}
    if version == "*" and rng.random() < 0.5:
        if rng.random() < 0.5:
            kwargs["version_start_including"] = rng.choice(["1.0", "2.0"])
        if rng.random() < 0.5:
            kwargs["version_end_excluding"] = rng.choice(["2.3.0", "3.0"])
    return CpeMatch(criteria=f"cpe:2.3:a:{vendor}:{product}:{version}:*:*:*:*:*:*:*", **kwargs)


def test_query_equals_brute_force_scan_on_200_records():
    rng = random.Random(7)
    store = VulnStore()
    entries = []
    for i in range(200):
        matches = [
            {
                "vulnerable": True,
                "criteria": m.criteria,
                **({"versionStartIncluding": m.version_start_including} if m.version_start_including else {}),
                **({"versionEndExcluding": m.version_end_excluding} if m.version_end_excluding else {}),
            }
            for m in [_random_match(rng) for _ in range(rng.randint(0, 3))]
        ]
        entries.append(_entry(f"CVE-2019-{10000 + i}", cpe_matches=matches))
    store.import_nvd([_page(entries)])

    queries = [
        "cpe:2.3:a:eprosima:fast_dds:2.1.1:*:*:*:*:*:*:*",
        "cpe:2.3:a:openssl:openssl:1.0:*:*:*:*:*:*:*",
        "cpe:2.3:a:acme:zlib:3.0:*:*:*:*:*:*:*",
        "cpe:2.3:a:eprosima:fast_dds:*:*:*:*:*:*:*:*",
    ]
    for query_text in queries:
        query = CpeName.parse(query_text)
        got = [r.cve_id for r in store.query_by_cpe(query)]
        expected = sorted(
            r.cve_id
            for r in store.records()
            if any(cpe_query_matches(query, m) for m in r.cpe_matches)
        )
        assert got == expected


# --- full-text search ---------------------------------------------------------


@pytest.fixture
def text_store():
    store = VulnStore()
    store.import_nvd(
        [
            _page(
                [
                    _entry("CVE-2021-0001", "OpenSSL mishandles renegotiation."),
                    _entry("CVE-2021-0002", "A flaw in OpenSSL 1.1.1f allows DoS."),
                    _entry("CVE-2021-0003", "Buffer overflow in zlib."),
                    _entry("CVE-2021-0004", "fast dds discovery can be abused."),
                    _entry("CVE-2021-0005", "The dds transport in fast implementations."),
                ]
            )
        ]
    )
    return store


def test_fulltext_openssl(text_store):
    got = [r.cve_id for r in text_store.search_fulltext("openssl")]
    assert got == ["CVE-2021-0001", "CVE-2021-0002"]


def test_fulltext_absent_name(text_store):
    assert text_store.search_fulltext("nonexistent_package") == []


def test_fulltext_multi_token_ranks_full_matches_first(text_store):
    got = [r.cve_id for r in text_store.search_fulltext("fast dds")]
    assert got[0] == "CVE-2021-0004"  # both tokens
    assert set(got[1:]) == {"CVE-2021-0005"}  # also both tokens but in odd order
    got_one = [r.cve_id for r in text_store.search_fulltext("dds")]
    assert set(got_one) == {"CVE-2021-0004", "CVE-2021-0005"}


def test_fulltext_version_mention_breaks_ties(text_store):
    got = [r.cve_id for r in text_store.search_fulltext("openssl", "1.1.1f")]
    assert got == ["CVE-2021-0002", "CVE-2021-0001"]


def test_fulltext_ranking_is_deterministic(text_store):
    first = [r.cve_id for r in text_store.search_fulltext("fast dds")]
    for _ in range(5):
        assert [r.cve_id for r in text_store.search_fulltext("fast dds")] == first


def test_fixture_store_loads(store):
    assert store.cve_count == 2
    record = store.get("CVE-2021-38425")
    assert record.impact.format() == "(H,N,H)"
    assert record.cwe_ids == ("CWE-406",)
