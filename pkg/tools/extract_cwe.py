#!/usr/bin/env python3
"""Convert the official CWE XML catalog into the relations JSON that
`aftforge db cwe` imports.

Usage: extract_cwe.py cwec_latest.xml > cwe-relations.json

Download the catalog from https://cwe.mitre.org/data/downloads.html and
unzip it first.  Only id, name and the relation natures used for attack
chaining (PeerOf, CanFollow, CanPrecede, ChildOf) are kept.
"""

import json
import sys
import xml.etree.ElementTree as ET

KEPT_NATURES = {"PeerOf", "CanFollow", "CanPrecede", "ChildOf"}


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    tree = ET.parse(sys.argv[1])
    root = tree.getroot()
    namespace = root.tag.split("}")[0] + "}" if root.tag.startswith("{") else ""

    entries = []
    for weakness in root.iter(f"{namespace}Weakness"):
        cwe_id = weakness.get("ID")
        if cwe_id is None:
            continue
        relations = []
        for related in weakness.iter(f"{namespace}Related_Weakness"):
            nature = related.get("Nature")
            target = related.get("CWE_ID")
            if nature in KEPT_NATURES and target:
                relations.append({"nature": nature, "target": f"CWE-{target}"})
        entries.append(
            {
                "id": f"CWE-{cwe_id}",
                "name": weakness.get("Name", ""),
                "relations": relations,
            }
        )

    json.dump(entries, sys.stdout, indent=1)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
