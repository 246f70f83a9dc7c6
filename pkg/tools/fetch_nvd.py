#!/usr/bin/env python3
"""Fetch NVD API 2.0 pages to files for `aftforge db import`.

Usage: fetch_nvd.py OUTDIR [--start 0] [--pages 5]

Pages are saved as nvd-page-<start>.json.  Respects the public rate limit
by sleeping between requests; set NVD_API_KEY for higher limits.
"""

import argparse
import json
import os
import sys
import time
import urllib.request

API = "https://services.nvd.nist.gov/rest/json/cves/2.0"
PAGE_SIZE = 2000


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("outdir")
    parser.add_argument("--start", type=int, default=0)
    parser.add_argument("--pages", type=int, default=5)
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    headers = {}
    api_key = os.environ.get("NVD_API_KEY")
    if api_key:
        headers["apiKey"] = api_key

    for page in range(args.pages):
        start = args.start + page * PAGE_SIZE
        url = f"{API}?resultsPerPage={PAGE_SIZE}&startIndex={start}"
        request = urllib.request.Request(url, headers=headers)
        with urllib.request.urlopen(request, timeout=120) as response:
            doc = json.load(response)
        path = os.path.join(args.outdir, f"nvd-page-{start}.json")
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(doc, handle)
        print(f"wrote {path} ({len(doc.get('vulnerabilities', []))} records)", file=sys.stderr)
        if start + PAGE_SIZE >= doc.get("totalResults", 0):
            break
        time.sleep(6 if not api_key else 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
