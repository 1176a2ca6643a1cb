#!/usr/bin/env python3
"""Fetch the UCI benchmark datasets used in the real-data comparison.

The repository ships no data.  This script downloads the raw files, prints
their SHA-256 digests, and (optionally) verifies them against digests you
pinned earlier with --expect.  Re-run with the printed digest to pin it:

    python scripts/fetch_uci.py iris -o data/
    python scripts/fetch_uci.py iris -o data/ --expect <sha256>

Datasets (UCI Machine Learning Repository):
  iris    https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data
  libras  https://archive.ics.uci.edu/ml/machine-learning-databases/libras/movement_libras.data
  leaf    https://archive.ics.uci.edu/ml/machine-learning-databases/00288/leaf.csv

The AR face dataset is not redistributable and requires per-user
registration; its random-projection preprocessing is therefore out of scope
here.  All three files above are label-annotated CSVs; pass the label column
to the CLI, e.g.:

    convexcluster bench data/iris.csv --label-column 4 ...
"""

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

URLS = {
    "iris": "https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data",
    "libras": "https://archive.ics.uci.edu/ml/machine-learning-databases/libras/movement_libras.data",
    "leaf": "https://archive.ics.uci.edu/ml/machine-learning-databases/00288/leaf.csv",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("dataset", choices=sorted(URLS))
    parser.add_argument("-o", "--output-dir", default="data")
    parser.add_argument("--expect", default=None,
                        help="fail unless the downloaded file has this sha256")
    args = parser.parse_args()

    url = URLS[args.dataset]
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{args.dataset}.csv"

    print(f"fetching {url}", file=sys.stderr)
    with urllib.request.urlopen(url) as resp:
        payload = resp.read()
    digest = hashlib.sha256(payload).hexdigest()
    print(f"sha256 {digest}")
    if args.expect and digest != args.expect:
        print(f"error: digest mismatch (expected {args.expect})", file=sys.stderr)
        return 2
    target.write_bytes(payload)
    print(f"wrote {target}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
