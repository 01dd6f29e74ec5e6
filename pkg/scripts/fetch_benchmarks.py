#!/usr/bin/env python3
"""Download the benchmark instances used by the acceptance suite into
data/benchmarks/ (G1 from the Stanford GSET collection, flat50_115_1 from
SATLIB).  Run manually; the solver itself never fetches anything."""

import io
import sys
import tarfile
import urllib.request
from pathlib import Path

DEST = Path(__file__).resolve().parents[1] / "data" / "benchmarks"

GSET = {
    "G1": "https://web.stanford.edu/~yyye/yyye/Gset/G1",
}
SATLIB_FLAT50 = (
    "https://www.cs.ubc.ca/~hoos/SATLIB/Benchmarks/SAT/GCP/flat50-115.tar.gz"
)


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def main() -> int:
    DEST.mkdir(parents=True, exist_ok=True)
    for name, url in GSET.items():
        out = DEST / name
        if out.exists():
            print(f"{out} already present")
            continue
        out.write_bytes(fetch(url))
        print(f"wrote {out}")

    flat = DEST / "flat50_115_1.col"
    if not flat.exists():
        blob = fetch(SATLIB_FLAT50)
        with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
            member = next(
                (m for m in tar.getmembers() if m.name.endswith("flat50-115-1.col")),
                None,
            )
            if member is None:
                print("flat50-115-1.col not found in the SATLIB archive", file=sys.stderr)
                return 1
            flat.write_bytes(tar.extractfile(member).read())
        print(f"wrote {flat}")
    else:
        print(f"{flat} already present")
    return 0


if __name__ == "__main__":
    sys.exit(main())
