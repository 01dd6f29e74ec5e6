#!/usr/bin/env python3
"""Produce a K x ks_max accuracy heat-map CSV for one instance.

Example:
    python scripts/sweep_heatmap.py tests/fixtures/tri.gset 2.0
writes sweep_heatmap.csv with mean accuracy over paired-seed replicas for a
5x5 grid; pass extra `oscim sweep` flags after the reference value.
"""

import sys

from oscim.cli import main

if __name__ == "__main__":
    if len(sys.argv) < 3:
        print(__doc__)
        sys.exit(1)
    instance, reference = sys.argv[1], sys.argv[2]
    argv = [
        "sweep", instance,
        "--k-range", "0.1:2.0", "--ks-range", "0.25:4.0", "--grid", "5x5",
        "--replicas", "20", "--reference", reference,
        "--out", "sweep_heatmap.csv",
    ] + sys.argv[3:]
    sys.exit(main(argv))
