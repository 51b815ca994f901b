"""Regenerate the worker-scaling table for one fingerprint family.

Writes a TSV of (jobs, mean_seconds, speedup) for a synthetic corpus,
the desk-scale analog of a parallel-scaling figure.

Usage:
    python scripts/speedup_table.py --family substructure --count 10000 \
        --jobs 1,2,4,8 --repeats 3
"""

from __future__ import annotations

import argparse
import sys

from molfp import FingerprintConfig, Fingerprinter, benchmark
from molfp.corpus import synthetic_smiles


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--family", default="substructure")
    ap.add_argument("--count", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--jobs", default="1,2,4,8")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    smiles = synthetic_smiles(args.count, args.seed)
    fp = Fingerprinter(FingerprintConfig(family=args.family.replace("-", "_")))
    jobs_list = [int(x) for x in args.jobs.split(",")]
    rows = benchmark(smiles, fp, jobs_list, repeats=args.repeats)

    sys.stdout.write("jobs\tmean_seconds\tspeedup\n")
    for row in rows:
        sys.stdout.write(f"{row.jobs}\t{row.mean_seconds:.6f}\t{row.speedup:.3f}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
