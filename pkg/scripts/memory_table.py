"""Dense-versus-sparse memory table across fingerprint families.

Computes every family over a synthetic corpus and reports dense bytes,
CSR bytes, the savings factor, and the bit density.

Usage:
    python scripts/memory_table.py --count 10000
"""

from __future__ import annotations

import argparse
import sys

from molfp import BatchOptions, FingerprintConfig, Fingerprinter, memory_footprint, transform_batch
from molfp.corpus import synthetic_smiles

FAMILIES = ("ecfp", "fcfp", "atom_pair", "topological_torsion", "path", "substructure")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--length", type=int, default=2048)
    ap.add_argument("--jobs", type=int, default=2)
    args = ap.parse_args()

    smiles = synthetic_smiles(args.count, args.seed)
    opts = BatchOptions(jobs=args.jobs)
    sys.stdout.write("family\tdense_bytes\tsparse_bytes\tsavings\tdensity_pct\n")
    for family in FAMILIES:
        fp = Fingerprinter(FingerprintConfig(family=family, length=args.length))
        dense, _ = transform_batch(smiles, fp, opts, output="dense")
        sparse, _ = transform_batch(smiles, fp, opts, output="sparse")
        db, sb = memory_footprint(dense), memory_footprint(sparse)
        density = 100.0 * sparse.nnz / (sparse.rows * sparse.cols)
        sys.stdout.write(f"{family}\t{db}\t{sb}\t{db / sb:.1f}x\t{density:.2f}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
