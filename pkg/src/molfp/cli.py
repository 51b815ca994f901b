"""Command-line interface: compute, canonical, search, benchmark, gen-corpus.

Exit codes: 0 success, 1 data error (parse/valence/IO), 2 usage error
(argparse).  The MOLFP_JOBS environment variable supplies the default
worker count wherever a batch runs.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from .engine import (
    BatchOptions,
    Fingerprinter,
    benchmark,
    transform_batch,
    _row_entries,
)
from .errors import MolfpError
from .corpus import synthetic_smiles
from .fingerprints import FingerprintConfig, FingerprintVector
from .matrix import serialize
from .similarity import bulk_top_k
from .smiles import parse_smiles, write_canonical_smiles
from .chem import sanitize

_FAMILY_CHOICES = {
    "ecfp": "ecfp",
    "fcfp": "fcfp",
    "atom-pair": "atom_pair",
    "topological-torsion": "topological_torsion",
    "path": "path",
    "substructure": "substructure",
    "descriptors": "descriptors",
}


@dataclass(frozen=True)
class SmiRecord:
    smiles: str
    name: str | None
    line_number: int


def read_smi(path: str) -> list[SmiRecord]:
    """Read the .smi record grammar: one record per line, '#' lines and
    blank lines skipped, first whitespace splits SMILES from name."""
    records = []
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            name = parts[1] if len(parts) > 1 else None
            records.append(SmiRecord(parts[0], name, lineno))
    return records


def _jobs_arg(value: str):
    if value == "auto":
        return "auto"
    return int(value)


def _default_jobs():
    return _jobs_arg(os.environ.get("MOLFP_JOBS", "1"))


def _add_fingerprint_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fingerprint", required=True, choices=sorted(_FAMILY_CHOICES))
    p.add_argument("--length", type=int, default=2048)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--min-path", type=int, default=1)
    p.add_argument("--max-path", type=int, default=7)
    p.add_argument("--distance-cap", type=int, default=30)
    p.add_argument("--variant", choices=["binary", "count"], default="binary")
    p.add_argument("--key-set", default=None, help="substructure key file")


def _build_fingerprinter(args, output: str = "dense") -> Fingerprinter:
    config = FingerprintConfig(
        family=_FAMILY_CHOICES[args.fingerprint],
        length=args.length,
        radius=args.radius,
        min_path=args.min_path,
        max_path=args.max_path,
        distance_cap=args.distance_cap,
        variant=args.variant,
        key_set_path=args.key_set,
        output=output,
    )
    return Fingerprinter(config)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _failure_location(path: str, records: list[SmiRecord], exc: MolfpError) -> str:
    idx = getattr(exc, "record_index", None)
    if idx is not None and 0 <= idx < len(records):
        return f"{path}:{records[idx].line_number}: {exc}"
    return f"{path}: {exc}"


def _write_errors_tsv(path: str, records: list[SmiRecord], failures) -> None:
    with open(path, "w") as f:
        f.write("index\tline\terror\n")
        for idx, kind, message in failures:
            f.write(f"{idx}\t{records[idx].line_number}\t{kind}: {message}\n")


def cmd_compute(args) -> int:
    try:
        records = read_smi(args.input)
        fp = _build_fingerprinter(args, output=args.output)
        opts = BatchOptions(
            jobs=args.jobs, chunk_size=args.chunk_size, error_mode=args.on_error
        )
        matrix, report = transform_batch([r.smiles for r in records], fp, opts)
        with open(args.outfile, "w") as f:
            serialize(matrix, f)
        if args.on_error == "skip":
            _write_errors_tsv(f"{args.outfile}.errors.tsv", records, report.failures)
        return 0
    except MolfpError as exc:
        return _fail(_failure_location(args.input, records, exc))
    except OSError as exc:
        return _fail(str(exc))


def cmd_canonical(args) -> int:
    try:
        records = read_smi(args.input)
        lines = []
        failures = []
        for idx, rec in enumerate(records):
            try:
                text = write_canonical_smiles(sanitize(parse_smiles(rec.smiles)))
            except MolfpError as exc:
                if args.on_error == "raise":
                    exc.record_index = idx
                    raise
                failures.append((idx, type(exc).__name__, str(exc)))
                continue
            lines.append(f"{text} {rec.name}" if rec.name else text)
        with open(args.outfile, "w") as f:
            for line in lines:
                f.write(line + "\n")
        if args.on_error == "skip":
            _write_errors_tsv(f"{args.outfile}.errors.tsv", records, failures)
        return 0
    except MolfpError as exc:
        return _fail(_failure_location(args.input, records, exc))
    except OSError as exc:
        return _fail(str(exc))


def cmd_search(args) -> int:
    try:
        records = read_smi(args.database)
        fp = _build_fingerprinter(args, output="sparse")
        opts = BatchOptions(jobs=args.jobs)
        db, _ = transform_batch([r.smiles for r in records], fp, opts, output="sparse")
        qrow = fp.transform_one(args.query)
        query = FingerprintVector(
            fp.n_cols, "binary", {i: 1 for i in _row_entries(qrow)}
        )
        hits = bulk_top_k(query, db, args.top_k, args.metric)
        out = sys.stdout
        out.write("rank\tline\tname\tscore\n")
        for rank, hit in enumerate(hits, start=1):
            rec = records[hit.row]
            out.write(f"{rank}\t{rec.line_number}\t{rec.name or ''}\t{hit.score:.6f}\n")
        return 0
    except MolfpError as exc:
        return _fail(_failure_location(args.database, records, exc))
    except OSError as exc:
        return _fail(str(exc))


def cmd_benchmark(args) -> int:
    try:
        records = read_smi(args.input)
        fp = _build_fingerprinter(args)
        jobs_list = [int(x) for x in args.jobs_list.split(",") if x.strip()]
        rows = benchmark(
            [r.smiles for r in records], fp, jobs_list, repeats=args.repeats
        )
        out = sys.stdout
        out.write("jobs\tmean_seconds\tspeedup\n")
        for row in rows:
            out.write(f"{row.jobs}\t{row.mean_seconds:.6f}\t{row.speedup:.3f}\n")
        return 0
    except ValueError:
        return _fail(f"bad --jobs-list {args.jobs_list!r}")
    except MolfpError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))


def cmd_gen_corpus(args) -> int:
    try:
        smiles = synthetic_smiles(args.count, args.seed)
        with open(args.outfile, "w") as f:
            for i, smi in enumerate(smiles):
                f.write(f"{smi} synth-{i}\n")
        return 0
    except OSError as exc:
        return _fail(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="molfp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="fingerprint a .smi file into a matrix file")
    p.add_argument("input")
    p.add_argument("outfile")
    _add_fingerprint_args(p)
    p.add_argument("--output", choices=["dense", "sparse"], default="dense")
    p.add_argument("--jobs", type=_jobs_arg, default=_default_jobs())
    p.add_argument("--chunk-size", type=int, default=None)
    p.add_argument("--on-error", choices=["raise", "skip"], default="raise")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("canonical", help="canonicalize a .smi file")
    p.add_argument("input")
    p.add_argument("outfile")
    p.add_argument("--on-error", choices=["raise", "skip"], default="raise")
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("search", help="top-k similarity search in a .smi database")
    p.add_argument("query")
    p.add_argument("database")
    _add_fingerprint_args(p)
    p.add_argument("--metric", choices=["tanimoto", "dice"], default="tanimoto")
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_search, jobs=_default_jobs())

    p = sub.add_parser("benchmark", help="wall-clock speedup table")
    p.add_argument("input")
    _add_fingerprint_args(p)
    p.add_argument("--jobs-list", default="1,2,4")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("gen-corpus", help="write a synthetic .smi corpus")
    p.add_argument("outfile")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def run() -> None:
    sys.exit(main())
