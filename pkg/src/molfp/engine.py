"""Stateless transformers, composition, and parallel batch execution.

The engine owns all parallelism: inputs are split into contiguous
chunks (by default one per worker), scattered to a process pool, and
the per-chunk row blocks are concatenated in input order.  Workers
share nothing mutable, so results are byte-identical to a sequential
run regardless of the worker count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .chem import Molecule, sanitize
from .errors import CompositionError, ConfigError, MolfpError
from .fingerprints import (
    N_DESCRIPTORS,
    FingerprintConfig,
    FingerprintVector,
    compute,
)
from .matrix import Matrix, from_entry_rows
from .smarts import SmartsKey, default_key_set_path, load_key_set
from .smiles import parse_smiles


class SmilesParser:
    """Text-to-molecule stage: parse and sanitize."""

    input_kind = "text"
    output_kind = "molecule"

    def transform_one(self, record) -> Molecule:
        if isinstance(record, Molecule):
            return record
        return sanitize(parse_smiles(record))


class Fingerprinter:
    """Molecule-to-vector stage for one fingerprint family.

    Accepts raw SMILES records as well, converting internally, so it can
    be used standalone on string sequences.  Substructure key sets are
    compiled at construction: a bad key file fails here, never
    mid-batch.
    """

    input_kind = "molecule"
    output_kind = "vector"

    def __init__(self, config: FingerprintConfig, keys: tuple[SmartsKey, ...] | None = None):
        config.validate()
        self.config = config
        if config.family == "substructure":
            self.keys = keys if keys is not None else load_key_set(
                config.key_set_path or default_key_set_path()
            )
        else:
            self.keys = None

    @property
    def n_cols(self) -> int:
        if self.config.family == "substructure":
            return len(self.keys)
        if self.config.family == "descriptors":
            return N_DESCRIPTORS
        return self.config.length

    @property
    def row_dtype(self) -> str:
        if self.config.family == "descriptors":
            return "f64"
        return "u8" if self.config.variant == "binary" else "u32"

    @property
    def output_form(self) -> str:
        return self.config.output

    def transform_one(self, record):
        if isinstance(record, str):
            record = sanitize(parse_smiles(record))
        return compute(record, self.config, self.keys)


class Pipeline:
    """Functional composition of stages (text -> molecule -> vector)."""

    def __init__(self, stages: tuple):
        self.stages = stages

    @property
    def input_kind(self) -> str:
        return self.stages[0].input_kind

    @property
    def output_kind(self) -> str:
        return self.stages[-1].output_kind

    @property
    def n_cols(self) -> int:
        return self.stages[-1].n_cols

    @property
    def row_dtype(self) -> str:
        return self.stages[-1].row_dtype

    @property
    def output_form(self) -> str:
        return self.stages[-1].output_form

    def transform_one(self, record):
        for stage in self.stages:
            record = stage.transform_one(record)
        return record


class Union:
    """Horizontal concatenation of vector-producing branches."""

    output_kind = "vector"

    def __init__(self, branches: tuple):
        self.branches = branches

    @property
    def input_kind(self) -> str:
        return self.branches[0].input_kind

    @property
    def n_cols(self) -> int:
        return sum(b.n_cols for b in self.branches)

    @property
    def row_dtype(self) -> str:
        dtypes = {b.row_dtype for b in self.branches}
        if "f64" in dtypes:
            return "f64"
        if "u32" in dtypes:
            return "u32"
        return "u8"

    @property
    def output_form(self) -> str:
        return "sparse" if all(b.output_form == "sparse" for b in self.branches) else "dense"

    def transform_one(self, record) -> dict[int, float]:
        entries: dict[int, float] = {}
        offset = 0
        for branch in self.branches:
            row = branch.transform_one(record)
            for idx, val in _row_entries(row).items():
                entries[offset + idx] = val
            offset += branch.n_cols
        return entries


def pipeline(stages) -> Pipeline:
    """Compose stages; adjacent output/input kinds must line up."""
    stages = tuple(stages)
    if not stages:
        raise CompositionError("pipeline needs at least one stage")
    for a, b in zip(stages, stages[1:]):
        if a.output_kind != b.input_kind:
            raise CompositionError(
                f"stage produces {a.output_kind!r} but next consumes {b.input_kind!r}"
            )
    return Pipeline(stages)


def union(branches) -> Union:
    """Concatenate branch outputs in declaration order."""
    branches = tuple(branches)
    if not branches:
        raise CompositionError("union needs at least one branch")
    kinds = {b.input_kind for b in branches}
    if len(kinds) > 1:
        raise CompositionError(f"union branches consume mixed input kinds: {sorted(kinds)}")
    for b in branches:
        if b.output_kind != "vector":
            raise CompositionError("union branches must produce vectors")
    return Union(branches)


@dataclass(frozen=True)
class BatchOptions:
    """Worker count, chunking, and error policy for one batch run."""

    jobs: int | str = 1
    chunk_size: int | None = None
    error_mode: str = "raise"

    def resolved_jobs(self) -> int:
        if self.jobs == "auto":
            return os.cpu_count() or 1
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer or 'auto', got {self.jobs!r}")
        return self.jobs

    def validate(self) -> None:
        self.resolved_jobs()
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ConfigError("chunk_size must be positive")
        if self.error_mode not in ("raise", "skip"):
            raise ConfigError(f"unknown error_mode {self.error_mode!r}")


@dataclass(frozen=True)
class BatchReport:
    n_input: int
    n_ok: int
    failures: tuple[tuple[int, str, str], ...]  # (record index, error kind, message)


def chunk_spans(n: int, jobs: int, chunk_size: int | None = None) -> list[tuple[int, int]]:
    """Contiguous chunk boundaries.

    Default policy: one chunk per worker with sizes differing by at most
    one.  An explicit chunk_size overrides the count.
    """
    if n == 0:
        return []
    if chunk_size is not None:
        return [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    jobs = min(jobs, n)
    base, extra = divmod(n, jobs)
    spans = []
    start = 0
    for k in range(jobs):
        size = base + (1 if k < extra else 0)
        spans.append((start, start + size))
        start += size
    return spans


def _row_entries(row) -> dict[int, float]:
    if isinstance(row, FingerprintVector):
        return row.entries
    if isinstance(row, dict):
        return row
    # Descriptor tuples: dense reals, drop exact zeros for assembly.
    return {i: v for i, v in enumerate(row) if v != 0}


def _run_chunk(transformer, records, start: int, error_mode: str):
    """Worker body: returns (rows, failures, first_error_or_None)."""
    rows = []
    failures = []
    for off, rec in enumerate(records):
        try:
            rows.append(transformer.transform_one(rec))
        except MolfpError as exc:
            if error_mode == "raise":
                return rows, failures, (start + off, exc)
            failures.append((start + off, type(exc).__name__, str(exc)))
    return rows, failures, None


def transform_batch(
    inputs,
    transformer,
    opts: BatchOptions = BatchOptions(),
    output: str | None = None,
) -> tuple[Matrix, BatchReport]:
    """Run a transformer over a record sequence with chunked workers.

    Output rows keep input order and are byte-identical to a jobs=1 run.
    error_mode "raise" aborts on the failure with the smallest record
    index; "skip" drops failed rows and lists them in the report.
    """
    if transformer.output_kind != "vector":
        raise CompositionError("batch output requires a vector-producing transformer")
    opts.validate()
    inputs = list(inputs)
    jobs = opts.resolved_jobs()
    spans = chunk_spans(len(inputs), jobs, opts.chunk_size)

    results = []
    if jobs == 1 or len(spans) <= 1:
        for s, e in spans:
            results.append(_run_chunk(transformer, inputs[s:e], s, opts.error_mode))
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(spans))) as pool:
            futures = [
                pool.submit(_run_chunk, transformer, inputs[s:e], s, opts.error_mode)
                for s, e in spans
            ]
            results = [f.result() for f in futures]

    errors = [r[2] for r in results if r[2] is not None]
    if errors:
        errors.sort(key=lambda item: item[0])
        idx, exc = errors[0]
        exc.record_index = idx  # lets callers map back to the input record
        raise exc

    rows = []
    failures: list[tuple[int, str, str]] = []
    for chunk_rows, chunk_failures, _ in results:
        rows.extend(chunk_rows)
        failures.extend(chunk_failures)
    failures.sort(key=lambda f: f[0])

    form = output if output is not None else transformer.output_form
    mat = from_entry_rows(
        (_row_entries(r) for r in rows),
        transformer.n_cols,
        transformer.row_dtype,
        form,
    )
    report = BatchReport(
        n_input=len(inputs), n_ok=len(rows), failures=tuple(failures)
    )
    return mat, report


@dataclass(frozen=True)
class BenchmarkRow:
    jobs: int
    mean_seconds: float
    speedup: float


def benchmark(
    inputs,
    transformer,
    jobs_list,
    repeats: int = 3,
    warmup: int = 1,
) -> list[BenchmarkRow]:
    """Wall-clock timing per worker count.

    Each timing is the mean of ``repeats`` runs after ``warmup``
    discarded runs; speedup is sequential time over parallel time, and
    exactly 1.0 for the jobs=1 row.
    """
    inputs = list(inputs)
    jobs_list = list(jobs_list)
    if repeats < 1:
        raise ConfigError("repeats must be positive")
    if any(j < 1 for j in jobs_list):
        raise ConfigError("jobs values must be positive")
    if jobs_list and len(inputs) < max(jobs_list):
        raise ConfigError("need at least as many inputs as workers")

    def timed(jobs: int) -> float:
        opts = BatchOptions(jobs=jobs)
        for _ in range(warmup):
            transform_batch(inputs, transformer, opts)
        total = 0.0
        for _ in range(repeats):
            t0 = time.perf_counter()
            transform_batch(inputs, transformer, opts)
            total += time.perf_counter() - t0
        return total / repeats

    base = timed(1)
    out = []
    for j in jobs_list:
        if j == 1:
            out.append(BenchmarkRow(1, base, 1.0))
        else:
            t = timed(j)
            out.append(BenchmarkRow(j, t, base / t))
    return out
