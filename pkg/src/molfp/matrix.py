"""Batch output containers: dense and CSR matrices with text serialization.

Formats:
  DENSEv1: header ``DENSEv1 <rows> <cols> <dtype>`` then one
  space-separated row per line.
  CSRv1: header ``CSRv1 <rows> <cols> <nnz> <dtype>`` then indptr,
  indices, and data each on one space-separated line.
dtype is one of u8, u32, f64.  Serialization is bit-exact round-trip;
floats are written with repr (shortest round-trip form).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import FormatError, ShapeError

_NUMPY_DTYPE = {"u8": np.uint8, "u32": np.uint32, "f64": np.float64}
_ELEMENT_SIZE = {"u8": 1, "u32": 4, "f64": 8}
_INDEX_BYTES = 4  # fixed CSR index width


@dataclass(eq=False)
class DenseMatrix:
    values: np.ndarray
    dtype: str

    def __post_init__(self) -> None:
        if self.dtype not in _NUMPY_DTYPE:
            raise ShapeError(f"unknown dtype {self.dtype!r}")
        self.values = np.ascontiguousarray(self.values, dtype=_NUMPY_DTYPE[self.dtype])
        if self.values.ndim != 2:
            raise ShapeError("dense payload must be 2-dimensional")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class CsrMatrix:
    rows: int
    cols: int
    dtype: str
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.dtype not in _NUMPY_DTYPE:
            raise ShapeError(f"unknown dtype {self.dtype!r}")
        self.indptr = np.asarray(self.indptr, dtype=np.int32)
        self.indices = np.asarray(self.indices, dtype=np.int32)
        self.data = np.asarray(self.data, dtype=_NUMPY_DTYPE[self.dtype])
        if self.rows < 0 or self.cols < 0:
            raise ShapeError("negative shape")
        if self.indptr.shape != (self.rows + 1,):
            raise ShapeError("indptr length must be rows + 1")
        if self.indptr[0] != 0 or np.any(np.diff(self.indptr) < 0):
            raise ShapeError("indptr must be non-decreasing from 0")
        nnz = int(self.indptr[-1])
        if self.indices.shape != (nnz,) or self.data.shape != (nnz,):
            raise ShapeError("indices/data length must equal indptr[rows]")
        if nnz:
            if self.indices.min() < 0 or self.indices.max() >= self.cols:
                raise ShapeError("column index out of range")
            for r in range(self.rows):
                row = self.indices[self.indptr[r] : self.indptr[r + 1]]
                if row.size > 1 and np.any(np.diff(row) <= 0):
                    raise ShapeError(f"row {r} indices not strictly increasing")
            if np.any(self.data == 0):
                raise ShapeError("stored zero in CSR data")

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])


Matrix = DenseMatrix | CsrMatrix


def from_entry_rows(
    rows: Iterable[Mapping[int, float]], cols: int, dtype: str, output: str = "dense"
) -> Matrix:
    """Build a matrix from sparse row mappings (index -> nonzero value)."""
    rows = list(rows)
    if output == "dense":
        values = np.zeros((len(rows), cols), dtype=_NUMPY_DTYPE[dtype])
        for r, entries in enumerate(rows):
            for idx, val in entries.items():
                values[r, idx] = val
        return DenseMatrix(values, dtype)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for entries in rows:
        for idx in sorted(entries):
            if entries[idx] != 0:
                indices.append(idx)
                data.append(entries[idx])
        indptr.append(len(indices))
    return CsrMatrix(
        rows=len(rows),
        cols=cols,
        dtype=dtype,
        indptr=np.array(indptr, dtype=np.int32),
        indices=np.array(indices, dtype=np.int32),
        data=np.array(data, dtype=_NUMPY_DTYPE[dtype]),
    )


def from_rows(vectors: list, output: str = "dense", cols: int | None = None) -> Matrix:
    """Stack fingerprint vectors as matrix rows, preserving order.

    All vectors must share length and variant (ShapeError otherwise).
    ``cols`` is only consulted for an empty list.
    """
    if output not in ("dense", "sparse"):
        raise ShapeError(f"unknown output form {output!r}")
    if not vectors:
        return from_entry_rows([], cols if cols is not None else 0, "u8", output)
    length = vectors[0].length
    variant = vectors[0].variant
    for v in vectors:
        if v.length != length:
            raise ShapeError(f"mixed vector lengths: {v.length} vs {length}")
        if v.variant != variant:
            raise ShapeError(f"mixed vector variants: {v.variant} vs {variant}")
    dtype = "u8" if variant == "binary" else "u32"
    return from_entry_rows((v.entries for v in vectors), length, dtype, output)


def to_csr(m: DenseMatrix) -> CsrMatrix:
    indptr = [0]
    indices: list[int] = []
    data: list = []
    for r in range(m.rows):
        row = m.values[r]
        nz = np.flatnonzero(row)
        indices.extend(int(c) for c in nz)
        data.extend(row[nz])
        indptr.append(len(indices))
    return CsrMatrix(
        rows=m.rows,
        cols=m.cols,
        dtype=m.dtype,
        indptr=np.array(indptr, dtype=np.int32),
        indices=np.array(indices, dtype=np.int32),
        data=np.array(data, dtype=_NUMPY_DTYPE[m.dtype]),
    )


def to_dense(c: CsrMatrix) -> DenseMatrix:
    values = np.zeros((c.rows, c.cols), dtype=_NUMPY_DTYPE[c.dtype])
    for r in range(c.rows):
        lo, hi = int(c.indptr[r]), int(c.indptr[r + 1])
        values[r, c.indices[lo:hi]] = c.data[lo:hi]
    return DenseMatrix(values, c.dtype)


def memory_footprint(m: Matrix) -> int:
    """Payload bytes: rows*cols*esize for dense; data + 4-byte indices
    and indptr for CSR."""
    esize = _ELEMENT_SIZE[m.dtype]
    if isinstance(m, DenseMatrix):
        return m.rows * m.cols * esize
    return m.nnz * esize + m.nnz * _INDEX_BYTES + (m.rows + 1) * _INDEX_BYTES


def _format_value(value, dtype: str) -> str:
    if dtype == "f64":
        return repr(float(value))
    return str(int(value))


def _parse_value(text: str, dtype: str, lineno: int):
    try:
        if dtype == "f64":
            return float(text)
        value = int(text)
    except ValueError:
        raise FormatError(f"bad {dtype} value {text!r}", lineno) from None
    if value < 0 or (dtype == "u8" and value > 255) or (dtype == "u32" and value > 2**32 - 1):
        raise FormatError(f"{dtype} value out of range: {value}", lineno)
    return value


def serialize(m: Matrix, sink: IO[str]) -> None:
    """Write the matrix in its text format; output ends with a newline."""
    if isinstance(m, DenseMatrix):
        sink.write(f"DENSEv1 {m.rows} {m.cols} {m.dtype}\n")
        for r in range(m.rows):
            sink.write(" ".join(_format_value(v, m.dtype) for v in m.values[r]))
            sink.write("\n")
    else:
        sink.write(f"CSRv1 {m.rows} {m.cols} {m.nnz} {m.dtype}\n")
        sink.write(" ".join(str(int(v)) for v in m.indptr) + "\n")
        sink.write(" ".join(str(int(v)) for v in m.indices) + "\n")
        sink.write(" ".join(_format_value(v, m.dtype) for v in m.data) + "\n")


def deserialize(source: IO[str]) -> Matrix:
    """Parse a DENSEv1/CSRv1 stream; FormatError names the bad line."""
    lines = source.read().splitlines()
    if not lines:
        raise FormatError("empty input", 1)
    header = lines[0].split()
    if not header:
        raise FormatError("blank header", 1)
    kind = header[0]
    if kind == "DENSEv1":
        if len(header) != 4:
            raise FormatError("DENSEv1 header needs rows, cols, dtype", 1)
        try:
            rows, cols = int(header[1]), int(header[2])
        except ValueError:
            raise FormatError("non-integer shape in header", 1) from None
        dtype = header[3]
        if dtype not in _NUMPY_DTYPE:
            raise FormatError(f"unknown dtype {dtype!r}", 1)
        if len(lines) - 1 < rows:
            raise FormatError(f"expected {rows} rows, file has {len(lines) - 1}", len(lines))
        if len(lines) - 1 > rows and any(line.strip() for line in lines[rows + 1 :]):
            raise FormatError("trailing content after matrix rows", rows + 2)
        values = np.zeros((rows, cols), dtype=_NUMPY_DTYPE[dtype])
        for r in range(rows):
            fields = lines[r + 1].split()
            if len(fields) != cols:
                raise FormatError(f"expected {cols} values, got {len(fields)}", r + 2)
            for c, f in enumerate(fields):
                values[r, c] = _parse_value(f, dtype, r + 2)
        return DenseMatrix(values, dtype)
    if kind == "CSRv1":
        if len(header) != 5:
            raise FormatError("CSRv1 header needs rows, cols, nnz, dtype", 1)
        try:
            rows, cols, nnz = int(header[1]), int(header[2]), int(header[3])
        except ValueError:
            raise FormatError("non-integer shape in header", 1) from None
        dtype = header[4]
        if dtype not in _NUMPY_DTYPE:
            raise FormatError(f"unknown dtype {dtype!r}", 1)
        if len(lines) < 4:
            raise FormatError("truncated CSRv1 file", len(lines))

        def int_line(lineno: int, expected: int, what: str) -> np.ndarray:
            fields = lines[lineno - 1].split()
            if len(fields) != expected:
                raise FormatError(
                    f"expected {expected} {what} entries, got {len(fields)}", lineno
                )
            try:
                return np.array([int(f) for f in fields], dtype=np.int64)
            except ValueError:
                raise FormatError(f"bad integer in {what}", lineno) from None

        indptr = int_line(2, rows + 1, "indptr")
        indices = int_line(3, nnz, "indices")
        data_fields = lines[3].split()
        if len(data_fields) != nnz:
            raise FormatError(f"expected {nnz} data entries, got {len(data_fields)}", 4)
        data = [_parse_value(f, dtype, 4) for f in data_fields]
        if any(line.strip() for line in lines[4:]):
            raise FormatError("trailing content after CSR data", 5)
        try:
            return CsrMatrix(
                rows=rows,
                cols=cols,
                dtype=dtype,
                indptr=indptr.astype(np.int32),
                indices=indices.astype(np.int32),
                data=np.array(data, dtype=_NUMPY_DTYPE[dtype]),
            )
        except ShapeError as exc:
            raise FormatError(f"inconsistent CSR structure: {exc}", 2) from None
    raise FormatError(f"unknown format {kind!r}", 1)
