"""Dense/CSR containers, conversions, footprints, serialization."""

from __future__ import annotations

import io
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molfp import (
    CsrMatrix,
    DenseMatrix,
    FingerprintVector,
    FormatError,
    ShapeError,
    deserialize,
    from_rows,
    memory_footprint,
    serialize,
    to_csr,
    to_dense,
)

MIB = 1024 * 1024


def vec(length: int, variant: str, entries: dict) -> FingerprintVector:
    return FingerprintVector(length, variant, entries)


def roundtrip(m) -> str:
    buf = io.StringIO()
    serialize(m, buf)
    return buf.getvalue()


class TestFromRows:
    def test_dense_binary(self):
        m = from_rows([vec(3, "binary", {0: 1}), vec(3, "binary", {2: 1})], "dense")
        assert m.dtype == "u8"
        assert np.array_equal(m.values, [[1, 0, 0], [0, 0, 1]])

    def test_sparse_binary(self):
        m = from_rows([vec(3, "binary", {0: 1}), vec(3, "binary", {2: 1})], "sparse")
        assert list(m.indptr) == [0, 1, 2]
        assert list(m.indices) == [0, 2]
        assert list(m.data) == [1, 1]

    def test_empty_list(self):
        m = from_rows([], "dense", cols=2048)
        assert m.rows == 0 and m.cols == 2048

    def test_mixed_lengths_rejected(self):
        with pytest.raises(ShapeError):
            from_rows([vec(3, "binary", {}), vec(4, "binary", {})])

    def test_mixed_variants_rejected(self):
        with pytest.raises(ShapeError):
            from_rows([vec(3, "binary", {}), vec(3, "count", {})])

    def test_count_rows_use_u32(self):
        m = from_rows([vec(4, "count", {1: 300})], "dense")
        assert m.dtype == "u32"
        assert m.values[0, 1] == 300

    def test_row_order_preserved(self):
        rows = [vec(4, "count", {i % 4: i + 1}) for i in range(8)]
        m = from_rows(rows, "sparse")
        d = to_dense(m)
        for i, r in enumerate(rows):
            assert d.values[i, i % 4] == i + 1


class TestConversions:
    def test_example(self):
        d = DenseMatrix(np.array([[0, 2, 0], [1, 0, 0]]), "u32")
        c = to_csr(d)
        assert list(c.indptr) == [0, 1, 2]
        assert list(c.indices) == [1, 0]
        assert list(c.data) == [2, 1]

    def test_zero_matrix(self):
        c = to_csr(DenseMatrix(np.zeros((3, 4)), "u8"))
        assert c.nnz == 0
        assert np.array_equal(to_dense(c).values, np.zeros((3, 4)))

    def test_random_roundtrip(self):
        rng = random.Random(99)
        for _ in range(5):
            dense = np.array(
                [[rng.choice([0, 0, 0, 1, 2, 9]) for _ in range(64)] for _ in range(100)]
            )
            d = DenseMatrix(dense, "u32")
            assert np.array_equal(to_dense(to_csr(d)).values, d.values)


class TestValidation:
    def test_indptr_must_start_at_zero(self):
        with pytest.raises(ShapeError):
            CsrMatrix(1, 3, "u8", np.array([1, 2]), np.array([0]), np.array([1]))

    def test_indices_strictly_increasing(self):
        with pytest.raises(ShapeError):
            CsrMatrix(1, 3, "u8", np.array([0, 2]), np.array([1, 1]), np.array([1, 1]))

    def test_no_stored_zeros(self):
        with pytest.raises(ShapeError):
            CsrMatrix(1, 3, "u8", np.array([0, 1]), np.array([1]), np.array([0]))

    def test_index_bound(self):
        with pytest.raises(ShapeError):
            CsrMatrix(1, 3, "u8", np.array([0, 1]), np.array([3]), np.array([1]))


class TestFootprint:
    def test_dense_table_scale(self):
        # 438k x 2048 u8 comes out near 855 MiB
        m = DenseMatrix(np.zeros((1, 1)), "u8")
        footprint = 438_000 * 2048  # formula: rows*cols*1
        assert memory_footprint(DenseMatrix(np.zeros((2, 3)), "u8")) == 6
        assert abs(footprint / MIB - 855.5) < 1.0

    def test_csr_indptr_only(self):
        c = to_csr(DenseMatrix(np.zeros((10, 2048)), "u8"))
        assert memory_footprint(c) == 44

    def test_one_percent_density_regime(self):
        rng = random.Random(1)
        rows, cols = 1000, 2048
        entries = []
        for _ in range(rows):
            nz = sorted(rng.sample(range(cols), 20))
            entries.append({i: 1 for i in nz})
        vecs = [vec(cols, "binary", e) for e in entries]
        dense = from_rows(vecs, "dense")
        sparse = from_rows(vecs, "sparse")
        assert memory_footprint(dense) == rows * cols
        assert memory_footprint(sparse) == 20 * rows * 5 + (rows + 1) * 4
        assert memory_footprint(sparse) <= memory_footprint(dense) / 8

    def test_f64_element_size(self):
        m = DenseMatrix(np.zeros((2, 3)), "f64")
        assert memory_footprint(m) == 48

    def test_two_percent_density_still_eight_fold(self):
        rng = random.Random(2)
        rows, cols = 200, 2048
        vecs = [
            vec(cols, "binary", {i: 1 for i in rng.sample(range(cols), 40)})
            for _ in range(rows)
        ]
        dense = from_rows(vecs, "dense")
        sparse = from_rows(vecs, "sparse")
        assert sparse.nnz / (rows * cols) <= 0.02
        assert memory_footprint(sparse) <= memory_footprint(dense) / 8


class TestSerialization:
    def test_dense_header(self):
        text = roundtrip(DenseMatrix(np.array([[1, 0], [0, 2]]), "u8"))
        assert text.startswith("DENSEv1 2 2 u8\n")
        assert text.endswith("\n")

    def test_csr_header_grammar(self):
        c = to_csr(DenseMatrix(np.array([[0, 5, 0], [7, 0, 0]]), "u32"))
        text = roundtrip(c)
        assert text.splitlines()[0] == "CSRv1 2 3 2 u32"

    def test_roundtrip_dense(self):
        d = DenseMatrix(np.array([[1, 0, 3], [0, 9, 0]]), "u32")
        back = deserialize(io.StringIO(roundtrip(d)))
        assert isinstance(back, DenseMatrix)
        assert np.array_equal(back.values, d.values)

    def test_roundtrip_csr(self):
        c = to_csr(DenseMatrix(np.array([[0, 2, 0], [1, 0, 0]]), "u8"))
        back = deserialize(io.StringIO(roundtrip(c)))
        assert isinstance(back, CsrMatrix)
        assert roundtrip(back) == roundtrip(c)

    def test_roundtrip_f64_bit_exact(self):
        values = np.array([[0.1, -2.5e-17, 3.0], [1 / 3, 0.0, 46.069]])
        d = DenseMatrix(values, "f64")
        back = deserialize(io.StringIO(roundtrip(d)))
        assert np.array_equal(back.values, d.values)

    def test_truncated_file(self):
        c = to_csr(DenseMatrix(np.array([[0, 2, 0], [1, 0, 0]]), "u8"))
        text = roundtrip(c)
        with pytest.raises(FormatError):
            deserialize(io.StringIO("\n".join(text.splitlines()[:2])))

    def test_bad_header(self):
        with pytest.raises(FormatError):
            deserialize(io.StringIO("NOPEv9 1 1 u8\n0\n"))
        with pytest.raises(FormatError):
            deserialize(io.StringIO(""))

    def test_wrong_counts_name_line(self):
        with pytest.raises(FormatError) as exc:
            deserialize(io.StringIO("DENSEv1 2 3 u8\n1 0 0\n"))
        assert exc.value.line >= 2

    def test_value_out_of_range(self):
        with pytest.raises(FormatError):
            deserialize(io.StringIO("DENSEv1 1 1 u8\n300\n"))

    def test_empty_csr(self):
        c = from_rows([], "sparse", cols=16)
        back = deserialize(io.StringIO(roundtrip(c)))
        assert back.rows == 0 and back.cols == 16 and back.nnz == 0


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.dictionaries(st.integers(0, 15), st.integers(1, 255), max_size=8),
        min_size=0,
        max_size=6,
    )
)
def test_serialization_roundtrip_property(entry_rows):
    vecs = [vec(16, "count", e) for e in entry_rows]
    for form in ("dense", "sparse"):
        m = from_rows(vecs, form, cols=16)
        back = deserialize(io.StringIO(roundtrip(m)))
        assert roundtrip(back) == roundtrip(m)
