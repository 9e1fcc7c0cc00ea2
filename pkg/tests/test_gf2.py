import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import TOY, matvec, rank as oracle_rank, span
from qldpc_msa.gf2 import (
    DimensionError,
    Gf2Vector,
    RowSpace,
    SparseGf2Matrix,
    in_row_space,
    mat_vec_mul,
    mat_vec_mul_batch,
    nullspace,
    rank,
)


def toy():
    return SparseGf2Matrix.from_dense(np.array(TOY))


@st.composite
def dense_matrices(draw, max_rows=8, max_cols=12):
    rows = draw(st.integers(0, max_rows))
    cols = draw(st.integers(1, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=rows * cols, max_size=rows * cols))
    return np.array(bits, dtype=np.uint8).reshape(rows, cols)


# --- vectors ----------------------------------------------------------------


def test_vector_roundtrips():
    v = Gf2Vector.from_string("1011000001")
    assert v.to_string() == "1011000001"
    assert len(v) == 10 and v.weight() == 4
    assert Gf2Vector.from_hex(v.to_hex(), 10) == v
    assert v.to_hex() == "0d02"  # bytes LSB-first
    assert (v ^ v).is_zero()


def test_vector_word_boundary():
    bits = np.zeros(130, dtype=np.uint8)
    bits[[0, 63, 64, 129]] = 1
    v = Gf2Vector.from_bits(bits)
    assert np.array_equal(v.bits(), bits)
    assert [i for i in range(130) if v[i]] == [0, 63, 64, 129]
    assert hash(v) == hash(Gf2Vector.from_bits(bits.copy()))


def test_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        Gf2Vector.from_bits([0, 2])
    with pytest.raises(ValueError):
        Gf2Vector.from_string("01x")
    with pytest.raises(DimensionError):
        Gf2Vector.zeros(3) ^ Gf2Vector.zeros(4)


# --- matrix ---------------------------------------------------------------------


def test_sparse_matrix_structure():
    H = toy()
    assert (H.rows, H.cols) == (3, 6)
    assert list(H.row(0)) == [0, 2, 3, 5]
    assert list(H.col(0)) == [0, 1]
    assert list(H.row_weights()) == [4, 4, 4]
    assert list(H.col_weights()) == [2] * 6
    assert H.T.T == H
    assert np.array_equal(H.to_dense(), np.array(TOY))
    H.check_consistency()


def test_sparse_matrix_rejects_bad_supports():
    with pytest.raises(ValueError):
        SparseGf2Matrix(2, 3, [[0, 0], [1]])
    with pytest.raises(ValueError):
        SparseGf2Matrix(2, 3, [[3], [1]])


def test_block_diag_and_hstack():
    H = toy()
    D = SparseGf2Matrix.block_diag(H, SparseGf2Matrix.identity(2))
    assert (D.rows, D.cols) == (5, 8)
    assert list(D.row(3)) == [6]
    S = SparseGf2Matrix.hstack(H, H)
    assert list(S.row(0)) == [0, 2, 3, 5, 6, 8, 9, 11]


# --- mat_vec_mul ------------------------------------------------------------


@pytest.mark.parametrize(
    "v, expected",
    [
        ([0] * 6, [0, 0, 0]),
        ([1, 0, 0, 0, 0, 0], [1, 1, 0]),
        ([1] * 6, [0, 0, 0]),
    ],
)
def test_mat_vec_mul_examples(v, expected):
    s = mat_vec_mul(toy(), Gf2Vector.from_bits(v))
    assert list(s.bits()) == expected


def test_mat_vec_mul_dimension_error():
    with pytest.raises(DimensionError):
        mat_vec_mul(toy(), Gf2Vector.zeros(5))


@settings(max_examples=60, deadline=None)
@given(dense_matrices(), st.data())
def test_mat_vec_mul_matches_dense_and_is_linear(A, data):
    H = SparseGf2Matrix.from_dense(A)
    n = A.shape[1]
    v1 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    v2 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    s1 = mat_vec_mul(H, Gf2Vector.from_bits(v1))
    s2 = mat_vec_mul(H, Gf2Vector.from_bits(v2))
    assert list(s1.bits()) == matvec(A.tolist(), v1.tolist())
    assert mat_vec_mul(H, Gf2Vector.from_bits(v1 ^ v2)) == s1 ^ s2
    batch = mat_vec_mul_batch(H, np.stack([v1, v2]))
    assert np.array_equal(batch[0], s1.bits()) and np.array_equal(batch[1], s2.bits())


# --- rank / row space ---------------------------------------------------------


def test_rank_examples():
    assert rank(SparseGf2Matrix.identity(4)) == 4
    assert rank(toy()) == 2
    assert rank(SparseGf2Matrix.zeros(3, 6)) == 0


@settings(max_examples=80, deadline=None)
@given(dense_matrices(max_rows=10, max_cols=70))
def test_rank_matches_oracle(A):
    H = SparseGf2Matrix.from_dense(A)
    assert rank(H) == oracle_rank(A.tolist())
    assert rank(H) == rank(H.T)


def test_in_row_space_examples():
    H = toy()
    assert in_row_space(H, Gf2Vector.zeros(6))
    for i in range(3):
        assert in_row_space(H, Gf2Vector.from_bits(TOY[i]))
    assert not in_row_space(H, Gf2Vector.from_bits([1, 0, 0, 0, 0, 1]))
    with pytest.raises(DimensionError):
        in_row_space(H, Gf2Vector.zeros(7))


@settings(max_examples=40, deadline=None)
@given(dense_matrices(max_rows=5, max_cols=7))
def test_row_space_membership_matches_enumeration(A):
    if A.shape[0] == 0:
        return
    H = SparseGf2Matrix.from_dense(A)
    members = span(A.tolist())
    space = RowSpace(H)
    n = A.shape[1]
    every = np.array([[(x >> i) & 1 for i in range(n)] for x in range(2 ** n)], dtype=np.uint8)
    got = space.contains_batch(every)
    assert got.tolist() == [tuple(row) in members for row in every.tolist()]
    assert space.dimension == oracle_rank(A.tolist())


@settings(max_examples=40, deadline=None)
@given(dense_matrices(max_rows=8, max_cols=20))
def test_nullspace_is_kernel_of_full_dimension(A):
    H = SparseGf2Matrix.from_dense(A)
    K = nullspace(H)
    assert K.shape == (A.shape[1] - oracle_rank(A.tolist()), A.shape[1])
    assert oracle_rank(K.tolist()) == K.shape[0]
    assert not ((A.astype(int) @ K.T.astype(int)) % 2).any()
