"""Binary (GF(2)) vectors, sparse matrices and dense elimination helpers.

Vectors are bit-packed into little-endian 64-bit words. Matrices keep both a
row-major and a column-major support list so that decoders can walk either
side of the Tanner graph without transposing.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionError",
    "Gf2Vector",
    "SparseGf2Matrix",
    "RowSpace",
    "mat_vec_mul",
    "mat_vec_mul_batch",
    "rank",
    "in_row_space",
    "nullspace",
    "rref",
]

_WORD = 64


class DimensionError(ValueError):
    """Operand shapes do not fit together."""


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64, LSB first."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    n_words = max(1, -(-cols // _WORD))
    packed = np.packbits(bits, axis=1, bitorder="little")
    out = np.zeros((rows, n_words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view("<u8")


def _unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")


class Gf2Vector:
    """Immutable bit-packed binary row vector."""

    __slots__ = ("_len", "_words")

    def __init__(self, length: int, words: np.ndarray):
        n_words = max(1, -(-length // _WORD))
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (n_words,):
            raise DimensionError(
                f"expected {n_words} words for length {length}, got {words.shape}"
            )
        words = words.copy()
        words.flags.writeable = False
        self._len = int(length)
        self._words = words

    @classmethod
    def _wrap(cls, length: int, words: np.ndarray) -> "Gf2Vector":
        """Trusted constructor: ``words`` is already a correctly sized private copy."""
        obj = cls.__new__(cls)
        words.flags.writeable = False
        obj._len, obj._words = length, words
        return obj

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> "Gf2Vector":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.ndim != 1:
            raise DimensionError("bit vector must be one-dimensional")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        return cls(arr.size, _pack_rows(arr.reshape(1, -1).astype(np.uint8))[0])

    @classmethod
    def from_string(cls, text: str) -> "Gf2Vector":
        """Parse a string of '0'/'1' characters."""
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise ValueError(f"not a 01-string: {text!r}")
        return cls.from_bits(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def zeros(cls, length: int) -> "Gf2Vector":
        return cls(length, np.zeros(max(1, -(-length // _WORD)), dtype=np.uint64))

    @classmethod
    def unit(cls, length: int, index: int) -> "Gf2Vector":
        if not 0 <= index < length:
            raise IndexError(index)
        bits = np.zeros(length, dtype=np.uint8)
        bits[index] = 1
        return cls.from_bits(bits)

    def __len__(self) -> int:
        return self._len

    @property
    def words(self) -> np.ndarray:
        return self._words

    def bits(self) -> np.ndarray:
        """Dense uint8 copy of the bits."""
        return _unpack_rows(self._words.reshape(1, -1), self._len)[0]

    def __getitem__(self, index: int) -> int:
        if index < 0:
            index += self._len
        if not 0 <= index < self._len:
            raise IndexError(index)
        return int((int(self._words[index // _WORD]) >> (index % _WORD)) & 1)

    def __iter__(self):
        return iter(self.bits().tolist())

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if not isinstance(other, Gf2Vector):
            return NotImplemented
        if other._len != self._len:
            raise DimensionError(f"length {self._len} vs {other._len}")
        return Gf2Vector(self._len, self._words ^ other._words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gf2Vector):
            return NotImplemented
        return self._len == other._len and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._len, self._words.tobytes()))

    def weight(self) -> int:
        return int(sum(bin(int(w)).count("1") for w in self._words))

    def is_zero(self) -> bool:
        return not self._words.any()

    def to_string(self) -> str:
        return (self.bits() + ord("0")).tobytes().decode()

    def to_hex(self) -> str:
        """Hex of the bytes holding bits 8j..8j+7 (bit 8j is the byte's LSB)."""
        n_bytes = -(-self._len // 8)
        return self._words.view(np.uint8)[:n_bytes].tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, length: int) -> "Gf2Vector":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        if bits.size < length or bits[length:].any():
            raise ValueError("hex string does not match the declared length")
        return cls.from_bits(bits[:length])

    def __repr__(self) -> str:
        body = self.to_string() if self._len <= 64 else f"weight={self.weight()}"
        return f"Gf2Vector({self._len}, {body})"


def _csr(rows: int, supports: Sequence[Sequence[int]], cols: int, what: str):
    indptr = np.zeros(rows + 1, dtype=np.int32)
    chunks = []
    for i, sup in enumerate(supports):
        arr = np.asarray(sorted(int(c) for c in sup), dtype=np.int64)
        if arr.size:
            if arr[0] < 0 or arr[-1] >= cols:
                raise ValueError(f"{what} {i}: index out of range [0, {cols})")
            if np.any(arr[1:] == arr[:-1]):
                raise ValueError(f"{what} {i}: duplicate entry")
        chunks.append(arr)
        indptr[i + 1] = indptr[i] + arr.size
    indices = np.concatenate(chunks).astype(np.int32) if chunks else np.zeros(0, np.int32)
    return indptr, indices


def _transpose_csr(rows: int, cols: int, indptr: np.ndarray, indices: np.ndarray):
    row_of = np.repeat(np.arange(rows, dtype=np.int32), np.diff(indptr))
    order = np.lexsort((row_of, indices))
    t_indices = row_of[order].astype(np.int32)
    counts = np.bincount(indices, minlength=cols)
    t_indptr = np.zeros(cols + 1, dtype=np.int32)
    np.cumsum(counts, out=t_indptr[1:])
    return t_indptr, t_indices


class SparseGf2Matrix:
    """Sparse binary matrix with sorted, duplicate-free row and column supports.

    Duplicate entries in the input raise instead of cancelling, since they
    almost always mean a corrupt code file.
    """

    __slots__ = ("rows", "cols", "row_ptr", "row_idx", "col_ptr", "col_idx")

    def __init__(self, rows: int, cols: int, row_support: Sequence[Sequence[int]]):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimension")
        if len(row_support) != rows:
            raise DimensionError(f"{len(row_support)} supports for {rows} rows")
        self.rows = int(rows)
        self.cols = int(cols)
        self.row_ptr, self.row_idx = _csr(rows, row_support, cols, "row")
        self.col_ptr, self.col_idx = _transpose_csr(rows, cols, self.row_ptr, self.row_idx)
        for arr in (self.row_ptr, self.row_idx, self.col_ptr, self.col_idx):
            arr.flags.writeable = False

    @classmethod
    def from_dense(cls, dense) -> "SparseGf2Matrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DimensionError("dense matrix must be 2-D")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], [np.flatnonzero(row) for row in arr])

    @classmethod
    def from_col_support(
        cls, rows: int, cols: int, col_support: Sequence[Sequence[int]]
    ) -> "SparseGf2Matrix":
        return cls(cols, rows, col_support).transpose()

    @classmethod
    def identity(cls, n: int) -> "SparseGf2Matrix":
        return cls(n, n, [[i] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseGf2Matrix":
        return cls(rows, cols, [[] for _ in range(rows)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return int(self.row_idx.size)

    def row(self, i: int) -> np.ndarray:
        return self.row_idx[self.row_ptr[i] : self.row_ptr[i + 1]]

    def col(self, j: int) -> np.ndarray:
        return self.col_idx[self.col_ptr[j] : self.col_ptr[j + 1]]

    @property
    def row_support(self) -> list[list[int]]:
        return [self.row(i).tolist() for i in range(self.rows)]

    @property
    def col_support(self) -> list[list[int]]:
        return [self.col(j).tolist() for j in range(self.cols)]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_weights(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        row_of = np.repeat(np.arange(self.rows), np.diff(self.row_ptr))
        out[row_of, self.row_idx] = 1
        return out

    def transpose(self) -> "SparseGf2Matrix":
        return SparseGf2Matrix(self.cols, self.rows, self.col_support)

    @property
    def T(self) -> "SparseGf2Matrix":
        return self.transpose()

    def check_consistency(self) -> None:
        """Raise ValueError unless row and column supports describe one matrix."""
        t_ptr, t_idx = _transpose_csr(self.rows, self.cols, self.row_ptr, self.row_idx)
        if not (np.array_equal(t_ptr, self.col_ptr) and np.array_equal(t_idx, self.col_idx)):
            raise ValueError("row and column supports disagree")
        for ptr, idx, bound in (
            (self.row_ptr, self.row_idx, self.cols),
            (self.col_ptr, self.col_idx, self.rows),
        ):
            if idx.size and (idx.min() < 0 or idx.max() >= bound):
                raise ValueError("support index out of range")
            for a, b in zip(ptr[:-1], ptr[1:]):
                if np.any(np.diff(idx[a:b]) <= 0):
                    raise ValueError("support list not strictly increasing")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseGf2Matrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.row_ptr.tobytes(), self.row_idx.tobytes()))

    def __repr__(self) -> str:
        return f"SparseGf2Matrix({self.rows}x{self.cols}, nnz={self.nnz})"

    @staticmethod
    def hstack(*blocks: "SparseGf2Matrix") -> "SparseGf2Matrix":
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise DimensionError("hstack needs equal row counts")
        supports = [[] for _ in range(rows)]
        offset = 0
        for b in blocks:
            for i in range(rows):
                supports[i].extend((b.row(i) + offset).tolist())
            offset += b.cols
        return SparseGf2Matrix(rows, offset, supports)

    @staticmethod
    def block_diag(*blocks: "SparseGf2Matrix") -> "SparseGf2Matrix":
        supports: list[list[int]] = []
        offset = 0
        for b in blocks:
            supports.extend((b.row(i) + offset).tolist() for i in range(b.rows))
            offset += b.cols
        return SparseGf2Matrix(len(supports), offset, supports)


def _parity_by_segments(values: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    """XOR of ``values[..., ptr[i]:ptr[i+1]]`` along the last axis, per segment."""
    csum = np.zeros(values.shape[:-1] + (values.shape[-1] + 1,), dtype=np.int64)
    np.cumsum(values, axis=-1, out=csum[..., 1:])
    return ((csum[..., ptr[1:]] - csum[..., ptr[:-1]]) & 1).astype(np.uint8)


def mat_vec_mul(H: SparseGf2Matrix, v: Gf2Vector) -> Gf2Vector:
    """Return ``H · v^T`` over GF(2)."""
    if len(v) != H.cols:
        raise DimensionError(f"vector length {len(v)} != matrix cols {H.cols}")
    bits = v.bits()
    return Gf2Vector.from_bits(_parity_by_segments(bits[H.row_idx], H.row_ptr))


def mat_vec_mul_batch(H: SparseGf2Matrix, bits: np.ndarray) -> np.ndarray:
    """Row-wise ``H · b^T`` for a (batch, cols) 0/1 array; returns (batch, rows)."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != H.cols:
        raise DimensionError(f"expected (batch, {H.cols}) array, got {bits.shape}")
    return _parity_by_segments(bits[:, H.row_idx], H.row_ptr)


def _eliminate(words: np.ndarray, cols: int, reduced: bool) -> tuple[np.ndarray, list[int]]:
    """Gaussian elimination on packed rows; returns (rows, pivot columns)."""
    work = np.array(words, dtype=np.uint64, copy=True)
    pivots: list[int] = []
    r = 0
    n_rows = work.shape[0]
    for c in range(cols):
        if r == n_rows:
            break
        w, bit = divmod(c, _WORD)
        mask = np.uint64(1) << np.uint64(bit)
        hits = np.flatnonzero(work[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        lo = 0 if reduced else r + 1
        others = np.flatnonzero(work[lo:, w] & mask) + lo
        others = others[others != r]
        work[others] ^= work[r]
        pivots.append(c)
        r += 1
    return work[:r], pivots


def _as_packed(H) -> tuple[np.ndarray, int]:
    if isinstance(H, SparseGf2Matrix):
        return _pack_rows(H.to_dense()), H.cols
    dense = np.asarray(H, dtype=np.uint8)
    return _pack_rows(dense), dense.shape[1]


def rank(H: SparseGf2Matrix | np.ndarray) -> int:
    """GF(2) row rank."""
    words, cols = _as_packed(H)
    if words.shape[0] == 0:
        return 0
    return len(_eliminate(words, cols, reduced=False)[1])


def in_row_space(H: SparseGf2Matrix, v: Gf2Vector) -> bool:
    """True iff ``v`` is a GF(2) combination of the rows of ``H``."""
    if len(v) != H.cols:
        raise DimensionError(f"vector length {len(v)} != matrix cols {H.cols}")
    words, cols = _as_packed(H)
    stacked = np.vstack([words, v.words.reshape(1, -1)])
    base = len(_eliminate(words, cols, reduced=False)[1]) if words.shape[0] else 0
    return base == len(_eliminate(stacked, cols, reduced=False)[1])


def rref(H: SparseGf2Matrix | np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (nonzero rows only, dense uint8) and pivots."""
    words, cols = _as_packed(H)
    reduced, pivots = _eliminate(words, cols, reduced=True)
    return _unpack_rows(reduced, cols), pivots


def nullspace(H: SparseGf2Matrix | np.ndarray) -> np.ndarray:
    """Basis of ``{x : H x^T = 0}`` as rows of a dense uint8 array."""
    R, pivots = rref(H)
    cols = H.cols if isinstance(H, SparseGf2Matrix) else np.asarray(H).shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in zip(R, pivots):
            if row[f]:
                basis[i, p] = 1
    return basis


class RowSpace:
    """Precomputed reduced basis for fast repeated row-space membership tests."""

    def __init__(self, H: SparseGf2Matrix | np.ndarray):
        self.basis, self.pivots = rref(H)
        self.cols = self.basis.shape[1] if self.basis.size else (
            H.cols if isinstance(H, SparseGf2Matrix) else np.asarray(H).shape[1]
        )

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    def reduce_batch(self, bits: np.ndarray) -> np.ndarray:
        work = np.array(bits, dtype=np.uint8, copy=True)
        if work.ndim != 2 or work.shape[1] != self.cols:
            raise DimensionError(f"expected (batch, {self.cols}) array, got {work.shape}")
        for row, p in zip(self.basis, self.pivots):
            hit = work[:, p] == 1
            if hit.any():
                work[hit] ^= row
        return work

    def contains_batch(self, bits: np.ndarray) -> np.ndarray:
        return ~self.reduce_batch(bits).any(axis=1)

    def contains(self, v: Gf2Vector | np.ndarray) -> bool:
        bits = v.bits() if isinstance(v, Gf2Vector) else np.asarray(v, dtype=np.uint8)
        return bool(self.contains_batch(bits.reshape(1, -1))[0])
