"""Sparse matrix storage, Matrix Market I/O and matrix-vector products.

Only products with ``A`` are counted; products with ``A.T`` are free, so that
the reported counts line up with the usual "mv" column of restarted Lanczos
experiments.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, TextIO, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import (
    DimensionMismatchError,
    MatrixMarketBoundsError,
    MatrixMarketFormatError,
    UnsupportedFormatError,
)

__all__ = [
    "SparseMatrix",
    "MatvecCounter",
    "parse_matrix_market",
    "read_matrix_market",
    "write_matrix_market",
    "matvec",
    "matvec_transpose",
    "one_norm",
]


class SparseMatrix:
    """Immutable real M x N sparse matrix.

    Entries are given with 0-based indices. Duplicate coordinates raise
    ``ValueError``. Row-major (CSR) storage serves ``A @ x`` and its
    transpose view (CSC of ``A.T``) serves ``A.T @ y``.
    """

    def __init__(self, shape: tuple[int, int], rows, cols, values):
        m, n = (int(shape[0]), int(shape[1]))
        if m < 1 or n < 1:
            raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if not (rows.size == cols.size == values.size):
            raise ValueError("rows, cols and values must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
                raise IndexError("entry index outside matrix bounds")
            keys = rows * n + cols
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate (row, col) entries")
        self._shape = (m, n)
        self._csr = sp.csr_array((values, (rows, cols)), shape=(m, n))
        self._csr.sort_indices()
        for arr in (self._csr.data, self._csr.indices, self._csr.indptr):
            arr.flags.writeable = False
        # A.T of a CSR array is a CSC view sharing the same buffers
        self._csr_t = self._csr.T

    @classmethod
    def from_dense(cls, array) -> "SparseMatrix":
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = np.nonzero(array)
        return cls(array.shape, rows, cols, array[rows, cols])

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def nnz(self) -> int:
        return int(self._csr.nnz)

    def entries(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(row, col, value)`` triples, 0-based, in row-major order."""
        coo = self._csr.tocoo()
        for i, j, v in zip(coo.row, coo.col, coo.data):
            yield int(i), int(j), float(v)

    def entry_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self._csr.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy()

    def transpose(self) -> "SparseMatrix":
        r, c, v = self.entry_arrays()
        return SparseMatrix((self._shape[1], self._shape[0]), c, r, v)

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    @cached_property
    def norm1(self) -> float:
        if self.nnz == 0:
            return 0.0
        colsum = np.zeros(self._shape[1])
        np.add.at(colsum, self._csr.indices, np.abs(self._csr.data))
        return float(colsum.max())

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self._shape}, nnz={self.nnz})"


@dataclass
class MatvecCounter:
    """Number of products with A (never A.T) performed during one run."""

    count_A: int = 0

    def increment(self) -> None:
        self.count_A += 1


def matvec(A: SparseMatrix, x, counter: MatvecCounter | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.shape[1],):
        raise DimensionMismatchError(
            f"matvec: expected vector of length {A.shape[1]}, got shape {x.shape}"
        )
    if counter is not None:
        counter.increment()
    return A._csr @ x


def matvec_transpose(A: SparseMatrix, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (A.shape[0],):
        raise DimensionMismatchError(
            f"matvec_transpose: expected vector of length {A.shape[0]}, got shape {y.shape}"
        )
    return A._csr_t @ y


def one_norm(A: SparseMatrix) -> float:
    """Maximum absolute column sum."""
    return A.norm1


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------

_SUPPORTED_FIELDS = {"real", "integer", "double"}


def _data_lines(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    for lineno, line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        yield lineno, stripped


def _to_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MatrixMarketFormatError(f"line {lineno}: cannot parse value {token!r}") from None


def _to_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketFormatError(f"line {lineno}: expected integer, got {token!r}") from None


def parse_matrix_market(stream: Union[TextIO, str]) -> SparseMatrix:
    """Parse a Matrix Market ``coordinate`` or ``array`` real matrix.

    Symmetric coordinate files are expanded to general storage by mirroring
    every off-diagonal entry.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    numbered = enumerate(stream, start=1)
    try:
        _, header = next(numbered)
    except StopIteration:
        raise MatrixMarketFormatError("empty input") from None

    tokens = header.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise MatrixMarketFormatError(f"malformed header: {header.strip()!r}")
    fmt, field, symmetry = tokens[2:]
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketFormatError(f"unknown storage format {fmt!r}")
    if field not in _SUPPORTED_FIELDS:
        raise UnsupportedFormatError(f"unsupported field {field!r}; only real matrices are read")
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"unsupported symmetry {symmetry!r}")
    if fmt == "array" and symmetry != "general":
        raise UnsupportedFormatError("array storage is only supported as 'general'")

    body = _data_lines(numbered)
    try:
        lineno, size_line = next(body)
    except StopIteration:
        raise MatrixMarketFormatError("missing size line") from None
    size = size_line.split()

    if fmt == "array":
        if len(size) != 2:
            raise MatrixMarketFormatError(f"line {lineno}: array size line needs 'M N'")
        m, n = (_to_int(t, lineno) for t in size)
        if m < 1 or n < 1:
            raise MatrixMarketFormatError(f"line {lineno}: non-positive dimensions")
        vals = []
        for lineno, line in body:
            vals.extend(_to_float(t, lineno) for t in line.split())
        if len(vals) != m * n:
            raise MatrixMarketFormatError(f"expected {m * n} array values, found {len(vals)}")
        dense = np.asarray(vals, dtype=np.float64).reshape((n, m)).T
        return SparseMatrix.from_dense(dense)

    if len(size) != 3:
        raise MatrixMarketFormatError(f"line {lineno}: coordinate size line needs 'M N NNZ'")
    m, n, nnz = (_to_int(t, lineno) for t in size)
    if m < 1 or n < 1 or nnz < 0:
        raise MatrixMarketFormatError(f"line {lineno}: invalid size line {size_line!r}")
    if symmetry == "symmetric" and m != n:
        raise MatrixMarketFormatError("symmetric matrix must be square")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 3:
            raise MatrixMarketFormatError(f"line {lineno}: expected 'row col value'")
        if count >= nnz:
            raise MatrixMarketFormatError(f"more than the declared {nnz} entries")
        i, j = _to_int(parts[0], lineno), _to_int(parts[1], lineno)
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketBoundsError(
                f"line {lineno}: index ({i}, {j}) outside declared {m}x{n}"
            )
        if symmetry == "symmetric" and j > i:
            raise MatrixMarketFormatError(
                f"line {lineno}: symmetric storage expects lower-triangle entries"
            )
        rows[count], cols[count], vals[count] = i - 1, j - 1, _to_float(parts[2], lineno)
        count += 1
    if count != nnz:
        raise MatrixMarketFormatError(f"declared {nnz} entries, found {count}")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    try:
        return SparseMatrix((m, n), rows, cols, vals)
    except ValueError as exc:
        raise MatrixMarketFormatError(str(exc)) from None


def read_matrix_market(path: Union[str, os.PathLike]) -> SparseMatrix:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_matrix_market(fh)


def write_matrix_market(A: SparseMatrix, stream: TextIO | None = None, comment: str | None = None) -> str | None:
    """Write ``A`` as ``coordinate real general``.

    Values use ``repr`` so a write/parse round trip is exact. Returns the text
    when ``stream`` is None.
    """
    out = io.StringIO() if stream is None else stream
    out.write("%%MatrixMarket matrix coordinate real general\n")
    if comment:
        for line in comment.splitlines():
            out.write(f"% {line}\n")
    m, n = A.shape
    out.write(f"{m} {n} {A.nnz}\n")
    for i, j, v in A.entries():
        out.write(f"{i + 1} {j + 1} {v!r}\n")
    if stream is None:
        return out.getvalue()
    return None
