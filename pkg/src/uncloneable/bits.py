"""Bit-string helpers and linear algebra over GF(2).

Bit strings are ``numpy.uint8`` arrays of zeros and ones. When a bit string is
packed into an integer, position 0 is the most significant bit, so the
integer ordering of strings is their lexicographic ordering and the integer is
also the computational-basis index of the matching qubit string.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def as_bits(x, length=None) -> np.ndarray:
    """Coerce ``x`` (sequence, array or ``"0101"`` string) to a bit array."""
    if isinstance(x, str):
        x = [int(c) for c in x.strip() if c in "01"]
    arr = np.asarray(x, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 1:
        raise ParameterError("bit strings may only contain 0 and 1")
    if length is not None and arr.size != length:
        raise ParameterError(f"expected {length} bits, got {arr.size}")
    return arr


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).reshape(-1))


def bits_to_int(bits) -> int:
    value = 0
    for b in np.asarray(bits, dtype=np.uint8).reshape(-1):
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, length: int) -> np.ndarray:
    if value < 0 or value >> length:
        raise ParameterError(f"{value} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)],
                    dtype=np.uint8)


def all_vectors(length: int) -> np.ndarray:
    """All ``2**length`` bit strings, row ``i`` being ``int_to_bits(i)``."""
    idx = np.arange(1 << length, dtype=np.int64)
    shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def pack_rows(matrix) -> np.ndarray:
    """Pack each row of a bit matrix into an integer (``int64``)."""
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    width = matrix.shape[1]
    if width > 62:
        raise ParameterError("rows wider than 62 bits cannot be packed")
    weights = (np.int64(1) << np.arange(width - 1, -1, -1, dtype=np.int64))
    return (matrix * weights).sum(axis=1)


def column_ints(matrix) -> np.ndarray:
    """Pack each column of ``matrix`` into an integer (row 0 = MSB)."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    if matrix.shape[0] == 0:
        return np.zeros(matrix.shape[1], dtype=np.int64)
    return pack_rows(matrix.T)


def matvec(matrix, v) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    return ((matrix @ v) & 1).astype(np.uint8)


def matmul(a, b) -> np.ndarray:
    return ((np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) & 1
            ).astype(np.uint8)


def rref(matrix):
    """Reduced row echelon form over GF(2).

    Returns ``(R, pivots, T)`` with ``R = T @ matrix (mod 2)``, ``pivots`` the
    pivot column of each nonzero row of ``R`` and ``T`` invertible.
    """
    a = np.array(matrix, dtype=np.uint8) % 2
    rows, cols = a.shape
    t = np.eye(rows, dtype=np.uint8)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(a[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
            t[[r, p]] = t[[p, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
                t[i] ^= t[r]
        pivots.append(c)
        r += 1
    return a, pivots, t


def rank(matrix) -> int:
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0
    return len(rref(matrix)[1])


def nullspace(matrix, width=None) -> np.ndarray:
    """Basis (as rows) of ``{v : matrix @ v = 0}`` over GF(2)."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    if matrix.size == 0:
        n = matrix.shape[1] if matrix.ndim == 2 and matrix.shape[1] else width
        return np.eye(n, dtype=np.uint8)
    r, pivots, _ = rref(matrix)
    n = matrix.shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for j, f in enumerate(free):
        basis[j, f] = 1
        for row, p in enumerate(pivots):
            basis[j, p] = r[row, f]
    return basis


def right_inverse(matrix) -> np.ndarray:
    """``R`` with ``matrix @ R = I`` for a full-row-rank ``matrix``."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    rows, cols = matrix.shape
    if rows == 0:
        return np.zeros((cols, 0), dtype=np.uint8)
    r, pivots, t = rref(matrix)
    if len(pivots) != rows:
        raise ParameterError("matrix does not have full row rank")
    inv = np.zeros((cols, rows), dtype=np.uint8)
    for row, p in enumerate(pivots):
        inv[p] = t[row]
    return inv


def span(rows) -> np.ndarray:
    """All linear combinations of ``rows`` (coefficient index order)."""
    rows = np.asarray(rows, dtype=np.uint8)
    k = rows.shape[0]
    coeffs = all_vectors(k)
    if k == 0:
        return np.zeros((1, rows.shape[1]), dtype=np.uint8)
    return matmul(coeffs, rows)
