"""Minimal sparse linear-algebra helpers shared by the assembly code.

All matrices are scipy CSR.  ``finalize`` is the single entry point that
turns triplet data (or any scipy sparse matrix) into the canonical form
used everywhere else: duplicates summed, explicit zeros dropped.
"""

from __future__ import annotations

import csv

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

__all__ = [
    "SparseStructureError",
    "SingularMatrixError",
    "finalize",
    "from_triplets",
    "kron",
    "matmul",
    "block_diag",
    "vstack",
    "scale_cols_by_inverse_diagonal",
    "lower_triangular_solve",
    "save_triplets_csv",
    "load_triplets_csv",
]


class SparseStructureError(ValueError):
    """Raised when a matrix does not have the structure an operation needs."""


class SingularMatrixError(ValueError):
    """Raised when a triangular solve meets a zero or negative diagonal."""


def finalize(a):
    """Return ``a`` as canonical CSR: duplicates summed, stored zeros removed."""
    a = sp.csr_matrix(a)
    a.sum_duplicates()
    a.eliminate_zeros()
    return a


def from_triplets(rows, cols, vals, shape):
    """Build a finalized CSR matrix from coordinate triplets."""
    return finalize(sp.coo_matrix((vals, (rows, cols)), shape=shape))


def kron(a, b):
    """Standard Kronecker product; nnz(result) = nnz(a) * nnz(b)."""
    return finalize(sp.kron(a, b, format="csr"))


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise SparseStructureError(
            f"matmul dimension mismatch: {a.shape} @ {b.shape}"
        )
    return finalize(a @ b)


def block_diag(blocks):
    blocks = list(blocks)
    if len(blocks) == 1:
        return finalize(blocks[0])
    return finalize(sp.block_diag(blocks, format="csr"))


def vstack(blocks):
    blocks = list(blocks)
    if len(blocks) == 1:
        return finalize(blocks[0])
    return finalize(sp.vstack(blocks, format="csr"))


def scale_cols_by_inverse_diagonal(a, d):
    """Return ``a @ diag(d)^{-1}``.  ``d`` must be strictly positive."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size != a.shape[1]:
        raise SparseStructureError(
            f"diagonal length {d.size} does not match ncols {a.shape[1]}"
        )
    if np.any(d <= 0.0):
        raise SingularMatrixError("diagonal entries must be strictly positive")
    return finalize(a @ sp.diags(1.0 / d))


def _check_lower_triangular(mat):
    if mat.shape[0] != mat.shape[1]:
        raise SparseStructureError(f"matrix is not square: {mat.shape}")
    if sp.triu(mat, k=1).nnz != 0:
        raise SparseStructureError("matrix has entries above the diagonal")


def lower_triangular_solve(lower, b):
    """Solve ``lower @ x = b`` by forward substitution.

    ``lower`` must be lower triangular with a strictly positive diagonal.
    """
    lower = sp.csr_matrix(lower)
    _check_lower_triangular(lower)
    diag = lower.diagonal()
    if np.any(diag <= 0.0):
        raise SingularMatrixError("zero or negative diagonal in triangular solve")
    b = np.asarray(b, dtype=float)
    return spsolve_triangular(lower, b, lower=True)


def save_triplets_csv(a, path):
    """Write a matrix as ``row,col,value`` triplets with a one-line header."""
    coo = sp.coo_matrix(a)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "value"])
        for i in order:
            writer.writerow([coo.row[i], coo.col[i], f"{coo.data[i]:.17g}"])


def load_triplets_csv(path, shape):
    """Read a matrix written by :func:`save_triplets_csv`."""
    rows, cols, vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["row", "col", "value"]:
            raise SparseStructureError(f"unexpected CSV header: {header}")
        for row, col, val in reader:
            rows.append(int(row))
            cols.append(int(col))
            vals.append(float(val))
    return from_triplets(rows, cols, vals, shape)
