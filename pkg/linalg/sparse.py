from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp

from linalg.views import TripletIndexError

Triplets = tuple[np.ndarray, np.ndarray, np.ndarray] | Iterable[tuple[int, int, complex]]


def _split_triplets(triplets: Triplets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(triplets, tuple) and len(triplets) == 3 and all(isinstance(t, np.ndarray) for t in triplets):
        rows, cols, vals = triplets
        return np.asarray(rows, dtype=np.int64).ravel(), np.asarray(cols, dtype=np.int64).ravel(), np.asarray(vals).ravel()
    entries = list(triplets)
    if not entries:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
    rows, cols, vals = zip(*entries)
    return np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64), np.asarray(vals)


def csr_from_triplets(n: int, m: int, triplets: Triplets) -> sp.csr_matrix:
    """Build an n x m CSR matrix from (row, col, value) triplets, summing duplicates.

    ``triplets`` is either a tuple of three equally long arrays or an iterable of
    ``(i, j, v)`` tuples. The result has sorted, unique column indices per row.
    """
    rows, cols, vals = _split_triplets(triplets)
    if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= m):
        bad = np.flatnonzero((rows < 0) | (rows >= n) | (cols < 0) | (cols >= m))[0]
        raise TripletIndexError(f"triplet {bad} ({rows[bad]}, {cols[bad]}) outside a {n}x{m} matrix")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, m)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def bandwidths(mat: sp.spmatrix) -> tuple[int, int]:
    """Lower and upper bandwidth (kl, ku) of the stored pattern."""
    coo = mat.tocoo()
    if coo.nnz == 0:
        return 0, 0
    offset = coo.row.astype(np.int64) - coo.col.astype(np.int64)
    return int(max(offset.max(), 0)), int(max(-offset.min(), 0))
