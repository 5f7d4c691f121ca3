import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import get_lapack_funcs

from linalg.sparse import bandwidths
from linalg.views import BandwidthOverflowError, SingularMatrixError

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-300


@dataclass
class BandedMatrix:
    """Square matrix in LAPACK general-band storage.

    Entry ``A[i, j]`` lives at ``data[kl + ku + i - j, j]``. The first ``kl``
    rows of ``data`` are workspace for the fill created by partial pivoting.
    """

    n: int
    kl: int
    ku: int
    data: np.ndarray

    @classmethod
    def zeros(cls, n: int, kl: int, ku: int, dtype=np.float64) -> "BandedMatrix":
        return cls(n, kl, ku, np.zeros((2 * kl + ku + 1, n), dtype=np.result_type(dtype, np.float64)))

    @classmethod
    def from_dense(cls, dense: np.ndarray, kl: int | None = None, ku: int | None = None) -> "BandedMatrix":
        dense = np.asarray(dense)
        return cls.from_sparse(sp.coo_matrix(dense), kl, ku, dtype=dense.dtype)

    @classmethod
    def from_sparse(cls, mat: sp.spmatrix, kl: int | None = None, ku: int | None = None, dtype=None) -> "BandedMatrix":
        n = mat.shape[0]
        if mat.shape[1] != n:
            raise ValueError(f"banded storage needs a square matrix, got {mat.shape}")
        lower, upper = bandwidths(mat)
        kl = lower if kl is None else kl
        ku = upper if ku is None else ku
        banded = cls.zeros(n, kl, ku, dtype=dtype or mat.dtype)
        coo = mat.tocoo()
        banded.add(coo.row, coo.col, coo.data)
        return banded

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def bandwidth(self) -> int:
        return max(self.kl, self.ku)

    def add(self, rows, cols, values) -> None:
        """Scatter-add entries; anything outside the declared band is an error."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values).ravel()
        offset = rows - cols
        outside = (offset > self.kl) | (-offset > self.ku)
        if np.any(outside):
            k = np.flatnonzero(outside)[0]
            raise BandwidthOverflowError(
                f"entry ({rows[k]}, {cols[k]}) lies outside the band kl={self.kl}, ku={self.ku}"
            )
        if np.iscomplexobj(values) and not np.iscomplexobj(self.data):
            self.data = self.data.astype(np.result_type(self.data.dtype, values.dtype))
        np.add.at(self.data, (self.kl + self.ku + offset, cols), values)

    def add_block(self, index: np.ndarray, block: np.ndarray) -> None:
        index = np.asarray(index, dtype=np.int64)
        rows, cols = np.meshgrid(index, index, indexing="ij")
        self.add(rows, cols, block)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n), dtype=self.dtype)
        for off in range(-self.kl, self.ku + 1):
            row = self.kl + self.ku - off
            if off >= 0:
                idx = np.arange(self.n - off)
                dense[idx, idx + off] = self.data[row, off:]
            else:
                idx = np.arange(-off, self.n)
                dense[idx, idx + off] = self.data[row, : self.n + off]
        return dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.zeros(x.shape, dtype=np.result_type(self.dtype, x.dtype))
        for off in range(-self.kl, self.ku + 1):
            diag = self.data[self.kl + self.ku - off]
            if x.ndim == 2:
                diag = diag[:, None]
            if off >= 0:
                y[: self.n - off] += diag[off:] * x[off:]
            else:
                y[-off:] += diag[: self.n + off] * x[: self.n + off]
        return y

    def realized_bandwidth(self) -> int:
        """Largest |i - j| over the nonzero entries actually stored."""
        widest = 0
        for off in range(-self.kl, self.ku + 1):
            if np.any(self.data[self.kl + self.ku - off] != 0):
                widest = max(widest, abs(off))
        return widest

    def trimmed(self) -> "BandedMatrix":
        """Copy whose declared band equals the realized one."""
        width = self.realized_bandwidth()
        out = BandedMatrix.zeros(self.n, width, width, dtype=self.dtype)
        for off in range(-width, width + 1):
            out.data[2 * width - off] = self.data[self.kl + self.ku - off]
        return out


@dataclass(frozen=True)
class LuFactorization:
    """Banded LU factors with partial pivoting (LAPACK ?gbtrf)."""

    n: int
    kl: int
    ku: int
    lu: np.ndarray
    piv: np.ndarray

    @property
    def dtype(self):
        return self.lu.dtype

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        if rhs.shape[0] != self.n:
            raise ValueError(f"right-hand side has {rhs.shape[0]} rows, factorization has {self.n}")
        if np.iscomplexobj(rhs) and not np.iscomplexobj(self.lu):
            return self.solve(rhs.real) + 1j * self.solve(rhs.imag)
        columns = rhs.reshape(self.n, -1).astype(self.dtype, copy=False)
        (gbtrs,) = get_lapack_funcs(("gbtrs",), (self.lu,))
        x, info = gbtrs(self.lu, self.kl, self.ku, columns, self.piv)
        if info != 0:
            raise ValueError(f"gbtrs: illegal argument {-info}")
        return x.reshape(rhs.shape)


def banded_lu_factor(mat: BandedMatrix) -> LuFactorization:
    """Factor a banded matrix in place of a copy; singular pivots raise."""
    (gbtrf,) = get_lapack_funcs(("gbtrf",), (mat.data,))
    lu, piv, info = gbtrf(mat.data, mat.kl, mat.ku)
    if info < 0:
        raise ValueError(f"gbtrf: illegal argument {-info}")
    diagonal = np.abs(lu[mat.kl + mat.ku])
    if info > 0 or (mat.n and diagonal.min() < PIVOT_TOLERANCE):
        index = info - 1 if info > 0 else int(np.argmin(diagonal))
        raise SingularMatrixError(f"zero pivot at row {index} of a {mat.n}x{mat.n} band", pivot_index=index)
    logger.debug("banded LU: n=%d kl=%d ku=%d", mat.n, mat.kl, mat.ku)
    return LuFactorization(mat.n, mat.kl, mat.ku, lu, piv)
