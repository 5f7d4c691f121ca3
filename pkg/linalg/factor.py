import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from linalg.banded import BandedMatrix, LuFactorization, banded_lu_factor
from linalg.views import SingularMatrixError

logger = logging.getLogger(__name__)

SolverKind = Literal["banded", "splu"]


def lexicographic_order(points: np.ndarray, tolerance: float = 1e-9) -> np.ndarray:
    """Permutation sorting points by row (y, within tolerance) and then by x."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    rows = np.round(points[:, 1] / tolerance).astype(np.int64)
    return np.lexsort((points[:, 0], rows))


@dataclass(frozen=True)
class SuperLuFactorization:
    lu: spla.SuperLU

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        if np.iscomplexobj(rhs) and self.lu.L.dtype.kind != "c":
            return self.solve(rhs.real) + 1j * self.solve(rhs.imag)
        return self.lu.solve(rhs)


@dataclass(frozen=True)
class PermutedFactorization:
    """Factors of P A P^T; solves in the original numbering."""

    perm: np.ndarray
    inner: LuFactorization | SuperLuFactorization

    @property
    def n(self) -> int:
        return len(self.perm)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        x = self.inner.solve(rhs[self.perm])
        out = np.empty_like(x)
        out[self.perm] = x
        return out


def factorize(mat: sp.spmatrix, solver: SolverKind = "banded", order: np.ndarray | None = None) -> PermutedFactorization:
    """LU factors of a sparse square matrix; ``order`` is the elimination order for the band solver."""
    n = mat.shape[0]
    perm = np.arange(n) if order is None else np.asarray(order)
    if solver == "splu":
        try:
            lu = spla.splu(sp.csc_matrix(mat))
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse LU failed: {exc}") from exc
        return PermutedFactorization(np.arange(n), SuperLuFactorization(lu))
    if solver != "banded":
        raise ValueError(f"unknown solver '{solver}'")
    permuted = sp.csr_matrix(mat)[perm][:, perm]
    banded = BandedMatrix.from_sparse(permuted)
    logger.debug(f"band factorization n={n} kl={banded.kl} ku={banded.ku}")
    return PermutedFactorization(perm, banded_lu_factor(banded))
