import numpy as np
import scipy.linalg as sla

from linalg.banded import PIVOT_TOLERANCE
from linalg.views import NotPositiveDefiniteError, SingularMatrixError
from utils.errors import ConfigurationError


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its entry of largest magnitude is positive."""
    if vectors.size == 0:
        return vectors
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def generalized_eig_symmetric(K: np.ndarray, M: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``count`` eigenpairs of K v = lambda M v, M-orthonormal, sign-normalised.

    The full spectrum is computed and then truncated, so asking for more modes
    later reproduces the earlier ones bit for bit.
    """
    n = K.shape[0]
    if not 1 <= count <= n:
        raise ConfigurationError(f"requested {count} eigenpairs of a {n}-dimensional problem")
    try:
        values, vectors = sla.eigh(K, M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"mass matrix is not positive definite: {exc}") from exc
    return values[:count], fix_signs(vectors[:, :count])


def dense_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    lu, piv = sla.lu_factor(A, check_finite=True)
    diagonal = np.abs(np.diag(lu))
    if diagonal.size and diagonal.min() < PIVOT_TOLERANCE:
        raise SingularMatrixError(f"dense matrix is singular (pivot {int(np.argmin(diagonal))})")
    return sla.lu_solve((lu, piv), b)
