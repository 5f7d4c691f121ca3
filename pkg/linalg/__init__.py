from linalg.banded import BandedMatrix, LuFactorization, banded_lu_factor
from linalg.dense import dense_solve, fix_signs, generalized_eig_symmetric
from linalg.factor import PermutedFactorization, SolverKind, factorize, lexicographic_order
from linalg.sparse import bandwidths, csr_from_triplets
from linalg.views import (
    BandwidthOverflowError,
    NotPositiveDefiniteError,
    SingularMatrixError,
    TripletIndexError,
)

__all__ = [
    "BandedMatrix",
    "LuFactorization",
    "banded_lu_factor",
    "dense_solve",
    "fix_signs",
    "generalized_eig_symmetric",
    "PermutedFactorization",
    "SolverKind",
    "factorize",
    "lexicographic_order",
    "bandwidths",
    "csr_from_triplets",
    "BandwidthOverflowError",
    "NotPositiveDefiniteError",
    "SingularMatrixError",
    "TripletIndexError",
]
