from dataclasses import dataclass

import numpy as np

from femcore import HpSpace
from utils.errors import ConfigurationError

DIRECT_SOLVE_CAP = 400_000
ORACLE_MAX_ACMS = 2_000
ORACLE_MAX_FEM = 50_000


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    coefficients: np.ndarray
    space: HpSpace
    residual: float

    @property
    def num_fem(self) -> int:
        return self.space.ndofs


@dataclass(frozen=True, eq=False)
class OracleResult:
    system: np.ndarray
    rhs: np.ndarray
    coefficients: np.ndarray
    basis: np.ndarray

    @property
    def fem_coefficients(self) -> np.ndarray:
        return self.basis @ self.coefficients


class CapExceededError(ConfigurationError):
    """Problem too large for a direct or dense solve"""
