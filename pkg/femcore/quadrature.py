import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from femcore.views import QuadratureError

P_MAX = 10
MAX_DEGREE = 2 * P_MAX + 2


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


def _gauss_unit(count: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def quadrature_rule(degree: int, shape: str = "triangle") -> QuadratureRule:
    """Positive-weight rule exact for polynomials of total degree ``degree``.

    Triangle rules live on {x, y >= 0, x + y <= 1} (collapsed Gauss-Legendre);
    interval rules on [0, 1].
    """
    if not 0 <= degree <= MAX_DEGREE:
        raise QuadratureError(f"quadrature degree {degree} outside the supported range 0..{MAX_DEGREE}")
    if shape == "interval":
        points, weights = _gauss_unit(max(1, math.ceil((degree + 1) / 2)))
        return QuadratureRule(points, weights)
    if shape != "triangle":
        raise QuadratureError(f"unknown reference shape '{shape}'")
    if degree <= 1:
        return QuadratureRule(np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5]))
    u, wu = _gauss_unit(math.ceil((degree + 2) / 2))
    uu, vv = np.meshgrid(u, u, indexing="ij")
    weights = np.outer(wu * (1.0 - u), wu).ravel()
    points = np.column_stack([uu.ravel(), (vv * (1.0 - uu)).ravel()])
    return QuadratureRule(points, weights)
