"""Hierarchical H1 basis on the reference triangle and the reference interval.

Vertex functions are the barycentric hats, edge functions integrated Legendre
polynomials in scaled form and interior functions bubbles times Legendre
products. Edge functions on edge {a, b} run from the endpoint with the lower
global node index to the higher one, which keeps traces identical on both
sides of a shared edge.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from femcore.quadrature import P_MAX, quadrature_rule
from utils.errors import ConfigurationError

LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))
# gradients of the barycentric coordinates on the reference triangle
LAMBDA_GRADS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def scaled_legendre(n: int, x: np.ndarray, t: np.ndarray | float = 1.0):
    """t^k P_k(x/t) for k = 0..n with derivatives in x and t."""
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
    P = np.zeros((n + 1,) + x.shape)
    Px = np.zeros_like(P)
    Pt = np.zeros_like(P)
    P[0] = 1.0
    if n >= 1:
        P[1] = x
        Px[1] = 1.0
    for k in range(1, n):
        P[k + 1] = ((2 * k + 1) * x * P[k] - k * t**2 * P[k - 1]) / (k + 1)
        Px[k + 1] = ((2 * k + 1) * (P[k] + x * Px[k]) - k * t**2 * Px[k - 1]) / (k + 1)
        Pt[k + 1] = ((2 * k + 1) * x * Pt[k] - k * (2 * t * P[k - 1] + t**2 * Pt[k - 1])) / (k + 1)
    return P, Px, Pt


def integrated_legendre(p: int, x: np.ndarray, t: np.ndarray | float = 1.0):
    """Scaled integrated Legendre L_m for m = 2..p (row m - 2) with x and t derivatives."""
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
    P, Px, Pt = scaled_legendre(max(p, 1), x, t)
    L = np.zeros((max(p - 1, 0),) + x.shape)
    Lx, Lt = np.zeros_like(L), np.zeros_like(L)
    for m in range(2, p + 1):
        scale = 2 * m - 1
        L[m - 2] = (P[m] - t**2 * P[m - 2]) / scale
        Lx[m - 2] = (Px[m] - t**2 * Px[m - 2]) / scale
        Lt[m - 2] = (Pt[m] - 2 * t * P[m - 2] - t**2 * Pt[m - 2]) / scale
    return L, Lx, Lt


def interval_basis(p: int, s: np.ndarray):
    """1D hierarchical basis on [0, 1]: [1 - s, s, L_2(2s - 1), ..., L_p(2s - 1)] and d/ds."""
    s = np.asarray(s, dtype=float)
    L, Lx, _ = integrated_legendre(p, 2 * s - 1)
    values = np.concatenate([[1 - s, s], L]).T
    derivs = np.concatenate([[-np.ones_like(s), np.ones_like(s)], 2 * Lx]).T
    return values, derivs


@dataclass(frozen=True)
class ElementTables:
    values: np.ndarray
    grads: np.ndarray


class ReferenceElement:
    """Order-p hierarchical triangle; ``code`` bit k flags local edge k as reversed."""

    def __init__(self, p: int):
        if not 1 <= p <= P_MAX:
            raise ConfigurationError(f"polynomial order p={p} outside 1..{P_MAX}")
        self.p = p
        self._tables: dict[tuple[int, int], ElementTables] = {}

    @cached_property
    def num_interior(self) -> int:
        return (self.p - 1) * (self.p - 2) // 2

    @cached_property
    def num_dofs(self) -> int:
        return 3 + 3 * (self.p - 1) + self.num_interior

    def tabulate(self, points: np.ndarray, code: int = 0) -> ElementTables:
        """Values (n, nloc) and reference gradients (n, nloc, 2) at points (n, 2)."""
        points = np.atleast_2d(points)
        xi, eta = points[:, 0], points[:, 1]
        lam = np.stack([1.0 - xi - eta, xi, eta])
        p = self.p
        values = np.zeros((len(points), self.num_dofs))
        grads = np.zeros((len(points), self.num_dofs, 2))

        for k in range(3):
            values[:, k] = lam[k]
            grads[:, k] = LAMBDA_GRADS[k]

        col = 3
        for k, (i, j) in enumerate(LOCAL_EDGES):
            a, b = (j, i) if (code >> k) & 1 else (i, j)
            L, Lx, Lt = integrated_legendre(p, lam[b] - lam[a], lam[a] + lam[b])
            for m in range(p - 1):
                d_a = -Lx[m] + Lt[m]
                d_b = Lx[m] + Lt[m]
                values[:, col] = L[m]
                grads[:, col] = d_a[:, None] * LAMBDA_GRADS[a] + d_b[:, None] * LAMBDA_GRADS[b]
                col += 1

        if p >= 3:
            S, Sx, St = scaled_legendre(p - 3, lam[1] - lam[0], lam[0] + lam[1])
            Q, Qx, _ = scaled_legendre(p - 3, 2 * lam[2] - 1)
            bubble = lam[0] * lam[1] * lam[2]
            for i in range(p - 2):
                for j in range(p - 2 - i):
                    product = S[i] * Q[j]
                    d0 = lam[1] * lam[2] * product + bubble * (-Sx[i] + St[i]) * Q[j]
                    d1 = lam[0] * lam[2] * product + bubble * (Sx[i] + St[i]) * Q[j]
                    d2 = lam[0] * lam[1] * product + bubble * S[i] * 2 * Qx[j]
                    values[:, col] = bubble * product
                    grads[:, col] = (
                        d0[:, None] * LAMBDA_GRADS[0] + d1[:, None] * LAMBDA_GRADS[1] + d2[:, None] * LAMBDA_GRADS[2]
                    )
                    col += 1
        return ElementTables(values, grads)

    def quadrature_tables(self, degree: int, code: int) -> ElementTables:
        key = (degree, code)
        if key not in self._tables:
            self._tables[key] = self.tabulate(quadrature_rule(degree).points, code)
        return self._tables[key]
