from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from utils.errors import ConfigurationError, NumericalError


@dataclass(frozen=True, eq=False)
class SubdomainDofs:
    """Global dofs touching subdomain j, sorted; ``boundary`` lives on the subdomain's edges."""

    index: int
    triangles: np.ndarray
    dofs: np.ndarray
    boundary: np.ndarray
    interior: np.ndarray

    @property
    def size(self) -> int:
        return len(self.dofs)

    def local(self, global_dofs: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.dofs, global_dofs)


@dataclass(frozen=True, eq=False)
class EdgeTrace:
    """Trace space of one decomposition edge in its along-edge orientation.

    Positions 0..k hold the vertex dofs of the edge nodes in order, followed by
    the (p - 1) edge dofs of each of the k segments. ``signs`` maps the global
    edge-function orientation onto the along-edge one.
    """

    edge: int
    dofs: np.ndarray
    signs: np.ndarray
    nodes: np.ndarray
    segment_lengths: np.ndarray
    p: int

    @property
    def size(self) -> int:
        return len(self.dofs)

    @property
    def num_segments(self) -> int:
        return len(self.segment_lengths)

    @property
    def endpoints(self) -> tuple[int, int]:
        return 0, self.num_segments

    @property
    def interior_positions(self) -> np.ndarray:
        k = self.num_segments
        return np.concatenate([np.arange(1, k), np.arange(k + 1, self.size)])

    def segment_positions(self, s: int) -> np.ndarray:
        """Trace positions of the 1D basis [1 - t, t, L_2, ..., L_p] on segment s."""
        k = self.num_segments
        start = k + 1 + s * (self.p - 1)
        return np.concatenate([[s, s + 1], np.arange(start, start + self.p - 1)])


@dataclass(frozen=True, eq=False)
class SubdomainBlock:
    """Real local matrices of one subdomain in its local dof numbering."""

    dofs: SubdomainDofs
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary: sp.csr_matrix

    @property
    def operator(self) -> sp.csr_matrix:
        """K_j = A_j - M_j, the real operator behind the local extensions."""
        return (self.stiffness - self.mass).tocsr()

    @property
    def system(self) -> sp.csr_matrix:
        return (self.stiffness - self.mass - 1j * self.boundary).tocsr()


@dataclass(frozen=True, eq=False)
class SesquilinearAssembly:
    """Per-subdomain blocks; the global matrices are only present after a full assembly."""

    blocks: list[SubdomainBlock]
    stiffness: sp.csr_matrix | None = None
    mass: sp.csr_matrix | None = None
    boundary: sp.csr_matrix | None = None
    system: sp.csr_matrix | None = None


class QuadratureError(ConfigurationError):
    """Requested quadrature degree or shape is not supported"""


class PointLocationError(NumericalError):
    """A point lies outside every triangle of the mesh"""

    def __init__(self, message: str, points: np.ndarray | None = None):
        super().__init__(message)
        self.points = points


class MeshMismatchError(ConfigurationError):
    """Two fields live on meshes that are neither identical nor nested"""
