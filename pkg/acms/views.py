from dataclasses import dataclass, field

import numpy as np

from femcore.views import EdgeTrace, SubdomainDofs
from geometry.views import InterfaceGraph
from utils.errors import ConfigurationError, NumericalError


@dataclass(frozen=True, eq=False)
class EdgeModeSet:
    """Leading eigenpairs of the 1D Laplacian on one edge's interior trace space.

    ``modes`` has one L2(e)-orthonormal column per mode, indexed by the interior
    trace positions in along-edge orientation.
    """

    edge: int
    eigenvalues: np.ndarray
    modes: np.ndarray
    key: tuple

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def truncated(self, count: int) -> "EdgeModeSet":
        return EdgeModeSet(self.edge, self.eigenvalues[:count], self.modes[:, :count], self.key)

    def traces(self, trace: EdgeTrace) -> np.ndarray:
        """Mode traces over all trace positions, zero at both endpoints."""
        out = np.zeros((trace.size, self.count))
        out[trace.interior_positions] = self.modes
        return out


@dataclass(frozen=True, eq=False)
class VertexTrace:
    """Nodal values of phi^q on every edge touching vertex q; zero elsewhere on the interface."""

    vertex: int
    values: dict[int, np.ndarray] = field(default_factory=dict)

    def trace(self, trace: EdgeTrace) -> np.ndarray:
        """Values over all trace positions of an adjacent edge; edge dofs vanish on straight edges."""
        out = np.zeros(trace.size)
        if trace.edge in self.values:
            out[: len(trace.nodes)] = self.values[trace.edge]
        return out


@dataclass(frozen=True, eq=False)
class AcmsDofMap:
    """Row-sweep numbering: per row of vertices, each vertex is followed by the
    modes of the horizontal edge to its right; the row's vertical edges follow."""

    graph: InterfaceGraph
    modes_per_edge: int
    vertex_dofs: np.ndarray
    edge_dofs: np.ndarray
    bandwidth_bound: int

    @property
    def size(self) -> int:
        return len(self.vertex_dofs) + self.edge_dofs.size

    def columns(self, j: int) -> np.ndarray:
        """ACMS dofs supported on subdomain j in basis-matrix column order."""
        vertices = self.graph.vertices_of_subdomain(j)
        edges = self.graph.edges_of_subdomain(j)
        return np.concatenate([self.vertex_dofs[vertices], self.edge_dofs[edges].ravel()])


@dataclass(frozen=True, eq=False)
class BasisMatrix:
    """Extended ACMS basis functions restricted to one subdomain, in its local dof numbering."""

    subdomain: SubdomainDofs
    matrix: np.ndarray
    columns: np.ndarray

    @property
    def index(self) -> int:
        return self.subdomain.index

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]


@dataclass(eq=False)
class AcmsSolution:
    coefficients: np.ndarray
    fem_coefficients: np.ndarray | None = None
    num_acms: int = 0
    num_fem: int = 0
    subdomain_sizes: list[int] = field(default_factory=list)
    edge_sizes: list[int] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    residual: float = 0.0

    @property
    def t_tot(self) -> float:
        return sum(self.timings.get(name, 0.0) for name in ("t_bas", "t_ass", "t_sol"))


class ResonanceError(NumericalError):
    """Interior block of a subdomain is singular: kappa^2 hits a local Dirichlet eigenvalue"""

    def __init__(self, message: str, subdomain: int):
        super().__init__(message)
        self.subdomain = subdomain


class TraceMismatchError(NumericalError):
    """Two subdomains disagree on a shared trace dof during reconstruction"""


class ModeCountError(ConfigurationError):
    """More edge modes requested than the edge's trace space holds"""
