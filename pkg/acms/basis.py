import logging
import threading
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from acms.views import EdgeModeSet, ModeCountError, ResonanceError, VertexTrace
from femcore import HpSpace, SesquilinearAssembly, edge_trace_matrices
from femcore.views import SubdomainDofs
from geometry.views import InterfaceGraph
from linalg import PermutedFactorization, SingularMatrixError, SolverKind, factorize, generalized_eig_symmetric, lexicographic_order
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

KEY_DECIMALS = 13
SIGN_THRESHOLD = 1e-6


def edge_reuse_key(space: HpSpace, edge: int) -> tuple:
    """Edges with equal keys carry identical 1D discretizations."""
    lengths = space.edge_traces[edge].segment_lengths
    return (space.p, round(float(lengths.sum()), KEY_DECIMALS), tuple(np.round(lengths, KEY_DECIMALS)))


def orient_modes(vectors: np.ndarray) -> np.ndarray:
    """Flip every column so that its first entry above SIGN_THRESHOLD times its maximum is positive.

    Rows run along the edge, so mirrored entries of antisymmetric modes never tie.
    """
    if vectors.size == 0:
        return vectors
    magnitude = np.abs(vectors)
    first = (magnitude > SIGN_THRESHOLD * magnitude.max(axis=0)).argmax(axis=0)
    return vectors * np.sign(vectors[first, np.arange(vectors.shape[1])])


def compute_edge_modes(space: HpSpace, edge: int, count: int) -> EdgeModeSet:
    """First ``count`` L2-normalised eigenpairs of the edge Laplacian with zero endpoint values."""
    trace = space.edge_traces[edge]
    interior = trace.interior_positions
    if count > len(interior):
        raise ModeCountError(
            f"edge {edge} holds only {len(interior)} interior trace functions but I_E={count} modes were requested; "
            "enrich the underlying space (smaller h or larger p)"
        )
    if count < 1:
        raise ConfigurationError(f"I_E must be positive, got {count}")
    stiffness, mass = edge_trace_matrices(trace)
    values, vectors = generalized_eig_symmetric(stiffness[np.ix_(interior, interior)], mass[np.ix_(interior, interior)], count)
    return EdgeModeSet(edge, values, orient_modes(vectors), edge_reuse_key(space, edge))


class EdgeModeCache:
    """Edge modes shared by every edge with the same reuse key, computed once per key."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[tuple, EdgeModeSet] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, space: HpSpace, edge: int, count: int) -> EdgeModeSet:
        key = edge_reuse_key(space, edge)
        with self._lock:
            cached = self._entries.get(key)
            if cached is not None and cached.count >= count:
                self.hits += 1
                return EdgeModeSet(edge, cached.eigenvalues[:count], cached.modes[:, :count], key)
        modes = compute_edge_modes(space, edge, count)
        with self._lock:
            self.misses += 1
            current = self._entries.get(key)
            if current is None or current.count < count:
                self._entries[key] = modes
        return modes

    def stats(self) -> dict[str, int]:
        return {"keys": len(self._entries), "hits": self.hits, "misses": self.misses}


def compute_vertex_trace(graph: InterfaceGraph, q: int) -> VertexTrace:
    """phi^q on the interface: linear from 1 at q to 0 along each adjacent straight edge."""
    values = {}
    for edge in graph.edges_of_vertex(q):
        fraction = edge.arclength / edge.length
        values[edge.index] = 1.0 - fraction if edge.vertices[0] == q else fraction
    return VertexTrace(q, values)


@dataclass(frozen=True, eq=False)
class SubdomainExtension:
    """Discrete Helmholtz-harmonic lifting of boundary traces into one subdomain.

    Positions refer to the subdomain's local dof numbering.
    """

    dofs: SubdomainDofs
    interior: np.ndarray
    boundary: np.ndarray
    factorization: PermutedFactorization | None
    coupling: sp.csr_matrix

    @property
    def index(self) -> int:
        return self.dofs.index

    def extend(self, trace: np.ndarray) -> np.ndarray:
        trace = np.asarray(trace)
        out = np.zeros((self.dofs.size,) + trace.shape[1:], dtype=trace.dtype)
        out[self.boundary] = trace
        if self.factorization is not None:
            out[self.interior] = -self.factorization.solve(self.coupling @ trace)
        return out


def build_extension(space: HpSpace, assembly: SesquilinearAssembly, j: int, solver: SolverKind = "banded") -> SubdomainExtension:
    """Factor K_II = (A_j - M_j) on the interior dofs of subdomain j once."""
    block = assembly.blocks[j]
    sub = block.dofs
    interior = sub.local(sub.interior)
    boundary = sub.local(sub.boundary)
    operator = block.operator
    coupling = operator[interior][:, boundary].tocsr()
    factorization = None
    if len(interior):
        order = lexicographic_order(space.dof_locations[sub.interior])
        try:
            factorization = factorize(operator[interior][:, interior], solver, order)
        except SingularMatrixError as exc:
            raise ResonanceError(f"interior block of subdomain {j} is singular (kappa^2 is a local eigenvalue): {exc}", j) from exc
    return SubdomainExtension(sub, interior, boundary, factorization, coupling)


def extend_trace(ext: SubdomainExtension, trace: np.ndarray) -> np.ndarray:
    """Subdomain coefficient vector(s) of the extension of boundary trace(s)."""
    trace = np.asarray(trace)
    if trace.shape[0] != len(ext.boundary):
        raise ConfigurationError(f"trace has {trace.shape[0]} entries, subdomain {ext.index} has {len(ext.boundary)} boundary dofs")
    return ext.extend(trace)
