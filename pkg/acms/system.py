import logging

import numpy as np

from acms.basis import EdgeModeCache, SubdomainExtension, compute_vertex_trace
from acms.views import AcmsDofMap, AcmsSolution, BasisMatrix, EdgeModeSet, TraceMismatchError, VertexTrace
from femcore import HpSpace, SesquilinearAssembly
from geometry.views import InterfaceGraph
from linalg import BandedMatrix, banded_lu_factor
from utils.timing import time_execution_sync

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-12


def number_dofs(graph: InterfaceGraph, modes_per_edge: int) -> AcmsDofMap:
    """Row sweep from the lower left vertex keeping S_A banded."""
    decomp = graph.decomposition
    jx, jy = decomp.jx, decomp.jy
    vertex_dofs = np.zeros(graph.num_vertices, dtype=np.int64)
    edge_dofs = np.zeros((graph.num_edges, modes_per_edge), dtype=np.int64)
    modes = np.arange(modes_per_edge)
    next_dof = 0
    for iy in range(jy + 1):
        for ix in range(jx + 1):
            vertex_dofs[graph.vertex_index(ix, iy)] = next_dof
            next_dof += 1
            if ix < jx:
                edge_dofs[graph.horizontal_edge_index(ix, iy)] = next_dof + modes
                next_dof += modes_per_edge
        if iy < jy:
            for ix in range(jx + 1):
                edge_dofs[graph.vertical_edge_index(ix, iy)] = next_dof + modes
                next_dof += modes_per_edge
    bound = 3 * (max(jx, jy) + 2) * (modes_per_edge + 1)
    return AcmsDofMap(graph, modes_per_edge, vertex_dofs, edge_dofs, bound)


def boundary_trace_block(
    space: HpSpace,
    j: int,
    vertex_traces: dict[int, VertexTrace],
    edge_modes: dict[int, EdgeModeSet],
) -> np.ndarray:
    """Traces of every basis function supported on subdomain j over its boundary dofs.

    Columns: the four vertices in global order, then the modes of the four edges
    in global order. Each function is zero on edges that do not support it.
    """
    graph = space.graph
    sub = space.subdomains[j]
    vertices = graph.vertices_of_subdomain(j)
    edges = graph.edges_of_subdomain(j)
    count = edge_modes[edges[0]].count
    block = np.zeros((len(sub.boundary), len(vertices) + len(edges) * count))
    for e_pos, e in enumerate(edges):
        trace = space.edge_traces[e]
        rows = np.searchsorted(sub.boundary, trace.dofs)
        for v_pos, q in enumerate(vertices):
            if e in vertex_traces[q].values:
                block[rows, v_pos] = trace.signs * vertex_traces[q].trace(trace)
        start = len(vertices) + e_pos * count
        block[rows, start : start + count] = trace.signs[:, None] * edge_modes[e].traces(trace)
    return block


def build_basis_matrix(
    space: HpSpace,
    extension: SubdomainExtension,
    dofmap: AcmsDofMap,
    modes: EdgeModeCache | dict[int, EdgeModeSet],
    vertex_traces: dict[int, VertexTrace] | None,
    j: int,
) -> BasisMatrix:
    graph = space.graph
    edges = graph.edges_of_subdomain(j)
    if isinstance(modes, EdgeModeCache):
        edge_modes = {e: modes.get(space, e, dofmap.modes_per_edge) for e in edges}
    else:
        edge_modes = {e: modes[e] for e in edges}
    if vertex_traces is None:
        vertex_traces = {q: compute_vertex_trace(graph, q) for q in graph.vertices_of_subdomain(j)}
    traces = boundary_trace_block(space, j, vertex_traces, edge_modes)
    return BasisMatrix(extension.dofs, extension.extend(traces), dofmap.columns(j))


def local_acms_block(assembly: SesquilinearAssembly, basis: BasisMatrix) -> np.ndarray:
    """B_j^T S_F|_{Omega_j} B_j, symmetrized."""
    block = assembly.blocks[basis.index]
    B = basis.matrix
    real = B.T @ (block.operator @ B)
    imag = B.T @ (block.boundary @ B)
    local = real - 1j * imag
    return 0.5 * (local + local.T)


def _dof_multiplicity(space: HpSpace) -> np.ndarray:
    counts = np.zeros(space.ndofs)
    for sub in space.subdomains:
        counts[sub.dofs] += 1
    return counts


@time_execution_sync("assemble_acms")
def assemble_acms(
    space: HpSpace,
    assembly: SesquilinearAssembly,
    dofmap: AcmsDofMap,
    bases: list[BasisMatrix],
    g_F: np.ndarray,
) -> tuple[BandedMatrix, np.ndarray]:
    """S_A and g_A in band storage sized by the numbering's bound; subdomains merge in ascending order."""
    n = dofmap.size
    width = min(dofmap.bandwidth_bound, max(n - 1, 0))
    S_A = BandedMatrix.zeros(n, width, width, dtype=complex)
    g_A = np.zeros(n, dtype=complex)
    multiplicity = _dof_multiplicity(space)
    for basis in sorted(bases, key=lambda b: b.index):
        S_A.add_block(basis.columns, local_acms_block(assembly, basis))
        dofs = basis.subdomain.dofs
        g_A[basis.columns] += basis.matrix.T @ (g_F[dofs] / multiplicity[dofs])
    logger.info(f"assembled S_A: N_A={n}, declared band {width}, realized {S_A.realized_bandwidth()}")
    return S_A, g_A


def solve_acms(S_A: BandedMatrix, g_A: np.ndarray) -> AcmsSolution:
    """Banded LU solve of S_A u_A = g_A; the relative residual is recorded."""
    if not np.any(g_A):
        return AcmsSolution(np.zeros_like(g_A), num_acms=len(g_A))
    u_A = banded_lu_factor(S_A.trimmed()).solve(g_A)
    residual = float(np.linalg.norm(S_A.matvec(u_A) - g_A) / np.linalg.norm(g_A))
    if residual > RESIDUAL_TOLERANCE:
        logger.warning(f"ACMS solve residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}")
    return AcmsSolution(u_A, num_acms=len(g_A), residual=residual)


def reconstruct(space: HpSpace, bases: list[BasisMatrix], dofmap: AcmsDofMap, u_A: np.ndarray) -> np.ndarray:
    """Global FEM coefficients of the ACMS solution; shared trace dofs must agree."""
    out = np.zeros(space.ndofs, dtype=np.result_type(u_A, float))
    written = np.zeros(space.ndofs, dtype=bool)
    for basis in sorted(bases, key=lambda b: b.index):
        local = basis.matrix @ u_A[basis.columns]
        dofs = basis.subdomain.dofs
        seen = written[dofs]
        if seen.any():
            scale = max(1.0, float(np.abs(local).max()))
            jump = float(np.abs(out[dofs[seen]] - local[seen]).max())
            if jump > TRACE_TOLERANCE * scale:
                raise TraceMismatchError(f"subdomain {basis.index} disagrees on shared trace dofs by {jump:.3e}")
        out[dofs] = local
        written[dofs] = True
    return out
