"""Dense brute-force counterparts of the ACMS stages for small instances.

Nothing here goes through the ACMS assembly path: basis functions are built
as explicit global FEM vectors and the Galerkin matrix as Phi^T S_F Phi.
"""

import logging

import numpy as np
import scipy.linalg as sla

from femcore import HpSpace, assemble_fem, assemble_rhs, edge_trace_matrices, interval_basis, quadrature_rule
from geometry.views import InterfaceGraph
from problem import HelmholtzProblem
from reference.views import ORACLE_MAX_ACMS, ORACLE_MAX_FEM, CapExceededError, OracleResult

logger = logging.getLogger(__name__)

ROW_DECIMALS = 9


def _first_significant_positive(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for col in range(vectors.shape[1]):
        v = vectors[:, col]
        threshold = 1e-6 * np.abs(v).max()
        lead = next(i for i in range(len(v)) if abs(v[i]) > threshold)
        if v[lead] < 0:
            out[:, col] = -v
    return out


def _edge_mode_columns(space: HpSpace, nodes: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Global dofs of the interior trace of an edge and its first ``count`` modes in global orientation."""
    mesh, p = space.mesh, space.p
    rule = quadrature_rule(2 * p, "interval")
    values, derivs = interval_basis(p, rule.points)
    k = len(nodes) - 1
    n = (k + 1) + k * (p - 1)
    stiffness = np.zeros((n, n))
    mass = np.zeros((n, n))
    dofs = np.zeros(n, dtype=np.int64)
    signs = np.ones(n)
    dofs[: k + 1] = nodes
    for s in range(k):
        a, b = nodes[s], nodes[s + 1]
        length = float(np.hypot(*(mesh.nodes[b] - mesh.nodes[a])))
        edge = int(mesh.edge_index(a, b))
        pos = np.concatenate([[s, s + 1], k + 1 + s * (p - 1) + np.arange(p - 1)])
        stiffness[np.ix_(pos, pos)] += derivs.T @ (rule.weights[:, None] * derivs) / length
        mass[np.ix_(pos, pos)] += values.T @ (rule.weights[:, None] * values) * length
        dofs[pos[2:]] = mesh.num_nodes + edge * (p - 1) + np.arange(p - 1)
        if a > b:
            signs[pos[2:]] = (-1.0) ** np.arange(2, p + 1)
    interior = np.concatenate([np.arange(1, k), np.arange(k + 1, n)])
    _, vectors = sla.eigh(stiffness[np.ix_(interior, interior)], mass[np.ix_(interior, interior)], subset_by_index=[0, count - 1])
    vectors = _first_significant_positive(vectors)
    return dofs[interior], signs[interior, None] * vectors


def row_sweep_numbering(graph: InterfaceGraph, modes_per_edge: int) -> tuple[np.ndarray, np.ndarray, int]:
    """ACMS dof offsets from the interface coordinates.

    Rows run bottom to top; a row holds its vertices, each followed by the
    horizontal edge to its right, then the vertical edges rising from it.
    """
    entities = []
    for q, (x, y) in enumerate(graph.vertices):
        entities.append(((round(float(y), ROW_DECIMALS), 0, float(x)), -1, q))
    for edge in graph.edges:
        (xa, ya), (xb, yb) = graph.vertices[list(edge.vertices)]
        low = round(float(min(ya, yb)), ROW_DECIMALS)
        key = (low, 0, 0.5 * float(xa + xb)) if edge.horizontal else (low, 1, float(xa))
        entities.append((key, edge.index, -1))
    vertex_dofs = np.zeros(graph.num_vertices, dtype=np.int64)
    edge_dofs = np.zeros((graph.num_edges, modes_per_edge), dtype=np.int64)
    offset = 0
    for _, edge, q in sorted(entities, key=lambda item: item[0]):
        if edge < 0:
            vertex_dofs[q] = offset
            offset += 1
        else:
            edge_dofs[edge] = offset + np.arange(modes_per_edge)
            offset += modes_per_edge
    return vertex_dofs, edge_dofs, offset


def oracle_acms_dense(
    space: HpSpace,
    problem: HelmholtzProblem,
    modes_per_edge: int,
    max_acms: int = ORACLE_MAX_ACMS,
    max_fem: int = ORACLE_MAX_FEM,
) -> OracleResult:
    """Dense S_A, g_A and u_A from explicitly extended global basis vectors."""
    graph = space.graph
    vertex_dofs, edge_dofs, num_acms = row_sweep_numbering(graph, modes_per_edge)
    if num_acms > max_acms or space.ndofs > max_fem:
        raise CapExceededError(f"oracle limited to N_A <= {max_acms}, N_F <= {max_fem}; got {num_acms}, {space.ndofs}")

    traces = np.zeros((space.ndofs, num_acms))
    for edge in graph.edges:
        points = space.mesh.nodes[edge.nodes]
        distance = np.linalg.norm(points - points[0], axis=1)
        fraction = distance / distance[-1]
        start, end = edge.vertices
        traces[edge.nodes, vertex_dofs[start]] = 1.0 - fraction
        traces[edge.nodes, vertex_dofs[end]] = fraction
        dofs, modes = _edge_mode_columns(space, edge.nodes, modes_per_edge)
        traces[np.ix_(dofs, edge_dofs[edge.index])] = modes

    assembly = assemble_fem(space, problem)
    operator = (assembly.stiffness - assembly.mass).tocsr()
    basis = traces.copy()
    for sub in space.subdomains:
        boundary_traces = traces[sub.boundary]
        columns = np.flatnonzero(np.any(boundary_traces != 0, axis=0))
        if len(sub.interior) == 0 or len(columns) == 0:
            continue
        K_II = operator[sub.interior][:, sub.interior].toarray()
        K_IB = operator[sub.interior][:, sub.boundary].toarray()
        basis[np.ix_(sub.interior, columns)] = -sla.solve(K_II, K_IB @ boundary_traces[:, columns])

    system = basis.T @ (assembly.system @ basis)
    rhs = basis.T @ assemble_rhs(space, problem)
    coefficients = sla.solve(system, rhs) if rhs.any() else np.zeros(num_acms, dtype=complex)
    logger.info(f"dense oracle: N_A={num_acms}, N_F={space.ndofs}")
    return OracleResult(system, rhs, coefficients, basis)


def harmonic_vertex_trace(space: HpSpace, q: int) -> dict[int, np.ndarray]:
    """Edgewise discrete-harmonic trace of the vertex function phi^q on every adjacent edge."""
    out = {}
    for edge in space.graph.edges_of_vertex(q):
        trace = space.edge_traces[edge.index]
        stiffness, _ = edge_trace_matrices(trace)
        start, end = trace.endpoints
        values = np.zeros(trace.size)
        values[start if edge.vertices[0] == q else end] = 1.0
        interior = trace.interior_positions
        ends = np.array([start, end])
        values[interior] = -sla.solve(stiffness[np.ix_(interior, interior)], stiffness[np.ix_(interior, ends)] @ values[ends])
        out[edge.index] = values
    return out
