import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sp

from femcore.basis import interval_basis
from femcore.quadrature import quadrature_rule
from femcore.space import HpSpace
from femcore.views import SesquilinearAssembly, SubdomainBlock, SubdomainDofs
from linalg import csr_from_triplets
from problem import HelmholtzProblem, eval_g
from utils.timing import time_execution_sync

logger = logging.getLogger(__name__)

CHUNK = 1024


def symmetrized(mat: sp.spmatrix) -> sp.csr_matrix:
    """Mirror the upper triangle so that mat == mat.T holds bit for bit."""
    upper = sp.triu(mat, format="csr")
    out = (upper + sp.triu(mat, k=1, format="csr").T).tocsr()
    out.sort_indices()
    return out


def _volume_terms(space: HpSpace, problem: HelmholtzProblem, triangles: np.ndarray, with_coefficients: bool = True):
    """Element stiffness and mass blocks (len(triangles), nloc, nloc) grouped by orientation code."""
    degree = 2 * space.p
    rule = quadrature_rule(degree)
    _, det, inv_t = space.jacobians
    codes = space.orientation[triangles]
    for code in np.unique(codes):
        tables = space.element.quadrature_tables(degree, int(code))
        selected = triangles[codes == code]
        for start in range(0, len(selected), CHUNK):
            t = selected[start : start + CHUNK]
            weights = rule.weights[None, :] * np.abs(det[t])[:, None]
            if with_coefficients:
                points = space.map_points(t, rule.points)
                a = problem.a_values(space.mesh.materials[t], points)
                kappa_sq = problem.kappa_sq_values(space.mesh.materials[t], points)
            else:
                a = kappa_sq = np.ones_like(weights)
            grads = np.einsum("tab,qib->tqia", inv_t[t], tables.grads)
            stiffness = np.einsum("tq,tqia,tqja->tij", weights * a, grads, grads, optimize=True)
            mass = np.einsum("tq,qi,qj->tij", weights * kappa_sq, tables.values, tables.values, optimize=True)
            yield t, stiffness, mass


def _boundary_segments(space: HpSpace, problem: HelmholtzProblem, segments: np.ndarray):
    """Per-segment boundary mass (with omega beta) and load, plus the segment dofs."""
    mesh, p = space.mesh, space.p
    rule = quadrature_rule(2 * p + 1, "interval")
    values, _ = interval_basis(p, rule.points)
    reference_mass = values.T @ (rule.weights[:, None] * values)

    pairs = np.sort(mesh.bsegments[segments], axis=1)
    lo, hi = pairs[:, 0], pairs[:, 1]
    edges = mesh.edge_index(lo, hi)
    dofs = np.hstack([pairs, space.edge_dofs(edges)])

    tangent = mesh.nodes[hi] - mesh.nodes[lo]
    lengths = np.linalg.norm(tangent, axis=1)
    normals = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / lengths[:, None]
    owner, _ = space.boundary_owners
    apex = mesh.centroids[owner[segments]]
    inward = np.einsum("sa,sa->s", normals, apex - mesh.nodes[lo]) > 0
    normals[inward] *= -1.0

    markers = mesh.bmarkers[segments]
    beta = problem.beta_values(markers)
    blocks = (problem.omega * beta * lengths)[:, None, None] * reference_mass

    points = mesh.nodes[lo][:, None, :] + rule.points[None, :, None] * tangent[:, None, :]
    nq = len(rule.weights)
    g = eval_g(
        problem,
        points.reshape(-1, 2),
        np.repeat(normals, nq, axis=0),
        np.repeat(markers, nq),
    ).reshape(len(segments), nq)
    loads = lengths[:, None] * ((g * rule.weights) @ values)
    return dofs, blocks, loads


def _scatter(sub: SubdomainDofs, blocks: list[tuple[np.ndarray, np.ndarray]]):
    if not blocks:
        return (np.zeros(0, dtype=np.int64),) * 2 + (np.zeros(0),)
    rows, cols, vals = [], [], []
    for dofs, values in blocks:
        local = sub.local(dofs)
        rows.append(np.broadcast_to(local[:, :, None], values.shape).ravel())
        cols.append(np.broadcast_to(local[:, None, :], values.shape).ravel())
        vals.append(values.ravel())
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def assemble_subdomain(space: HpSpace, problem: HelmholtzProblem, j: int) -> SubdomainBlock:
    """A_j, M_j and the boundary matrix of subdomain j in its local numbering."""
    sub = space.subdomains[j]
    n = sub.size
    stiffness, mass = [], []
    for t, k_blocks, m_blocks in _volume_terms(space, problem, sub.triangles):
        stiffness.append((space.element_dofs[t], k_blocks))
        mass.append((space.element_dofs[t], m_blocks))

    owner, _ = space.boundary_owners
    segments = np.flatnonzero(space.mesh.subdomains[owner] == j)
    boundary = []
    if len(segments):
        dofs, b_blocks, _ = _boundary_segments(space, problem, segments)
        boundary.append((dofs, b_blocks))

    return SubdomainBlock(
        sub,
        symmetrized(csr_from_triplets(n, n, _scatter(sub, stiffness))),
        symmetrized(csr_from_triplets(n, n, _scatter(sub, mass))),
        symmetrized(csr_from_triplets(n, n, _scatter(sub, boundary))),
    )


def _to_global(blocks: list[SubdomainBlock], attribute: str, n: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for block in blocks:
        coo = getattr(block, attribute).tocoo()
        rows.append(block.dofs.dofs[coo.row])
        cols.append(block.dofs.dofs[coo.col])
        vals.append(coo.data)
    return symmetrized(csr_from_triplets(n, n, (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))))


@time_execution_sync("assemble_fem")
def assemble_fem(space: HpSpace, problem: HelmholtzProblem, threads: int = 1) -> SesquilinearAssembly:
    """Assemble S_F = A - M - i B with per-subdomain real blocks.

    Subdomains are assembled concurrently; the global merge runs in subdomain order.
    """
    J = space.mesh.decomposition.J
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda j: assemble_subdomain(space, problem, j), range(J)))
    else:
        blocks = [assemble_subdomain(space, problem, j) for j in range(J)]

    n = space.ndofs
    stiffness = _to_global(blocks, "stiffness", n)
    mass = _to_global(blocks, "mass", n)
    boundary = _to_global(blocks, "boundary", n)
    system = symmetrized((stiffness - mass).astype(complex) - 1j * boundary)
    logger.info(f"assembled S_F: N_F={n}, nnz={system.nnz}")
    return SesquilinearAssembly(blocks, stiffness, mass, boundary, system)


def assemble_rhs(space: HpSpace, problem: HelmholtzProblem) -> np.ndarray:
    """g_F with G(v) = (g, v) on the boundary, integrated with degree 2p + 1."""
    out = np.zeros(space.ndofs, dtype=complex)
    if problem.source.kind == "zero" or len(space.mesh.bsegments) == 0:
        return out
    dofs, _, loads = _boundary_segments(space, problem, np.arange(len(space.mesh.bsegments)))
    np.add.at(out, dofs.ravel(), loads.ravel())
    return out


def assemble_mass_matrix(space: HpSpace) -> sp.csr_matrix:
    """Unweighted global L2 Gram matrix."""
    rows, cols, vals = [], [], []
    for t, _, mass in _volume_terms(space, None, np.arange(space.mesh.num_triangles), with_coefficients=False):
        dofs = space.element_dofs[t]
        rows.append(np.broadcast_to(dofs[:, :, None], mass.shape).ravel())
        cols.append(np.broadcast_to(dofs[:, None, :], mass.shape).ravel())
        vals.append(mass.ravel())
    n = space.ndofs
    return symmetrized(csr_from_triplets(n, n, (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))))


def element_matrices(space: HpSpace, problem: HelmholtzProblem, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Element stiffness and mass blocks in the order of ``triangles``."""
    triangles = np.asarray(triangles, dtype=np.int64)
    n = space.element.num_dofs
    stiffness = np.zeros((len(triangles), n, n))
    mass = np.zeros((len(triangles), n, n))
    order = np.argsort(triangles)
    for t, k_blocks, m_blocks in _volume_terms(space, problem, triangles):
        pos = order[np.searchsorted(triangles[order], t)]
        stiffness[pos] = k_blocks
        mass[pos] = m_blocks
    return stiffness, mass
