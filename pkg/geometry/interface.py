import numpy as np

from geometry.validation import GEOMETRY_TOLERANCE
from geometry.views import InterfaceEdge, InterfaceGraph, Mesh, MeshConformityError


def _line_run(mesh: Mesh, axis: int, level: float, lo: float, hi: float, tol: float) -> np.ndarray:
    """Mesh nodes on the axis-aligned segment, sorted along it."""
    along = 1 - axis
    coords = mesh.nodes
    mask = (np.abs(coords[:, axis] - level) < tol) & (coords[:, along] > lo - tol) & (coords[:, along] < hi + tol)
    run = np.flatnonzero(mask)
    return run[np.argsort(coords[run, along], kind="stable")]


def extract_interface(mesh: Mesh) -> InterfaceGraph:
    """Decomposition vertices and edges with the mesh nodes lying on each edge."""
    decomp = mesh.decomposition
    tol = GEOMETRY_TOLERANCE * decomp.subdomain_size
    jx, jy = decomp.jx, decomp.jy

    vertices = np.array([[decomp.grid_x(ix), decomp.grid_y(iy)] for iy in range(jy + 1) for ix in range(jx + 1)])
    vertex_nodes = np.empty(len(vertices), dtype=np.int64)
    for q, point in enumerate(vertices):
        hit = np.flatnonzero(np.all(np.abs(mesh.nodes - point) < tol, axis=1))
        if len(hit) != 1:
            raise MeshConformityError(f"decomposition vertex {q} at {tuple(point)} is not a unique mesh node", entity=q)
        vertex_nodes[q] = hit[0]

    def vertex(ix, iy):
        return iy * (jx + 1) + ix

    def make_edge(index, v0, v1, run, subdomains, horizontal):
        if len(run) < 2 or run[0] != vertex_nodes[v0] or run[-1] != vertex_nodes[v1]:
            raise MeshConformityError(f"decomposition edge {index} does not end in its vertices", entity=index)
        if np.any(mesh.edge_index(run[:-1], run[1:]) < 0):
            raise MeshConformityError(f"decomposition edge {index} is not a union of mesh edges", entity=index)
        steps = np.linalg.norm(np.diff(mesh.nodes[run], axis=0), axis=1)
        arclength = np.concatenate([[0.0], np.cumsum(steps)])
        return InterfaceEdge(index, (v0, v1), run, arclength, tuple(subdomains), horizontal)

    edges = []
    for iy in range(jy + 1):
        y = decomp.grid_y(iy)
        for ix in range(jx):
            run = _line_run(mesh, 1, y, decomp.grid_x(ix), decomp.grid_x(ix + 1), tol)
            owners = [decomp.subdomain_index(ix, k) for k in (iy - 1, iy) if 0 <= k < jy]
            edges.append(make_edge(len(edges), vertex(ix, iy), vertex(ix + 1, iy), run, owners, True))
        if iy == jy:
            break
        for ix in range(jx + 1):
            run = _line_run(mesh, 0, decomp.grid_x(ix), decomp.grid_y(iy), decomp.grid_y(iy + 1), tol)
            owners = [decomp.subdomain_index(k, iy) for k in (ix - 1, ix) if 0 <= k < jx]
            edges.append(make_edge(len(edges), vertex(ix, iy), vertex(ix, iy + 1), run, owners, False))
    return InterfaceGraph(decomp, vertices, vertex_nodes, edges)
