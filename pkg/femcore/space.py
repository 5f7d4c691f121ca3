import logging
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from femcore.basis import ReferenceElement
from femcore.views import EdgeTrace, SubdomainDofs
from geometry.interface import extract_interface
from geometry.views import InterfaceGraph, Mesh

logger = logging.getLogger(__name__)


class HpSpace:
    """Continuous order-p hierarchical space on a mesh.

    Global numbering: mesh vertices first, then p - 1 dofs per mesh edge
    (edge e, order m at N_v + e(p - 1) + m - 2), then the interior bubbles of
    each triangle.
    """

    def __init__(self, mesh: Mesh, graph: InterfaceGraph, p: int):
        self.element = ReferenceElement(p)
        self.mesh = mesh
        self.graph = graph
        self.p = p

    @property
    def num_vertex_dofs(self) -> int:
        return self.mesh.num_nodes

    @property
    def num_edge_dofs(self) -> int:
        return len(self.mesh.edges) * (self.p - 1)

    @property
    def num_interior_dofs(self) -> int:
        return self.mesh.num_triangles * self.element.num_interior

    @property
    def ndofs(self) -> int:
        return self.num_vertex_dofs + self.num_edge_dofs + self.num_interior_dofs

    def edge_dofs(self, edges: np.ndarray) -> np.ndarray:
        edges = np.asarray(edges, dtype=np.int64)
        return self.num_vertex_dofs + edges[..., None] * (self.p - 1) + np.arange(self.p - 1)

    @cached_property
    def orientation(self) -> np.ndarray:
        """Per-triangle code; bit k set when local edge (v_k, v_{k+1}) runs against ascending node order."""
        t = self.mesh.triangles
        reversed_edges = t > np.roll(t, -1, axis=1)
        return (reversed_edges * np.array([1, 2, 4])).sum(axis=1)

    @cached_property
    def element_dofs(self) -> np.ndarray:
        mesh, nb = self.mesh, self.element.num_interior
        edge_part = self.edge_dofs(mesh.triangle_edges).reshape(mesh.num_triangles, -1)
        offset = self.num_vertex_dofs + self.num_edge_dofs
        interior = offset + np.arange(mesh.num_triangles)[:, None] * nb + np.arange(nb)
        return np.hstack([mesh.triangles, edge_part, interior]).astype(np.int64)

    @cached_property
    def jacobians(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(J, det J, J^-T) of the affine maps from the reference triangle."""
        p = self.mesh.nodes[self.mesh.triangles]
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv_t = np.empty_like(jac)
        inv_t[:, 0, 0] = jac[:, 1, 1] / det
        inv_t[:, 0, 1] = -jac[:, 1, 0] / det
        inv_t[:, 1, 0] = -jac[:, 0, 1] / det
        inv_t[:, 1, 1] = jac[:, 0, 0] / det
        return jac, det, inv_t

    def map_points(self, triangles: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
        """Physical images (len(triangles), len(ref_points), 2) of reference points."""
        jac = self.jacobians[0][triangles]
        origin = self.mesh.nodes[self.mesh.triangles[triangles, 0]]
        return origin[:, None, :] + np.einsum("tab,qb->tqa", jac, ref_points)

    @cached_property
    def boundary_owners(self) -> tuple[np.ndarray, np.ndarray]:
        """Owning triangle and its local edge for every boundary segment."""
        mesh = self.mesh
        owner = np.full(len(mesh.edges), -1, dtype=np.int64)
        owner[mesh.triangle_edges.ravel()] = np.arange(3 * mesh.num_triangles)
        seg_edges = mesh.edge_index(mesh.bsegments[:, 0], mesh.bsegments[:, 1])
        pos = owner[seg_edges]
        return pos // 3, pos % 3

    @cached_property
    def subdomains(self) -> list[SubdomainDofs]:
        mesh, graph = self.mesh, self.graph
        out = []
        for j in range(mesh.decomposition.J):
            triangles = np.flatnonzero(mesh.subdomains == j)
            dofs = np.unique(self.element_dofs[triangles])
            nodes = np.unique(np.concatenate([graph.edges[e].nodes for e in graph.edges_of_subdomain(j)]))
            segments = [mesh.edge_index(graph.edges[e].nodes[:-1], graph.edges[e].nodes[1:]) for e in graph.edges_of_subdomain(j)]
            edge_part = self.edge_dofs(np.concatenate(segments)).ravel()
            boundary = np.intersect1d(np.concatenate([nodes, edge_part]), dofs)
            interior = np.setdiff1d(dofs, boundary, assume_unique=True)
            out.append(SubdomainDofs(j, triangles, dofs, boundary, interior))
        return out

    @cached_property
    def edge_traces(self) -> list[EdgeTrace]:
        out = []
        for edge in self.graph.edges:
            nodes = edge.nodes
            segments = self.mesh.edge_index(nodes[:-1], nodes[1:])
            reversed_segments = nodes[:-1] > nodes[1:]
            orders = np.arange(2, self.p + 1)
            flips = np.where(reversed_segments[:, None], (-1.0) ** orders, 1.0)
            dofs = np.concatenate([nodes, self.edge_dofs(segments).ravel()])
            signs = np.concatenate([np.ones(len(nodes)), flips.ravel()])
            out.append(EdgeTrace(edge.index, dofs, signs, nodes, np.diff(edge.arclength), self.p))
        return out

    @cached_property
    def centroid_tree(self) -> cKDTree:
        return cKDTree(self.mesh.centroids)

    @cached_property
    def dof_locations(self) -> np.ndarray:
        """A representative point per dof: node, edge midpoint or centroid."""
        mesh = self.mesh
        midpoints = mesh.nodes[mesh.edges].mean(axis=1)
        return np.vstack(
            [
                mesh.nodes,
                np.repeat(midpoints, self.p - 1, axis=0),
                np.repeat(mesh.centroids, self.element.num_interior, axis=0),
            ]
        )


def build_space(mesh: Mesh, p: int, graph: InterfaceGraph | None = None) -> HpSpace:
    space = HpSpace(mesh, graph if graph is not None else extract_interface(mesh), p)
    logger.info(f"H1 space of order {p}: N_F={space.ndofs} on {mesh.num_triangles} triangles")
    return space
