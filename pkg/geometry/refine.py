import numpy as np

from geometry.interface import extract_interface
from geometry.views import Mesh


def refine_uniform(mesh: Mesh) -> Mesh:
    """Red refinement: every triangle is split into four by its edge midpoints."""
    n_nodes = mesh.num_nodes
    edges = mesh.edges
    midpoints = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.concatenate([mesh.nodes, midpoints])

    t = mesh.triangles
    m01, m12, m20 = (n_nodes + mesh.triangle_edges[:, k] for k in range(3))
    children = np.concatenate([
        np.column_stack([t[:, 0], m01, m20]),
        np.column_stack([m01, t[:, 1], m12]),
        np.column_stack([m20, m12, t[:, 2]]),
        np.column_stack([m01, m12, m20]),
    ])
    # children of triangle k sit at k, k + M, k + 2M, k + 3M; regroup so siblings are contiguous
    order = np.arange(4 * len(t)).reshape(4, -1).T.ravel()
    children = children[order]

    seg_mid = n_nodes + mesh.edge_index(mesh.bsegments[:, 0], mesh.bsegments[:, 1])
    bsegments = np.stack([
        np.column_stack([mesh.bsegments[:, 0], seg_mid]),
        np.column_stack([seg_mid, mesh.bsegments[:, 1]]),
    ], axis=1).reshape(-1, 2)

    return Mesh(
        nodes=nodes,
        triangles=children,
        materials=np.repeat(mesh.materials, 4),
        subdomains=np.repeat(mesh.subdomains, 4),
        bsegments=bsegments,
        bmarkers=np.repeat(mesh.bmarkers, 2),
        decomposition=mesh.decomposition,
    )


def refine_with_interface(mesh: Mesh, times: int = 1):
    for _ in range(times):
        mesh = refine_uniform(mesh)
    return mesh, extract_interface(mesh)
