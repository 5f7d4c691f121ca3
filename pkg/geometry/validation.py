import numpy as np

from geometry.views import Mesh, MeshConformityError, MeshQualityError

GEOMETRY_TOLERANCE = 1e-9


def boundary_edge_mask(mesh: Mesh) -> np.ndarray:
    """Mesh edges with exactly one adjacent triangle."""
    counts = np.bincount(mesh.triangle_edges.ravel(), minlength=len(mesh.edges))
    return counts == 1


def on_domain_boundary(mesh: Mesh, points: np.ndarray) -> np.ndarray:
    x0, y0, x1, y1 = mesh.decomposition.bounds
    tol = GEOMETRY_TOLERANCE * max(x1 - x0, y1 - y0)
    x, y = points[..., 0], points[..., 1]
    return (np.abs(x - x0) < tol) | (np.abs(x - x1) < tol) | (np.abs(y - y0) < tol) | (np.abs(y - y1) < tol)


def validate_mesh(mesh: Mesh) -> None:
    """Check orientation, conformity, containment and boundary markers.

    Raises a MeshError subclass naming the first offending entity.
    """
    decomp = mesh.decomposition
    if mesh.triangles.min() < 0 or mesh.triangles.max() >= mesh.num_nodes:
        raise MeshConformityError("triangle references a missing node")
    if np.any(mesh.subdomains < 0) or np.any(mesh.subdomains >= decomp.J):
        bad = int(np.flatnonzero((mesh.subdomains < 0) | (mesh.subdomains >= decomp.J))[0])
        raise MeshConformityError(f"triangle {bad} names subdomain {mesh.subdomains[bad]}", entity=bad)

    areas = mesh.areas
    if np.any(areas < 1e-14 * mesh.h**2):
        bad = int(np.argmin(areas))
        raise MeshQualityError(f"triangle {bad} is degenerate or inverted (area {areas[bad]:.3e})", entity=bad)

    counts = np.bincount(mesh.triangle_edges.ravel(), minlength=len(mesh.edges))
    if np.any(counts > 2):
        bad = int(np.flatnonzero(counts > 2)[0])
        raise MeshConformityError(f"mesh edge {bad} is shared by {counts[bad]} triangles (crossing edges)", entity=bad)
    single = np.flatnonzero(counts == 1)
    endpoints = mesh.nodes[mesh.edges[single]]
    midpoints = endpoints.mean(axis=1)
    loose = ~(on_domain_boundary(mesh, endpoints[:, 0]) & on_domain_boundary(mesh, endpoints[:, 1])
              & on_domain_boundary(mesh, midpoints))
    if np.any(loose):
        bad = int(single[np.flatnonzero(loose)[0]])
        raise MeshConformityError(f"mesh edge {bad} has one triangle but is interior (hanging node)", entity=bad)

    rects = np.array(decomp.subdomain_rects)[mesh.subdomains]
    corners = mesh.nodes[mesh.triangles]
    tol = GEOMETRY_TOLERANCE * decomp.subdomain_size
    inside = (
        (corners[..., 0] >= rects[:, None, 0] - tol) & (corners[..., 0] <= rects[:, None, 2] + tol)
        & (corners[..., 1] >= rects[:, None, 1] - tol) & (corners[..., 1] <= rects[:, None, 3] + tol)
    ).all(axis=1)
    if not inside.all():
        bad = int(np.flatnonzero(~inside)[0])
        raise MeshConformityError(
            f"triangle {bad} straddles subdomain {mesh.subdomains[bad]} (containment violation)", entity=bad
        )

    segment_edges = mesh.edge_index(mesh.bsegments[:, 0], mesh.bsegments[:, 1])
    if np.any(segment_edges < 0) or not np.array_equal(np.sort(segment_edges), np.sort(single)):
        bad = int(np.flatnonzero(segment_edges < 0)[0]) if np.any(segment_edges < 0) else None
        raise MeshConformityError("boundary segments do not match the boundary edges of the mesh", entity=bad)
