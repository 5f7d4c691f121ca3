"""Deterministic cell-template meshing of rectangular multi-cell domains.

Every unit cell is meshed from one of two templates (plain or with a pore) and
translated into place, so identical cells produce congruent sub-meshes and
the node spacing along every cell side is the same uniform grid.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from geometry.interface import extract_interface
from geometry.validation import validate_mesh
from geometry.views import (
    BoundaryMarker,
    DomainDecomposition,
    InterfaceGraph,
    Mesh,
    MeshQualityError,
    UnitCellSpec,
)
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

SNAP_FRACTION = 0.02


@dataclass(frozen=True)
class CellTemplate:
    """Mesh of one cell in local coordinates [0, side]^2.

    ``lattice`` holds the (i, j) grid position of nodes on the cell boundary
    and (-1, -1) for every other node.
    """

    n: int
    nodes: np.ndarray
    triangles: np.ndarray
    in_pore: np.ndarray
    lattice: np.ndarray


def segments_per_side(side_length: float, h: float) -> int:
    return max(1, math.ceil(side_length / h - 1e-9))


def cell_layout(kind: str, cells_x: int, cells_y: int) -> np.ndarray:
    """Per-cell pore flags, indexed [cy, cx].

    ``waveguide`` drops the pores of the two middle cell rows.
    """
    flags = np.ones((cells_y, cells_x), dtype=bool)
    if kind == "uniform":
        return flags
    if kind == "waveguide":
        if cells_y < 2:
            raise ConfigurationError("a waveguide layout needs at least two cell rows")
        middle = cells_y // 2
        flags[middle - 1:middle + 1, :] = False
        return flags
    raise ConfigurationError(f"unknown cell layout '{kind}'")


def _boundary_loop(side: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Counter-clockwise cell boundary nodes starting at the lower left corner."""
    i = np.arange(n)
    t = side * i / n
    rest = side * (n - i) / n
    zeros, full = np.zeros(n), np.full(n, side)
    points = np.concatenate([
        np.column_stack([t, zeros]),
        np.column_stack([full, t]),
        np.column_stack([rest, full]),
        np.column_stack([zeros, rest]),
    ])
    lattice = np.concatenate([
        np.column_stack([i, np.zeros(n, int)]),
        np.column_stack([np.full(n, n), i]),
        np.column_stack([n - i, np.full(n, n)]),
        np.column_stack([np.zeros(n, int), n - i]),
    ])
    return points, lattice


def plain_template(side: float, n: int) -> CellTemplate:
    """Structured criss-cross mesh: n x n squares with alternating diagonals."""
    j, i = np.divmod(np.arange((n + 1) ** 2), n + 1)
    nodes = np.column_stack([side * i / n, side * j / n])
    on_boundary = (i == 0) | (i == n) | (j == 0) | (j == n)
    lattice = np.where(on_boundary[:, None], np.column_stack([i, j]), -1)

    qj, qi = np.divmod(np.arange(n * n), n)
    a = qj * (n + 1) + qi
    b, c, d = a + 1, a + n + 2, a + n + 1
    even = (qi + qj) % 2 == 0
    first = np.where(even[:, None], np.column_stack([a, b, c]), np.column_stack([a, b, d]))
    second = np.where(even[:, None], np.column_stack([a, c, d]), np.column_stack([b, c, d]))
    triangles = np.concatenate([first, second])
    return CellTemplate(n, nodes, triangles, np.zeros(len(triangles), dtype=bool), lattice)


class _TemplateBuilder:
    def __init__(self):
        self.points: list[np.ndarray] = []
        self.lattice: list[tuple[int, int]] = []
        self.triangles: list[tuple[int, int, int]] = []
        self.in_pore: list[bool] = []

    def node(self, point, lattice=(-1, -1)) -> int:
        self.points.append(np.asarray(point, dtype=float))
        self.lattice.append(tuple(lattice))
        return len(self.points) - 1

    def triangle(self, a: int, b: int, c: int, pore: bool) -> None:
        pa, pb, pc = self.points[a], self.points[b], self.points[c]
        cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        self.triangles.append((a, b, c) if cross > 0 else (a, c, b))
        self.in_pore.append(pore)

    def strip(self, inner: list[list[int]], outer: list[int], pore: bool) -> None:
        """Triangulate sector-wise between an inner chain and a closed outer loop.

        ``inner[k]`` lists the chain nodes from ray k up to (excluding) ray k + 1.
        """
        count = len(outer)
        for k in range(count):
            chain = inner[k] + [inner[(k + 1) % count][0]]
            o0, o1 = outer[k], outer[(k + 1) % count]
            split = len(chain) // 2
            for a, b in zip(chain[:split], chain[1:split + 1]):
                self.triangle(a, o0, b, pore)
            self.triangle(chain[split], o0, o1, pore)
            for a, b in zip(chain[split:-1], chain[split + 1:]):
                self.triangle(a, o1, b, pore)

    def build(self, n: int) -> CellTemplate:
        return CellTemplate(
            n,
            np.array(self.points),
            np.array(self.triangles, dtype=np.int64),
            np.array(self.in_pore, dtype=bool),
            np.array(self.lattice, dtype=np.int64),
        )


def pore_template(side: float, n: int, radius: float, segments: int) -> CellTemplate:
    """Radial layers from the pore polygon to the cell boundary plus rings and a fan inside.

    Rays from the cell centre through every boundary node cut the polygon; the
    cut points together with the polygon vertices form the inner chain, so
    every polygon side is a union of mesh edges.
    """
    spacing = side / n
    centre = np.array([0.5 * side, 0.5 * side])
    boundary, boundary_lattice = _boundary_loop(side, n)
    theta = np.unwrap(np.arctan2(boundary[:, 1] - centre[1], boundary[:, 0] - centre[0]))

    step = 2 * np.pi / segments
    phi = np.arange(segments) * step + 0.5 * step
    polygon = centre + radius * np.column_stack([np.cos(phi), np.sin(phi)])
    # polygon vertex angles shifted into the window [theta_0, theta_0 + 2 pi)
    phi_window = theta[0] + np.mod(phi - theta[0], 2 * np.pi)

    builder = _TemplateBuilder()
    outer = [builder.node(p, lat) for p, lat in zip(boundary, boundary_lattice)]
    vertex_nodes = {m: builder.node(polygon[m]) for m in range(segments)}

    apothem = radius * math.cos(0.5 * step)
    ray_nodes, ray_points = [], []
    snapped = -1
    for t in theta:
        m = int(np.argmin(np.abs(np.angle(np.exp(1j * (phi - t))))))
        if m != snapped and abs(np.angle(np.exp(1j * (phi[m] - t)))) < SNAP_FRACTION * step:
            snapped = m
            ray_nodes.append(vertex_nodes[m])
            ray_points.append(polygon[m])
            continue
        lower = int(np.floor(np.mod(t - 0.5 * step, 2 * np.pi) / step)) % segments
        mid = phi[lower] + 0.5 * step
        distance = apothem / math.cos(np.angle(np.exp(1j * (t - mid))))
        point = centre + distance * np.array([math.cos(t), math.sin(t)])
        ray_nodes.append(builder.node(point))
        ray_points.append(point)

    # polygon vertices strictly between consecutive rays
    count = len(outer)
    inner_chain: list[list[int]] = []
    for k in range(count):
        lo = theta[k]
        hi = theta[k + 1] if k + 1 < count else theta[0] + 2 * np.pi
        between = [
            m for m in np.argsort(phi_window)
            if lo < phi_window[m] < hi and vertex_nodes[m] not in (ray_nodes[k], ray_nodes[(k + 1) % count])
        ]
        inner_chain.append([ray_nodes[k]] + [vertex_nodes[m] for m in between])

    ray_points = np.array(ray_points)
    layers = max(1, math.ceil(np.max(np.linalg.norm(boundary - ray_points, axis=1)) / spacing - 1e-9))
    previous = inner_chain
    for level in range(1, layers):
        weight = level / layers
        ring = [builder.node(p + weight * (b - p)) for p, b in zip(ray_points, boundary)]
        builder.strip(previous, ring, pore=False)
        previous = [[node] for node in ring]
    builder.strip(previous, outer, pore=False)

    # inside the pore: shrunken copies of the chain, then a fan to the centre
    chain = [node for sector in inner_chain for node in sector]
    rings = max(1, math.ceil(radius / spacing - 1e-9))
    current = chain
    for level in range(1, rings):
        scale = (rings - level) / rings
        ring = [builder.node(centre + scale * (builder.points[node] - centre)) for node in chain]
        for k in range(len(chain)):
            a0, a1 = current[k], current[(k + 1) % len(chain)]
            b0, b1 = ring[k], ring[(k + 1) % len(chain)]
            builder.triangle(a0, a1, b1, pore=True)
            builder.triangle(a0, b1, b0, pore=True)
        current = ring
    hub = builder.node(centre)
    for k in range(len(current)):
        builder.triangle(current[k], current[(k + 1) % len(current)], hub, pore=True)
    return builder.build(n)


def mesh_domain(
    decomp: DomainDecomposition,
    cell: UnitCellSpec,
    h: float,
    layout: np.ndarray | None = None,
) -> tuple[Mesh, InterfaceGraph]:
    """Mesh every cell of the decomposition from its template and extract the interface."""
    side = cell.side_length
    if abs(side - decomp.side_length) > 1e-14 * side:
        raise ConfigurationError(f"cell side {side} differs from the decomposition's {decomp.side_length}")
    if not 0 < h <= 0.5 * side:
        raise ConfigurationError(f"mesh size h={h} must lie in (0, {0.5 * side}]")
    if layout is None:
        layout = np.full((decomp.cells_y, decomp.cells_x), cell.pore is not None)
    if layout.shape != (decomp.cells_y, decomp.cells_x):
        raise ConfigurationError(f"cell layout shape {layout.shape} does not match the cell grid")

    n = segments_per_side(side, h)
    plain = plain_template(side, n)
    porous = pore_template(side, n, cell.pore.radius, cell.pore.segments) if cell.pore is not None else None
    if porous is None and layout.any():
        raise ConfigurationError("cell layout requests pores but the cell spec has none")

    nodes: list[np.ndarray] = []
    shared: dict[tuple[int, int], int] = {}
    triangles, materials, owners = [], [], []
    bsegments, bmarkers = [], []
    total = 0
    x0, y0 = decomp.origin
    cps = decomp.cells_per_subdomain

    for cy in range(decomp.cells_y):
        for cx in range(decomp.cells_x):
            template = porous if layout[cy, cx] else plain
            offset = np.array([x0 + cx * side, y0 + cy * side])
            local_to_global = np.empty(len(template.nodes), dtype=np.int64)
            fresh = []
            for k, (i, j) in enumerate(template.lattice):
                if i < 0:
                    local_to_global[k] = total + len(fresh)
                    fresh.append(k)
                    continue
                key = (cx * n + int(i), cy * n + int(j))
                if key not in shared:
                    shared[key] = total + len(fresh)
                    fresh.append(k)
                local_to_global[k] = shared[key]
            nodes.append(template.nodes[fresh] + offset)
            total += len(fresh)

            triangles.append(local_to_global[template.triangles])
            materials.append(np.where(template.in_pore, cell.pore_tag, cell.cell_tag))
            owners.append(np.full(len(template.triangles), decomp.subdomain_index(cx // cps, cy // cps)))

            for marker, on_side in _boundary_sides(decomp, cx, cy):
                run = [shared[key] for key in _side_lattice(cx, cy, n, on_side)]
                bsegments.extend(zip(run[:-1], run[1:]))
                bmarkers.extend([marker] * (len(run) - 1))

    mesh = Mesh(
        nodes=np.concatenate(nodes),
        triangles=np.concatenate(triangles).astype(np.int64),
        materials=np.concatenate(materials).astype(np.int64),
        subdomains=np.concatenate(owners).astype(np.int64),
        bsegments=np.array(bsegments, dtype=np.int64).reshape(-1, 2),
        bmarkers=np.array(bmarkers, dtype=np.int64),
        decomposition=decomp,
    )
    if np.min(mesh.areas) < 1e-14 * mesh.h**2:
        bad = int(np.argmin(mesh.areas))
        raise MeshQualityError(f"degenerate triangle {bad} (area {mesh.areas[bad]:.3e})", entity=bad)
    validate_mesh(mesh)
    logger.info(
        "meshed %dx%d cells (n=%d per side): %d nodes, %d triangles, h=%.4g",
        decomp.cells_x, decomp.cells_y, n, mesh.num_nodes, mesh.num_triangles, mesh.h,
    )
    return mesh, extract_interface(mesh)


def _boundary_sides(decomp: DomainDecomposition, cx: int, cy: int):
    if cy == 0:
        yield BoundaryMarker.BOTTOM, "bottom"
    if cx == decomp.cells_x - 1:
        yield BoundaryMarker.RIGHT, "right"
    if cy == decomp.cells_y - 1:
        yield BoundaryMarker.TOP, "top"
    if cx == 0:
        yield BoundaryMarker.LEFT, "left"


def _side_lattice(cx: int, cy: int, n: int, side: str) -> list[tuple[int, int]]:
    i0, j0 = cx * n, cy * n
    steps = range(n + 1)
    if side == "bottom":
        return [(i0 + s, j0) for s in steps]
    if side == "top":
        return [(i0 + s, j0 + n) for s in steps]
    if side == "left":
        return [(i0, j0 + s) for s in steps]
    return [(i0 + n, j0 + s) for s in steps]
