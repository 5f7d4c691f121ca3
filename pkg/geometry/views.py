from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.errors import ConfigurationError


class BoundaryMarker(IntEnum):
    BOTTOM = 1
    RIGHT = 2
    TOP = 3
    LEFT = 4


# Pydantic
class PoreSpec(BaseModel):
    """Regular polygon approximating a circular pore centred in the cell"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    radius: float = Field(gt=0.0)
    segments: int = Field(default=16, ge=8)

    @field_validator("segments")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("pore polygon needs an even number of segments")
        return value


class UnitCellSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    side_length: float = Field(default=1.0, gt=0.0)
    pore: PoreSpec | None = None
    cell_tag: int = 1
    pore_tag: int = 2

    @model_validator(mode="after")
    def _pore_fits(self) -> "UnitCellSpec":
        if self.pore is not None and self.pore.radius >= 0.5 * self.side_length:
            raise ValueError(f"pore radius {self.pore.radius} does not fit a cell of side {self.side_length}")
        if self.cell_tag == self.pore_tag:
            raise ValueError("cell and pore material tags must differ")
        return self


@dataclass(frozen=True)
class DomainDecomposition:
    """Tensor grid of jx x jy rectangular subdomains, each made of j x j unit cells.

    Subdomain (ix, iy) has index iy * jx + ix, counted from the lower left.
    """

    jx: int
    jy: int
    cells_per_subdomain: int = 1
    side_length: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.jx < 1 or self.jy < 1 or self.cells_per_subdomain < 1:
            raise ConfigurationError(f"invalid decomposition {self.jx}x{self.jy} with {self.cells_per_subdomain} cells")

    @property
    def J(self) -> int:
        return self.jx * self.jy

    @property
    def cells_x(self) -> int:
        return self.jx * self.cells_per_subdomain

    @property
    def cells_y(self) -> int:
        return self.jy * self.cells_per_subdomain

    @property
    def subdomain_size(self) -> float:
        return self.cells_per_subdomain * self.side_length

    @property
    def num_edges(self) -> int:
        return self.jx * (self.jy + 1) + self.jy * (self.jx + 1)

    @property
    def num_vertices(self) -> int:
        return (self.jx + 1) * (self.jy + 1)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return x0, y0, x0 + self.cells_x * self.side_length, y0 + self.cells_y * self.side_length

    def grid_x(self, ix: int) -> float:
        return self.origin[0] + ix * self.subdomain_size

    def grid_y(self, iy: int) -> float:
        return self.origin[1] + iy * self.subdomain_size

    def subdomain_index(self, ix: int, iy: int) -> int:
        return iy * self.jx + ix

    def subdomain_position(self, j: int) -> tuple[int, int]:
        return j % self.jx, j // self.jx

    @property
    def subdomain_rects(self) -> list[tuple[float, float, float, float]]:
        rects = []
        for j in range(self.J):
            ix, iy = self.subdomain_position(j)
            rects.append((self.grid_x(ix), self.grid_y(iy), self.grid_x(ix + 1), self.grid_y(iy + 1)))
        return rects

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Subdomain index of each point (points on interfaces go up/right)."""
        points = np.atleast_2d(points)
        size = self.subdomain_size
        ix = np.clip(np.floor((points[:, 0] - self.origin[0]) / size).astype(int), 0, self.jx - 1)
        iy = np.clip(np.floor((points[:, 1] - self.origin[1]) / size).astype(int), 0, self.jy - 1)
        return iy * self.jx + ix


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with material tags, subdomain owners and boundary markers."""

    nodes: np.ndarray
    triangles: np.ndarray
    materials: np.ndarray
    subdomains: np.ndarray
    bsegments: np.ndarray
    bmarkers: np.ndarray
    decomposition: DomainDecomposition

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def diameters(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
        return lengths.max(axis=1)

    @cached_property
    def h(self) -> float:
        return float(self.diameters.max())

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique mesh edges as sorted node pairs; row order fixes the global edge numbering."""
        return np.unique(np.sort(self._local_edges().reshape(-1, 2), axis=1), axis=0)

    @cached_property
    def triangle_edges(self) -> np.ndarray:
        """Global edge index of local edge k = (v_k, v_{k+1}) of every triangle."""
        local = np.sort(self._local_edges().reshape(-1, 2), axis=1)
        return self.edge_index(local[:, 0], local[:, 1]).reshape(-1, 3)

    def _local_edges(self) -> np.ndarray:
        t = self.triangles
        return np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1)

    def edge_index(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Global index of the edges {a, b}; -1 where no such edge exists."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = self.edges[:, 0] * self.num_nodes + self.edges[:, 1]
        query = lo * self.num_nodes + hi
        pos = np.clip(np.searchsorted(keys, query), 0, len(keys) - 1)
        return np.where(keys[pos] == query, pos, -1)

    def same_geometry(self, other: "Mesh") -> bool:
        return (
            self.nodes.shape == other.nodes.shape
            and self.triangles.shape == other.triangles.shape
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.nodes, other.nodes)
        )


@dataclass(frozen=True, eq=False)
class InterfaceEdge:
    """Maximal straight segment of the interface between two decomposition vertices."""

    index: int
    vertices: tuple[int, int]
    nodes: np.ndarray
    arclength: np.ndarray
    subdomains: tuple[int, ...]
    horizontal: bool

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def on_boundary(self) -> bool:
        return len(self.subdomains) == 1


@dataclass(frozen=True, eq=False)
class InterfaceGraph:
    decomposition: DomainDecomposition
    vertices: np.ndarray
    vertex_nodes: np.ndarray
    edges: list[InterfaceEdge] = field(default_factory=list)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def vertex_index(self, ix: int, iy: int) -> int:
        return iy * (self.decomposition.jx + 1) + ix

    def horizontal_edge_index(self, ix: int, iy: int) -> int:
        return iy * (2 * self.decomposition.jx + 1) + ix

    def vertical_edge_index(self, ix: int, iy: int) -> int:
        return iy * (2 * self.decomposition.jx + 1) + self.decomposition.jx + ix

    def edges_of_vertex(self, q: int) -> list[InterfaceEdge]:
        return [edge for edge in self.edges if q in edge.vertices]

    def vertices_of_subdomain(self, j: int) -> list[int]:
        ix, iy = self.decomposition.subdomain_position(j)
        return [
            self.vertex_index(ix, iy),
            self.vertex_index(ix + 1, iy),
            self.vertex_index(ix, iy + 1),
            self.vertex_index(ix + 1, iy + 1),
        ]

    def edges_of_subdomain(self, j: int) -> list[int]:
        """Bottom, left, right, top: ascending global order."""
        ix, iy = self.decomposition.subdomain_position(j)
        return [
            self.horizontal_edge_index(ix, iy),
            self.vertical_edge_index(ix, iy),
            self.vertical_edge_index(ix + 1, iy),
            self.horizontal_edge_index(ix, iy + 1),
        ]


class MeshError(ConfigurationError):
    """Base class for mesh construction and validation errors"""

    def __init__(self, message: str, entity: int | None = None):
        super().__init__(message)
        self.entity = entity


class MeshFormatError(MeshError):
    """Parse error in a mesh file; ``entity`` holds the 1-based line number"""


class MeshQualityError(MeshError):
    """Degenerate or inverted triangle"""


class MeshConformityError(MeshError):
    """Hanging node, overlapping triangles or a triangle straddling subdomains"""
