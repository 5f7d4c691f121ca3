import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from geometry.views import BoundaryMarker
from problem.views import BoundarySource, ProblemConfig
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

OUTWARD_NORMALS = {
    BoundaryMarker.BOTTOM: (0.0, -1.0),
    BoundaryMarker.RIGHT: (1.0, 0.0),
    BoundaryMarker.TOP: (0.0, 1.0),
    BoundaryMarker.LEFT: (-1.0, 0.0),
}

CoefficientField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HelmholtzProblem:
    """-div(a grad u) - kappa^2 u = 0 in the domain, a d_n u - i omega beta u = g on the boundary.

    Coefficients are piecewise constant per material tag; ``a_field``/``c_field``
    optionally replace them by functions evaluated at quadrature points.
    """

    a_by_tag: dict[int, float]
    c_by_tag: dict[int, float]
    omega: float
    beta_by_marker: dict[int, float]
    source: BoundarySource = field(default_factory=BoundarySource)
    f: float = 0.0
    a_field: CoefficientField | None = None
    c_field: CoefficientField | None = None

    def __post_init__(self):
        if self.f != 0:
            raise ConfigurationError("nonzero interior source f is out of scope: only f = 0 is supported")
        if self.omega <= 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        for name, table in (("a", self.a_by_tag), ("c", self.c_by_tag)):
            if not table:
                raise ConfigurationError(f"no values given for coefficient {name}")
            bad = {tag: v for tag, v in table.items() if not v > 0}
            if bad:
                raise ConfigurationError(f"coefficient {name} must be positive, got {bad}")
        betas = np.array(list(self.beta_by_marker.values()), dtype=float)
        if betas.size == 0 or not (np.all(betas > 0) or np.all(betas < 0)):
            raise ConfigurationError(f"beta must be sign-definite and nonzero, got {self.beta_by_marker}")

    @classmethod
    def from_config(cls, config: ProblemConfig) -> "HelmholtzProblem":
        return cls(
            a_by_tag=dict(config.a_by_tag),
            c_by_tag=dict(config.c_by_tag),
            omega=config.omega,
            beta_by_marker=dict(config.beta_by_marker),
            source=config.source,
            f=config.f,
        )

    def with_omega(self, omega: float) -> "HelmholtzProblem":
        return replace(self, omega=omega)

    def _lookup(self, table: dict[int, float], name: str, materials: np.ndarray) -> np.ndarray:
        tags = np.unique(materials)
        missing = [int(t) for t in tags if int(t) not in table]
        if missing:
            raise ConfigurationError(f"no value of {name} for material tag(s) {missing}")
        lookup = np.zeros(int(tags.max()) + 1)
        for tag in tags:
            lookup[tag] = table[int(tag)]
        return lookup[materials]

    def a_values(self, materials: np.ndarray, points: np.ndarray | None = None) -> np.ndarray:
        """a per triangle, or per (triangle, quadrature point) when points are given."""
        if self.a_field is not None and points is not None:
            return np.asarray(self.a_field(points[..., 0], points[..., 1]), dtype=float)
        values = self._lookup(self.a_by_tag, "a", materials)
        return values if points is None else np.broadcast_to(values[:, None], points.shape[:-1])

    def kappa_sq_values(self, materials: np.ndarray, points: np.ndarray | None = None) -> np.ndarray:
        if self.c_field is not None and points is not None:
            c = np.asarray(self.c_field(points[..., 0], points[..., 1]), dtype=float)
            return (self.omega / c) ** 2
        values = (self.omega / self._lookup(self.c_by_tag, "c", materials)) ** 2
        return values if points is None else np.broadcast_to(values[:, None], points.shape[:-1])

    def beta_values(self, markers: np.ndarray) -> np.ndarray:
        return self._lookup(self.beta_by_marker, "beta", np.asarray(markers, dtype=np.int64))

    def uniform(self, table: dict[int, float], name: str) -> float:
        values = set(table.values())
        if len(values) != 1:
            raise ConfigurationError(f"{name} varies over tags {table}; give the source an explicit value")
        return values.pop()

    @property
    def kappa(self) -> float:
        """Wavenumber omega / c, defined when c is the same on every tag."""
        return self.omega / self.uniform(self.c_by_tag, "c")

    def source_kappa(self) -> float:
        return self.source.params.kappa if self.source.params.kappa is not None else self.kappa


def _markers_from_normals(normals: np.ndarray) -> np.ndarray:
    markers = np.zeros(len(normals), dtype=np.int64)
    for marker, direction in OUTWARD_NORMALS.items():
        markers[np.all(np.abs(normals - direction) < 1e-12, axis=1)] = int(marker)
    return markers


def eval_g(
    problem: HelmholtzProblem,
    x: np.ndarray,
    n: np.ndarray,
    markers: np.ndarray | None = None,
) -> np.ndarray:
    """Boundary data g at points x with outward unit normals n.

    Accepts a single point or arrays of shape (k, 2); returns a complex array.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = np.atleast_2d(np.asarray(n, dtype=float))
    source = problem.source
    params = source.params
    if source.kind == "zero":
        return np.zeros(len(x), dtype=complex)
    if source.kind == "constant":
        return np.full(len(x), params.value, dtype=complex)

    kappa = problem.source_kappa()
    if source.kind == "plane_wave_trace":
        d = np.asarray(params.direction)
        u = params.amplitude * np.exp(-1j * kappa * (x @ d))
        du_dn = -1j * kappa * (n @ d) * u
        if markers is None:
            beta = problem.uniform(problem.beta_by_marker, "beta")
        else:
            beta = problem.beta_values(markers)
        a = problem.uniform(problem.a_by_tag, "a")
        return a * du_dn - 1j * problem.omega * beta * u
    if source.kind == "incoming_plane_wave":
        return params.amplitude * 1j * kappa * (1.0 - n[:, 0]) * np.exp(-1j * kappa * x[:, 0])
    if source.kind == "gaussian_windowed":
        markers = _markers_from_normals(n) if markers is None else np.asarray(markers)
        window = markers == int(params.side)
        g = params.amplitude * 1j * kappa * np.exp(-1j * kappa * x[:, 0]) * np.exp(-((x[:, 1] - params.y_center) ** 2))
        return np.where(window, g, 0.0)
    raise ConfigurationError(f"unknown source kind '{source.kind}'")


def exact_solution(problem: HelmholtzProblem) -> Callable[[np.ndarray, np.ndarray], np.ndarray] | None:
    """Closed-form solution for the manufactured plane wave, None for other sources."""
    if problem.source.kind != "plane_wave_trace":
        return None
    params = problem.source.params
    kappa = problem.source_kappa()
    d0, d1 = params.direction

    def plane_wave(x, y):
        return params.amplitude * np.exp(-1j * kappa * (d0 * np.asarray(x) + d1 * np.asarray(y)))

    return plane_wave
