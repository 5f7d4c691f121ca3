from geometry.views import DomainDecomposition
from utils.errors import ConfigurationError


def build_decomposition(
    jx: int,
    jy: int,
    cells_per_subdomain: int = 1,
    side_length: float = 1.0,
    origin: tuple[float, float] = (0.0, 0.0),
) -> DomainDecomposition:
    """jx x jy subdomains, each a square block of cells_per_subdomain^2 unit cells."""
    return DomainDecomposition(jx, jy, cells_per_subdomain, side_length, tuple(origin))


def decomposition_from_cells(
    cells_x: int,
    cells_y: int,
    cells_per_subdomain: int,
    side_length: float = 1.0,
    origin: tuple[float, float] = (0.0, 0.0),
) -> DomainDecomposition:
    """Split a cells_x x cells_y cell grid into square subdomains of cells_per_subdomain cells."""
    if cells_per_subdomain < 1 or cells_x % cells_per_subdomain or cells_y % cells_per_subdomain:
        raise ConfigurationError(
            f"{cells_per_subdomain} cells per subdomain does not divide the {cells_x}x{cells_y} cell grid"
        )
    return build_decomposition(
        cells_x // cells_per_subdomain, cells_y // cells_per_subdomain, cells_per_subdomain, side_length, origin
    )


def centred_origin(cells_x: int, cells_y: int, side_length: float = 1.0) -> tuple[float, float]:
    """Origin placing the cell grid on [-Lx/2, Lx/2] x [-Ly/2, Ly/2]."""
    return -0.5 * cells_x * side_length, -0.5 * cells_y * side_length
