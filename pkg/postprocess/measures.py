import logging

import numpy as np

from femcore import HpSpace, eval_field, quadrature_rule
from postprocess.views import LineOffBoundaryError
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

LINE_TOLERANCE = 1e-10


def _segments_on_line(space: HpSpace, x0: float, y0: float, y1: float) -> np.ndarray:
    mesh = space.mesh
    scale = max(1.0, abs(x0), abs(y0), abs(y1))
    ends = mesh.nodes[mesh.bsegments]
    on_line = np.all(np.abs(ends[:, :, 0] - x0) < LINE_TOLERANCE * scale, axis=1)
    inside = np.all((ends[:, :, 1] > y0 - LINE_TOLERANCE * scale) & (ends[:, :, 1] < y1 + LINE_TOLERANCE * scale), axis=1)
    chosen = np.flatnonzero(on_line & inside)
    covered = np.abs(ends[chosen, 1, 1] - ends[chosen, 0, 1]).sum()
    if len(chosen) == 0 or abs(covered - (y1 - y0)) > LINE_TOLERANCE * scale:
        raise LineOffBoundaryError(
            f"line x={x0}, y in [{y0}, {y1}] is not a union of boundary segments (covered length {covered:.6g})"
        )
    return chosen


def line_energy(space: HpSpace, coeffs: np.ndarray, x0: float, y0: float, y1: float) -> float:
    """Integral of |u|^2 along the boundary line x = x0, y0 <= y <= y1."""
    if not y1 > y0:
        raise ConfigurationError(f"empty integration line y in [{y0}, {y1}]")
    segments = _segments_on_line(space, x0, y0, y1)
    rule = quadrature_rule(2 * space.p + 2, "interval")
    ends = space.mesh.nodes[space.mesh.bsegments[segments]]
    start, step = ends[:, 0], ends[:, 1] - ends[:, 0]
    points = start[:, None, :] + rule.points[None, :, None] * step[:, None, :]
    lengths = np.linalg.norm(step, axis=1)
    values = eval_field(space, coeffs, points.reshape(-1, 2)).reshape(points.shape[:2])
    return float(np.sum(lengths[:, None] * rule.weights[None, :] * np.abs(values) ** 2))


def sample_line(
    space: HpSpace, coeffs: np.ndarray, x0: float, y0: float, y1: float, n: int = 201
) -> tuple[np.ndarray, np.ndarray]:
    """|u| along the vertical line x = x0 at n equispaced heights."""
    ys = np.linspace(y0, y1, n)
    values = eval_field(space, coeffs, np.column_stack([np.full(n, x0), ys]))
    return ys, np.abs(values)


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ConfigurationError(f"slope fit needs at least 3 paired points, got {len(xs)} and {len(ys)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ConfigurationError("log-log fit needs strictly positive data")
    if np.any(np.diff(xs) <= 0):
        raise ConfigurationError("log-log fit needs strictly increasing abscissae")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def onset_index(ie_values, errors, floor: float | None = None) -> int | None:
    """Index of the first sampled I_E after which the error decreases strictly for all later samples.

    Samples after the first error below ``floor`` (the FEM error level) are dropped.
    """
    errors = np.asarray(errors, dtype=float)
    if len(ie_values) != len(errors):
        raise ConfigurationError("onset detection needs one error per I_E value")
    if floor is not None and np.any(errors < floor):
        errors = errors[: int(np.argmax(errors < floor)) + 1]
    if len(errors) < 2:
        return None
    decreasing = np.diff(errors) < 0
    if not decreasing[-1]:
        return None
    start = len(decreasing)
    while start > 0 and decreasing[start - 1]:
        start -= 1
    return int(start)
