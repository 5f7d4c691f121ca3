from dataclasses import asdict, dataclass, field

import numpy as np

from utils.errors import ConfigurationError

SWEEP_COLUMNS = [
    "kappa", "p", "h", "IE", "J", "NA", "NF", "err_rel", "E_in", "E_out", "t_bas", "t_ass", "t_sol", "t_tot",
]
INTEGER_COLUMNS = ["p", "IE", "J", "NA", "NF"]
TIMING_COLUMNS = ["t_bas", "t_ass", "t_sol", "t_tot"]


@dataclass
class SweepRecord:
    """One row of a sweep CSV; fields left as None are written as empty cells."""

    kappa: float | None = None
    p: int | None = None
    h: float | None = None
    IE: int | None = None
    J: int | None = None
    NA: int | None = None
    NF: int | None = None
    err_rel: float | None = None
    E_in: float | None = None
    E_out: float | None = None
    t_bas: float | None = None
    t_ass: float | None = None
    t_sol: float | None = None
    t_tot: float | None = None

    @classmethod
    def with_timings(cls, timings: dict[str, float], **values) -> "SweepRecord":
        parts = {name: float(timings.get(name, 0.0)) for name in ("t_bas", "t_ass", "t_sol")}
        return cls(**values, **parts, t_tot=sum(parts.values()))

    def row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class VtkField:
    points: np.ndarray
    triangles: np.ndarray
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def num_points(self) -> int:
        return len(self.points)


class LineOffBoundaryError(ConfigurationError):
    """Integration line is not covered by boundary segments of the mesh"""
