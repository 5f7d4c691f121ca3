from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from geometry.views import BoundaryMarker

SourceKind = Literal["plane_wave_trace", "incoming_plane_wave", "gaussian_windowed", "constant", "zero"]


# Pydantic
class SourceParams(BaseModel):
    """Parameters of a boundary source; which ones matter depends on the kind"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    direction: tuple[float, float] = (1.0, 0.0)
    amplitude: float = 1.0
    kappa: float | None = Field(default=None, gt=0.0)
    side: BoundaryMarker = BoundaryMarker.LEFT
    y_center: float = 0.0
    value: float = 1.0

    @model_validator(mode="after")
    def _unit_direction(self) -> "SourceParams":
        dx, dy = self.direction
        if abs((dx * dx + dy * dy) ** 0.5 - 1.0) > 1e-14:
            raise ValueError(f"direction {self.direction} is not a unit vector")
        return self


class BoundarySource(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SourceKind = "zero"
    params: SourceParams = SourceParams()


class ProblemConfig(BaseModel):
    """JSON problem block: coefficients per material tag, beta per boundary marker"""

    model_config = ConfigDict(extra="forbid")

    a_by_tag: dict[int, float] = Field(default_factory=lambda: {1: 1.0})
    c_by_tag: dict[int, float] = Field(default_factory=lambda: {1: 1.0})
    omega: float = Field(default=1.0, gt=0.0)
    beta_by_marker: dict[int, float] = Field(
        default_factory=lambda: {int(m): 1.0 for m in BoundaryMarker}
    )
    source: BoundarySource = BoundarySource()
    f: float = 0.0
