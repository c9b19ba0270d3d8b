import math
from dataclasses import dataclass
from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class PidParams(BaseModel):
    """Positional PID with filtered derivative on the measurement.

    ti = inf switches the integral path off. The sampling period h is not
    part of the [pid] config section; SimConfig injects its own h.
    """

    k: float = 1.15
    ti: float = Field(default=10.0, gt=0)
    td: float = Field(default=0.07, ge=0)
    n_filter: float = Field(default=10.0, gt=0)
    h: float = Field(default=0.01, gt=0)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("k", "td", "n_filter", "h")
    def must_be_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v


@dataclass(frozen=True)
class PidState:
    integral_term: float = 0.0
    prev_measurement: float = 0.0
    derivative_state: float = 0.0


class ReferenceKind(str, Enum):
    CONSTANT = "constant"
    SQUARE = "square"


class ReferenceSignal(BaseModel):
    kind: ReferenceKind = ReferenceKind.SQUARE
    amplitude: float = 0.5
    period: float = Field(default=2.0, gt=0)
    offset: float = 0.5

    model_config = ConfigDict(frozen=True, extra="forbid")


class CalibrationGrid(BaseModel):
    k_values: List[float] = Field(default_factory=lambda: [0.8, 1.0, 1.15])
    ti_values: List[float] = Field(default_factory=lambda: [2.0, 5.0, 10.0])
    td_values: List[float] = Field(default_factory=lambda: [0.05, 0.07, 0.09])
    target_iae: float = Field(default=7.1, ge=0)

    model_config = ConfigDict(extra="forbid")

    @field_validator("k_values", "ti_values", "td_values", mode="before")
    def split_lists(cls, v):
        if isinstance(v, str):
            return [i.strip() for i in v.split(",") if i.strip()]
        if isinstance(v, (int, float)):
            return [v]
        return v

    @model_validator(mode="after")
    def check_non_empty(self):
        if not (self.k_values and self.ti_values and self.td_values):
            raise ValueError("calibration grid must not be empty")
        return self

    def points(self, n_filter: float, h: float) -> List[PidParams]:
        return [
            PidParams(k=k, ti=ti, td=td, n_filter=n_filter, h=h)
            for k in self.k_values
            for ti in self.ti_values
            for td in self.td_values
        ]
