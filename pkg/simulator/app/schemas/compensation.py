from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field


class PredictorKind(str, Enum):
    NONE = "none"
    HOLD = "hold"
    MOVING_AVERAGE = "moving_average"
    WEIGHTED = "weighted"


class Predictor(BaseModel):
    """f() used by the actuator to stand in for a lost measurement.

    m only matters for moving_average and alpha only for weighted, but both
    are validated regardless so a bad value never sits silently in a config.
    """

    kind: PredictorKind = PredictorKind.NONE
    m: int = Field(default=3, ge=1)
    alpha: float = Field(default=0.7, gt=0, lt=1)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def buffer_capacity(self) -> int:
        if self.kind == PredictorKind.MOVING_AVERAGE:
            return max(self.m, 2)
        return 2

    @property
    def label(self) -> str:
        if self.kind == PredictorKind.MOVING_AVERAGE:
            return f"moving_average(m={self.m})"
        if self.kind == PredictorKind.WEIGHTED:
            return f"weighted(alpha={self.alpha:g})"
        return self.kind.value


@dataclass(frozen=True)
class HistoryBuffer:
    """Stored measurements, newest first, never longer than capacity"""

    capacity: int
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("history capacity must be at least 1")
        if len(self.values) > self.capacity:
            raise ValueError("history holds more values than its capacity")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_empty(self) -> bool:
        return not self.values

    def push(self, value: float) -> "HistoryBuffer":
        # newest in front, y(k-m) falls off the back
        return HistoryBuffer(self.capacity, ((float(value),) + self.values)[: self.capacity])
