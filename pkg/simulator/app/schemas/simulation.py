import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.schemas.channel import PathLossModel, RadioProfile
from app.schemas.compensation import Predictor
from app.schemas.control import PidParams, ReferenceSignal
from app.schemas.plant import PlantParams, PlantState


class LossKind(str, Enum):
    BERNOULLI = "bernoulli"
    CHANNEL = "channel"


class LossProcess(BaseModel):
    """Packet loss on the sensor -> actuator hop.

    bernoulli drops each packet independently with probability p. channel
    redraws a link PLR from the shadowing model every redraw_period steps
    and then drops packets with that PLR.
    """

    kind: LossKind = LossKind.BERNOULLI
    p: float = Field(default=0.0, ge=0, le=1)
    profile: RadioProfile = Field(default_factory=RadioProfile)
    model: PathLossModel = Field(default_factory=PathLossModel)
    distance: float = Field(default=6.0, gt=0)
    redraw_period: int = Field(default=100, ge=1)
    seed: Optional[int] = None

    model_config = ConfigDict(frozen=True, extra="forbid")


class SimConfig(BaseModel):
    plant: PlantParams = Field(default_factory=PlantParams)
    h: float = Field(default=0.01, gt=0)
    duration: float = Field(default=100.0, gt=0)
    pid: PidParams = Field(default_factory=PidParams)
    reference: ReferenceSignal = Field(default_factory=ReferenceSignal)
    predictor: Predictor = Field(default_factory=Predictor)
    loss: LossProcess = Field(default_factory=LossProcess)
    seed: int = settings.DEFAULT_SEED
    log_decimation: int = Field(default=1, ge=1)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_horizon(self):
        ratio = self.duration / self.h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError("duration must be a whole number of sampling periods")
        if not math.isclose(self.pid.h, self.h, rel_tol=0, abs_tol=1e-15):
            raise ValueError("pid.h must equal the sampling period h")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.h))


class TimeseriesRow(NamedTuple):
    t: float
    r: float
    y: float
    y_ctrl: float
    u: float
    lost: bool


@dataclass(frozen=True)
class RunResult:
    iae: float
    observed_plr: float
    steps: int
    lost_count: int
    timeseries: Tuple[TimeseriesRow, ...]
    final_state: PlantState
    failed: bool = False
    failure_step: Optional[int] = None
    failure_reason: Optional[str] = None


class BatchSummary(BaseModel):
    seeds: List[int]
    iae: List[float]
    observed_plr: List[float]
    failed: List[bool]
    median: float
    mean: float
    min: float
    max: float
    observed_plr_mean: float
    n_failed: int = 0

    @property
    def n_replicas(self) -> int:
        return len(self.seeds)
