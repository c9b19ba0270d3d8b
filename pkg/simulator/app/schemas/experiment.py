from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.schemas.channel import PathLossModel, RadioProfile, RegionSettings, SweepSettings
from app.schemas.compensation import Predictor, PredictorKind
from app.schemas.control import CalibrationGrid, PidParams, ReferenceSignal
from app.schemas.plant import PlantParams
from app.schemas.simulation import LossKind, LossProcess, SimConfig


class Command(str, Enum):
    SWEEP_CHANNEL = "sweep-channel"
    RUN = "run"
    BATCH = "batch"
    COMPARE = "compare"
    CALIBRATE = "calibrate"


class ExperimentSpec(BaseModel):
    command: Command
    config_path: Optional[Path] = None
    output_dir: Path
    overrides: List[str] = Field(default_factory=list)


class SimSection(BaseModel):
    h: float = Field(default=0.01, gt=0)
    duration: float = Field(default=100.0, gt=0)
    seed: int = settings.DEFAULT_SEED
    log_decimation: int = Field(default=1, ge=1)

    model_config = ConfigDict(extra="forbid")


class PidSection(BaseModel):
    k: float = 1.15
    ti: float = Field(default=10.0, gt=0)
    td: float = Field(default=0.07, ge=0)
    n_filter: float = Field(default=10.0, gt=0)

    model_config = ConfigDict(extra="forbid")


class LossSection(BaseModel):
    kind: LossKind = LossKind.BERNOULLI
    p: float = Field(default=0.0, ge=0, le=1)
    distance: float = Field(default=6.0, gt=0)
    redraw_period: int = Field(default=100, ge=1)
    seed: Optional[int] = None

    model_config = ConfigDict(extra="forbid")


class BatchSection(BaseModel):
    n_seeds: int = Field(default=20, ge=1)
    max_workers: Optional[int] = Field(default=None, ge=1)

    model_config = ConfigDict(extra="forbid")


BAR_LABELS = ("NOLOSS", "NON", "Alg1", "Alg2", "Alg3")


class CompareSection(BaseModel):
    bars: List[str] = Field(default_factory=lambda: list(BAR_LABELS))

    model_config = ConfigDict(extra="forbid")

    @field_validator("bars", mode="before")
    def split_bars(cls, v):
        if isinstance(v, str):
            return [i.strip() for i in v.split(",") if i.strip()]
        return v

    @field_validator("bars")
    def known_bars(cls, v: List[str]) -> List[str]:
        unknown = [b for b in v if b not in BAR_LABELS]
        if unknown:
            raise ValueError(f"unknown bars {unknown}; choose from {list(BAR_LABELS)}")
        if not v:
            raise ValueError("at least one bar is required")
        return v


class ExperimentConfig(BaseModel):
    """Everything one config file can say; sections map 1:1 onto fields"""

    sim: SimSection = Field(default_factory=SimSection)
    plant: PlantParams = Field(default_factory=PlantParams)
    pid: PidSection = Field(default_factory=PidSection)
    reference: ReferenceSignal = Field(default_factory=ReferenceSignal)
    predictor: Predictor = Field(default_factory=Predictor)
    loss: LossSection = Field(default_factory=LossSection)
    radio: RadioProfile = Field(default_factory=RadioProfile)
    path_loss: PathLossModel = Field(default_factory=PathLossModel)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    regions: RegionSettings = Field(default_factory=RegionSettings)
    batch: BatchSection = Field(default_factory=BatchSection)
    compare: CompareSection = Field(default_factory=CompareSection)
    calibration: CalibrationGrid = Field(default_factory=CalibrationGrid)

    model_config = ConfigDict(extra="forbid")

    def pid_params(self) -> PidParams:
        return PidParams(h=self.sim.h, **self.pid.model_dump())

    def simulation(self, **changes) -> SimConfig:
        """Assemble the SimConfig; keyword changes replace whole fields"""
        fields = dict(
            plant=self.plant,
            h=self.sim.h,
            duration=self.sim.duration,
            pid=self.pid_params(),
            reference=self.reference,
            predictor=self.predictor,
            loss=LossProcess(
                profile=self.radio,
                model=self.path_loss,
                **self.loss.model_dump(),
            ),
            seed=self.sim.seed,
            log_decimation=self.sim.log_decimation,
        )
        fields.update(changes)
        return SimConfig(**fields)

    def compare_runs(self) -> List[Tuple[str, SimConfig]]:
        """(bar label, SimConfig) pairs in bar order.

        NOLOSS always runs a lossless Bernoulli link; the other bars keep the
        configured loss process and only swap the predictor.
        """
        base = self.simulation()
        lossless = base.loss.model_copy(update={"kind": LossKind.BERNOULLI, "p": 0.0})
        table = {
            "NOLOSS": (Predictor(kind=PredictorKind.NONE), lossless),
            "NON": (Predictor(kind=PredictorKind.NONE), base.loss),
            "Alg1": (Predictor(kind=PredictorKind.HOLD), base.loss),
            "Alg2": (
                Predictor(kind=PredictorKind.MOVING_AVERAGE, m=self.predictor.m),
                base.loss,
            ),
            "Alg3": (
                Predictor(kind=PredictorKind.WEIGHTED, alpha=self.predictor.alpha),
                base.loss,
            ),
        }
        return [
            (bar, self.simulation(predictor=table[bar][0], loss=table[bar][1]))
            for bar in self.compare.bars
        ]
