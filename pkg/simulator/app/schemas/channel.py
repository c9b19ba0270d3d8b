from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings


class RadioProfile(BaseModel):
    """Transmitter/receiver hardware parameters, MICA2-like defaults"""

    tx_power: float = 0.0  # dBm
    noise_floor: float = -105.0  # dBm
    data_rate: float = Field(default=19200.0, gt=0)  # bit/s
    noise_bandwidth: float = Field(default=30000.0, gt=0)  # Hz
    encoding_expansion: float = Field(default=2.0, ge=1)  # Manchester
    preamble_bytes: int = Field(default=2, ge=0)
    frame_bytes: int = Field(default=50, ge=1)

    model_config = ConfigDict(frozen=True, extra="forbid")


class PathLossModel(BaseModel):
    """Log-normal shadowing parameters"""

    ref_distance_d0: float = Field(default=1.0, gt=0)  # m
    pl_at_d0: float = 63.0  # dB
    path_loss_exponent: float = Field(default=4.0, gt=0)
    shadowing_sigma: float = Field(default=3.0, ge=0)  # dB

    model_config = ConfigDict(frozen=True, extra="forbid")


class PlrCurve(BaseModel):
    distances: List[float]
    samples_per_distance: int = Field(..., ge=1)
    plr_samples: List[List[float]]  # [distance][sample]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_matrix(self):
        if len(self.plr_samples) != len(self.distances):
            raise ValueError("one row of samples is required per distance")
        for row in self.plr_samples:
            if len(row) != self.samples_per_distance:
                raise ValueError("every distance must carry samples_per_distance measures")
            if any(not 0.0 <= v <= 1.0 for v in row):
                raise ValueError("PLR samples must lie in [0, 1]")
        return self


class RegionBounds(BaseModel):
    """Connected / transitional / disconnected split; None marks an unbounded edge"""

    connected_end: Optional[float] = None  # m
    disconnected_start: Optional[float] = None  # m
    eps_connected: float = 0.0
    eps_disconnected: float = 0.0

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_order(self):
        if self.connected_end is not None and self.connected_end <= 0:
            raise ValueError("connected_end must be positive")
        if (
            self.connected_end is not None
            and self.disconnected_start is not None
            and not self.connected_end < self.disconnected_start
        ):
            raise ValueError("connected_end must lie before disconnected_start")
        return self


class RegionSettings(BaseModel):
    ber_threshold_low: float = Field(default=1e-9, gt=0, lt=1)
    ber_threshold_high: float = Field(default=0.15, gt=0, lt=1)
    k_sigma: float = Field(default=2.0, ge=0)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_thresholds(self):
        if self.ber_threshold_low >= self.ber_threshold_high:
            raise ValueError("ber_threshold_low must be below ber_threshold_high")
        return self


class SweepSettings(BaseModel):
    d_min: float = Field(default=1.0, gt=0)
    d_max: float = Field(default=15.0, gt=0)
    step: float = Field(default=1.0, gt=0)
    samples: int = Field(default=80, ge=1)
    seed: int = settings.DEFAULT_SEED

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_range(self):
        if self.d_min > self.d_max:
            raise ValueError("d_min must not exceed d_max")
        return self
