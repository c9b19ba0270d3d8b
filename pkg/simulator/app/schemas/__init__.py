"""Pydantic schemas and value types for every configurable part of the simulator"""

from app.schemas.channel import PathLossModel, PlrCurve, RadioProfile, RegionBounds
from app.schemas.compensation import HistoryBuffer, Predictor, PredictorKind
from app.schemas.control import PidParams, PidState, ReferenceKind, ReferenceSignal
from app.schemas.experiment import Command, ExperimentConfig, ExperimentSpec
from app.schemas.plant import ContinuousPlant, DiscretePlant, PlantParams, PlantState
from app.schemas.simulation import BatchSummary, LossKind, LossProcess, RunResult, SimConfig

__all__ = [
    "RadioProfile", "PathLossModel", "PlrCurve", "RegionBounds",
    "Predictor", "PredictorKind", "HistoryBuffer",
    "PidParams", "PidState", "ReferenceKind", "ReferenceSignal",
    "Command", "ExperimentConfig", "ExperimentSpec",
    "PlantParams", "ContinuousPlant", "DiscretePlant", "PlantState",
    "LossKind", "LossProcess", "SimConfig", "RunResult", "BatchSummary",
]
