import pytest

from app.schemas.channel import PathLossModel, RadioProfile, RegionSettings
from app.schemas.compensation import Predictor
from app.schemas.control import PidParams, ReferenceSignal
from app.schemas.plant import PlantParams
from app.schemas.simulation import LossProcess, SimConfig
from app.services.plant import discretize_zoh, plant_from_params


@pytest.fixture
def radio():
    return RadioProfile()


@pytest.fixture
def path_loss():
    return PathLossModel()


@pytest.fixture
def region_settings():
    return RegionSettings()


@pytest.fixture
def discrete_plant():
    """Default plant 1000 / (s^2 + s) sampled at 10 ms"""
    return discretize_zoh(plant_from_params(PlantParams()), 0.01)


@pytest.fixture
def make_config():
    """Factory for short SimConfigs; keyword arguments replace whole fields"""

    def _make(duration=10.0, p=0.0, predictor=None, seed=7, **changes):
        fields = dict(
            h=0.01,
            duration=duration,
            pid=PidParams(),
            reference=ReferenceSignal(),
            predictor=predictor or Predictor(),
            loss=LossProcess(p=p),
            seed=seed,
        )
        fields.update(changes)
        return SimConfig(**fields)

    return _make
